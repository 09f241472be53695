from __future__ import annotations

import math
import sys
from typing import TYPE_CHECKING, Any, ClassVar, NamedTuple, Optional

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

from ..exceptions import ConfigValidationError
from .annotations import TypeAnnotation

NoValue = object()


class Bound(NamedTuple):
    """
    Numeric range for an option. Open ends are excluded from the range, ``None``
    means unbounded on that side.
    """

    low: Optional[float] = None
    high: Optional[float] = None
    low_open: bool = False
    high_open: bool = False

    def contains(self, value: float) -> bool:
        if isinstance(value, float) and not math.isfinite(value):
            return False
        if self.low is not None and (
            value <= self.low if self.low_open else value < self.low
        ):
            return False
        if self.high is not None and (
            value >= self.high if self.high_open else value > self.high
        ):
            return False
        return True

    def __str__(self):
        low = "-inf" if self.low is None else f"{self.low:g}"
        high = "inf" if self.high is None else f"{self.high:g}"
        return (
            ("(" if self.low_open or self.low is None else "[")
            + f"{low}, {high}"
            + (")" if self.high_open or self.high is None else "]")
        )


class OrdOptions:
    """
    A typed bag of options. Subclasses declare annotated fields with defaults, and
    optionally numeric bounds, then values from CLI flags or config files are
    parsed against those declarations.

    Options are immutable once parsed, use ``replace`` to derive a variant.
    """

    bounds: ClassVar[Mapping[str, Bound]] = {}

    def __init__(self, **options: Any):
        fields = self.get_fields()
        for key, value in options.items():
            if key not in fields:
                raise ConfigValidationError(
                    f"Unrecognised option {key!r}", option=key
                )
            object.__setattr__(self, key, fields[key].coerce(value))

    def __setattr__(self, name: str, value: Any):
        raise AttributeError(f"{self.__class__.__name__} is immutable")

    def __getattr__(self, name: str):
        if name not in self.get_fields():
            raise AttributeError(
                f"{self.__class__.__name__} has no such attribute {name!r}"
            )
        if self.get_fields()[name].is_optional:
            return None
        raise AttributeError(
            f"{self.__class__.__name__} has no value for option {name!r}"
        )

    def __eq__(self, other: object) -> bool:
        return type(other) is type(self) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash((type(self).__name__, tuple(sorted(self.as_dict().items()))))

    def __repr__(self):
        return (
            f"{self.__class__.__name__}("
            + ", ".join(f"{key}={value!r}" for key, value in self.as_dict().items())
            + ")"
        )

    @classmethod
    def parse(
        cls,
        source: Mapping[str, Any] | list,
        strict: bool = True,
    ) -> Iterator[Any]:
        """
        Yield one options object per item in source, which may be a single mapping
        or a list of mappings.
        """
        fields = cls.get_fields()
        for index, item in enumerate(cls.normalize(source)):
            if not isinstance(item, dict):
                raise ConfigValidationError(
                    f"Expected a table of options at index {index}, got {item!r}"
                )
            options = {}
            for key, value in item.items():
                if key not in fields:
                    if strict:
                        raise ConfigValidationError(
                            f"Unrecognised option {key!r}", option=key
                        )
                    continue
                if strict:
                    for error_msg in fields[key].validate((key,), value):
                        raise ConfigValidationError(error_msg, option=key)
                options[key] = value

            result = cls(**options)
            if strict:
                result.check_bounds()
                result.validate()
            yield result

    @classmethod
    def load(cls, source: Optional[Mapping[str, Any]] = None, **overrides: Any):
        """
        Parse a single options object strictly, with keyword overrides applied on
        top of source. Keys whose value is None are ignored.
        """
        merged = dict(source or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return next(cls.parse(merged, strict=True))

    @classmethod
    def normalize(cls, config: Any):
        if isinstance(config, (list, tuple)):
            yield from config
        else:
            yield config

    def check_bounds(self):
        for key, bound in self.bounds.items():
            value = self.get(key)
            if value is None:
                continue
            values = value if isinstance(value, tuple) else (value,)
            for item in values:
                if not bound.contains(item):
                    raise ConfigValidationError(
                        f"Option {key!r} must lie in {bound}, got {item!r}",
                        option=key,
                    )

    def validate(self):
        """
        Validation rules that involve more than one option go here.
        """

    def get(self, key: str, default: Any = NoValue) -> Any:
        """
        Fetch an option value, falling back to the default given here, then the
        default declared on the class, then the zero value for the field type.
        """
        if key in self.__dict__:
            return self.__dict__[key]

        if default is NoValue:
            default = getattr(self.__class__, key, default)
        if default is NoValue:
            annotation = self.get_fields().get(key)
            assert annotation, f"Unknown option {key!r}"
            return annotation.zero_value()

        return default

    def as_dict(self) -> dict[str, Any]:
        return {key: self.get(key) for key in self.get_fields()}

    def replace(self, **changes: Any):
        merged = self.as_dict()
        merged.update(changes)
        return self.load(merged)

    @classmethod
    def get_fields(cls) -> dict[str, TypeAnnotation]:
        """
        Recent python versions removed inheritance for __annotations__
        so we have to implement it explicitly, evaluating string annotations
        in the namespace of the module that declared them
        """
        if "_OrdOptions__fields" not in cls.__dict__:
            fields: dict[str, TypeAnnotation] = {}
            for klass in reversed(cls.__mro__):
                if not issubclass(klass, OrdOptions):
                    continue
                namespace = {
                    **vars(sys.modules[klass.__module__]),
                    **TypeAnnotation.get_type_hint_globals(),
                }
                for key, annotation in klass.__dict__.get(
                    "__annotations__", {}
                ).items():
                    if key.startswith("_") or key == "bounds":
                        continue
                    if isinstance(annotation, str):
                        # same lazy evaluation typing.get_type_hints performs
                        annotation = eval(annotation, namespace)  # noqa: S307
                    fields[key] = TypeAnnotation.parse(annotation)
            cls.__fields = fields
        return cls.__fields
