from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, ClassVar, Literal, Optional, Union

import numpy as np

from ..autodiff import Node, constant
from ..core import (
    ClassConfig,
    CostMatrix,
    LabelLike,
    ProbLike,
    ProbMap,
    as_label_array,
    as_prob_array,
    check_same_grid,
    cost_matrix,
)
from ..exceptions import ConfigValidationError, UsageError, ValidationError
from ..options import Bound, OrdOptions

if TYPE_CHECKING:
    from collections.abc import Iterator


class LossConfig(OrdOptions):
    """
    Hyperparameters of the per-pixel ordinal losses. The margins and weights of
    the different losses share symbols in the literature, so each has its own
    name here.
    """

    lambda_combine: float = 1.0
    qul_delta: float = 0.05
    qul_lambda: float = 1.0
    expmse_lambda: float = 1.0
    o2_delta: float = 0.05

    bounds = {
        "lambda_combine": Bound(low=0.0),
        "qul_delta": Bound(low=0.0, low_open=True),
        "qul_lambda": Bound(low=0.0, low_open=True),
        "expmse_lambda": Bound(low=0.0, low_open=True),
        "o2_delta": Bound(low=0.0, low_open=True),
    }


class SpatialLossConfig(OrdOptions):
    """
    Hyperparameters of the losses defined over the pixel grid.

    ``gamma_clamp`` caps the distance transform, ``gamma_decay`` is the rate of the
    boundary emphasis weight and ``gamma_hat`` bounds signed distance fields. An
    unset ``gamma_hat`` means the image diagonal.
    """

    delta_conf: float = 0.05
    gamma_clamp: float = 5.0
    gamma_decay: float = 0.5
    gamma_hat: Optional[float] = None
    p_exponent: Literal[1, 2] = 1

    bounds = {
        "delta_conf": Bound(low=0.0, high=1.0, low_open=True, high_open=True),
        "gamma_clamp": Bound(low=0.0, low_open=True),
        "gamma_decay": Bound(low=0.0, low_open=True),
        "gamma_hat": Bound(low=0.0, low_open=True),
    }

    def resolve_gamma_hat(self, height: int, width: int) -> float:
        if self.gamma_hat is not None:
            return self.gamma_hat
        return float(np.hypot(height, width))


@dataclass(frozen=True)
class LossValue:
    total: float
    pixel_map: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.pixel_map is not None:
            pixel_map = np.array(self.pixel_map, dtype=np.float64)
            pixel_map.setflags(write=False)
            object.__setattr__(self, "pixel_map", pixel_map)
        object.__setattr__(self, "total", float(self.total))


class MetaOrdinalLoss(type):
    """
    This metaclass makes all descendants of OrdinalLoss register themselves under
    their key on declaration and validates that they include the expected class
    attributes.
    """

    def __init__(cls, *args):
        super().__init__(*args)
        if cls.__name__ == "OrdinalLoss":
            return

        assert isinstance(getattr(cls, "__key__", None), str)
        assert issubclass(getattr(cls, "LossOptions", None), OrdOptions)
        OrdinalLoss._OrdinalLoss__loss_types[cls.__key__] = cls


class OrdinalLoss(metaclass=MetaOrdinalLoss):
    """
    A loss over predicted class probabilities and ground-truth labels.

    Subclasses implement ``pixel_loss`` returning an NxHxW node of per-pixel
    contributions, or override ``build`` when the loss has no per-pixel form.
    ``build`` accepts an optional reference probability array: losses that derive
    geometry from thresholded predictions compute it from the reference, so that
    gradients can be taken with that geometry held fixed.
    """

    __key__: ClassVar[str]
    __loss_types: ClassVar[dict[str, type[OrdinalLoss]]] = {}

    LossOptions: ClassVar[type[OrdOptions]] = LossConfig
    has_pixel_map: ClassVar[bool] = True
    # Hyperparameter ranges explored by the reference training protocol
    protocol_bounds: ClassVar[Mapping[str, Bound]] = {}

    options: OrdOptions
    cost: Optional[CostMatrix]

    def __init__(
        self,
        options: Optional[OrdOptions] = None,
        cost: Optional[CostMatrix] = None,
    ):
        if options is None:
            options = self.LossOptions()
        elif not isinstance(options, self.LossOptions):
            raise ConfigValidationError(
                f"Loss {self.__key__!r} expects {self.LossOptions.__name__}, "
                f"got {type(options).__name__}"
            )
        self.options = options
        self.cost = cost

    def __repr__(self):
        return f"{self.__class__.__name__}({self.options!r})"

    @classmethod
    def get_loss_types(cls) -> tuple[str, ...]:
        return tuple(cls.__loss_types)

    @classmethod
    def lookup(cls, name: str) -> type[OrdinalLoss]:
        try:
            return cls.__loss_types[name]
        except KeyError:
            raise UsageError(
                f"Unknown loss {name!r}, expected one of: "
                + ", ".join(cls.__loss_types)
            ) from None

    @classmethod
    def from_mapping(
        cls, options: Mapping[str, Any], safe: bool = True
    ) -> OrdinalLoss:
        """
        Create an instance from a mapping that may hold options for other losses
        too, only the keys this loss declares are used.
        """
        fields = cls.LossOptions.get_fields()
        parsed = cls.LossOptions.load(
            {key: value for key, value in options.items() if key in fields}
        )
        if safe:
            cls.check_protocol(parsed)
        return cls(parsed)

    @classmethod
    def check_protocol(cls, options: OrdOptions):
        for key, bound in cls.protocol_bounds.items():
            value = options.get(key)
            if value is not None and not bound.contains(value):
                raise ConfigValidationError(
                    f"Option {key!r} = {value!r} for loss {cls.__key__!r} is outside "
                    f"the tuned range {bound}",
                    option=key,
                )

    def cost_for(self, k_classes: int) -> CostMatrix:
        if self.cost is None:
            return cost_matrix(ClassConfig(k_classes))
        if self.cost.k_classes != k_classes:
            raise ValidationError(
                f"Cost matrix is for {self.cost.k_classes} classes but predictions "
                f"have {k_classes}"
            )
        return self.cost

    def pixel_loss(
        self,
        probs: Node,
        labels: np.ndarray,
        reference: np.ndarray,
    ) -> Node:
        raise NotImplementedError

    def build(
        self,
        probs: Node,
        labels: np.ndarray,
        reference: Optional[np.ndarray] = None,
    ) -> Node:
        """
        The scalar loss as a differentiable node, from NxHxWxK probabilities and
        NxHxW labels.
        """
        if reference is None:
            reference = probs.value
        return self.pixel_loss(probs, labels, reference).mean()

    def __call__(self, probs: ProbLike, labels: LabelLike) -> LossValue:
        values = as_prob_array(probs)
        label_array = as_label_array(labels)
        check_same_grid(values, label_array)
        self.cost_for(values.shape[-1])

        probs_node = constant(values)
        if not self.has_pixel_map:
            return LossValue(self.build(probs_node, label_array, values).item())

        pixel_map = self.pixel_loss(probs_node, label_array, values)

        total = pixel_map.mean().item()
        if isinstance(probs, ProbMap) or (
            isinstance(probs, np.ndarray) and probs.ndim == 3
        ):
            return LossValue(total, pixel_map.value[0])
        return LossValue(total, pixel_map.value)

    def gradient(self, probs: ProbLike, labels: LabelLike) -> np.ndarray:
        """
        Gradient of the loss with respect to the probabilities, with any geometry
        derived from the predictions held fixed.
        """
        values = as_prob_array(probs)
        label_array = as_label_array(labels)
        check_same_grid(values, label_array)
        variable = Node(values)
        self.build(variable, label_array, values).backward()
        assert variable.grad is not None
        if isinstance(probs, ProbMap) or (
            isinstance(probs, np.ndarray) and probs.ndim == 3
        ):
            return variable.grad[0]
        return variable.grad


class Objective:
    """
    Cross-entropy plus lambda times the sum of zero or more ordinal terms.
    """

    terms: tuple[OrdinalLoss, ...]
    lambda_combine: float

    def __init__(self, terms: Sequence[OrdinalLoss] = (), lambda_combine: float = 1.0):
        if not lambda_combine >= 0:
            raise ConfigValidationError(
                f"lambda_combine must be >= 0, got {lambda_combine}",
                option="lambda_combine",
            )
        self.terms = tuple(terms)
        self.lambda_combine = float(lambda_combine)
        self._ce = OrdinalLoss.lookup("ce")()

    @classmethod
    def parse_selection(cls, selection: str) -> tuple[str, ...]:
        """
        Split a selection such as ``qul+cssdf`` into loss names. A selection of
        just ``ce`` has no ordinal terms.
        """
        names = tuple(name.strip() for name in selection.split("+"))
        if not all(names):
            raise UsageError(f"Malformed loss selection {selection!r}")
        for name in names:
            OrdinalLoss.lookup(name)
        if "ce" in names and len(names) > 1:
            raise UsageError(
                "Cross-entropy is always included, do not list it alongside "
                f"ordinal terms in {selection!r}"
            )
        return tuple(name for name in names if name != "ce")

    @classmethod
    def from_selection(
        cls,
        selection: str,
        options: Optional[Mapping[str, Any]] = None,
        safe: bool = True,
    ) -> Objective:
        options = dict(options or {})
        terms = [
            OrdinalLoss.lookup(name).from_mapping(options, safe=safe)
            for name in cls.parse_selection(selection)
        ]
        lambda_combine = options.get("lambda_combine", 1.0)
        if safe and terms and not Bound(0.0, 1e4).contains(lambda_combine):
            raise ConfigValidationError(
                f"lambda_combine = {lambda_combine!r} is outside the tuned range "
                "[0, 10000]",
                option="lambda_combine",
            )
        return cls(terms, lambda_combine)

    @property
    def name(self) -> str:
        if not self.terms:
            return "ce"
        return "+".join(term.__key__ for term in self.terms)

    def iter_terms(self) -> Iterator[OrdinalLoss]:
        yield self._ce
        yield from self.terms

    def build(
        self,
        probs: Node,
        labels: np.ndarray,
        reference: Optional[np.ndarray] = None,
    ) -> Node:
        total = self._ce.build(probs, labels, reference)
        if not self.terms or self.lambda_combine == 0:
            return total
        ordinal = self.terms[0].build(probs, labels, reference)
        for term in self.terms[1:]:
            ordinal = ordinal + term.build(probs, labels, reference)
        return total + self.lambda_combine * ordinal


def combined_loss(
    ce: LossValue,
    ordinal: Union[LossValue, Sequence[LossValue]],
    lambda_combine: float,
) -> LossValue:
    if not lambda_combine >= 0:
        raise ConfigValidationError(
            f"lambda_combine must be >= 0, got {lambda_combine}",
            option="lambda_combine",
        )
    terms = (ordinal,) if isinstance(ordinal, LossValue) else tuple(ordinal)
    return LossValue(ce.total + lambda_combine * sum(term.total for term in terms))
