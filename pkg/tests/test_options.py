from typing import Literal, Optional

import pytest

from ordinalseg.exceptions import ConfigValidationError
from ordinalseg.options import Bound, OrdOptions


class SampleOptions(OrdOptions):
    rate: float = 0.5
    steps: int = 3
    mode: Literal["fast", "exact"] = "fast"
    cap: Optional[float] = None
    widths: tuple[int, ...] = (8, 16)

    bounds = {
        "rate": Bound(low=0.0, high=1.0, low_open=True),
        "widths": Bound(low=1),
    }

    def validate(self):
        if self.mode == "exact" and self.steps < 10:
            raise ConfigValidationError("exact mode needs 10 steps", option="steps")


def test_bound_contains():
    bound = Bound(0.0, 1.0, low_open=True)
    assert not bound.contains(0.0)
    assert bound.contains(1.0)
    assert not bound.contains(float("nan"))
    assert Bound(low=2).contains(1e9)
    assert str(bound) == "(0, 1]"
    assert str(Bound(low=0.1)) == "[0.1, inf)"


def test_defaults_and_overrides():
    options = SampleOptions.load({"rate": 0.25}, steps=None, cap=2)
    assert options.rate == 0.25
    assert options.steps == 3
    assert options.cap == 2.0 and isinstance(options.cap, float)
    assert options.widths == (8, 16)
    assert SampleOptions().cap is None


def test_int_values_are_accepted_for_floats():
    assert isinstance(SampleOptions.load(rate=1).rate, float)


@pytest.mark.parametrize(
    ("source", "message"),
    [
        ({"speed": 1}, "Unrecognised option 'speed'"),
        ({"steps": 1.5}, "must have a value of type: int"),
        ({"steps": True}, "must have a value of type: int"),
        ({"mode": "slow"}, "must be one of"),
        ({"widths": [8, "x"]}, r"widths\[1\]"),
        ({"rate": 0}, r"must lie in \(0, 1\]"),
        ({"widths": [8, 0]}, "'widths' must lie in"),
        ({"mode": "exact"}, "exact mode"),
    ],
)
def test_invalid_options(source, message):
    with pytest.raises(ConfigValidationError, match=message):
        SampleOptions.load(source)


def test_options_are_immutable_values():
    options = SampleOptions.load(rate=0.2)
    with pytest.raises(AttributeError):
        options.rate = 0.3
    assert options == SampleOptions.load({"rate": 0.2})
    assert hash(options) == hash(SampleOptions.load({"rate": 0.2}))
    changed = options.replace(steps=4)
    assert (changed.steps, changed.rate, options.steps) == (4, 0.2, 3)
    with pytest.raises(ConfigValidationError):
        options.replace(rate=2.0)


def test_as_dict_and_get():
    options = SampleOptions.load(widths=[4])
    assert options.as_dict() == {
        "rate": 0.5,
        "steps": 3,
        "mode": "fast",
        "cap": None,
        "widths": (4,),
    }
    assert options.get("cap", 1.0) == 1.0
    with pytest.raises(AttributeError):
        options.missing  # noqa: B018


def test_parse_lenient_skips_unknown_keys():
    (options,) = SampleOptions.parse({"rate": 0.1, "other": 1}, strict=False)
    assert options.rate == 0.1
