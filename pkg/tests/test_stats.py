import math

import pytest

from ordinalseg.exceptions import (
    ConfigValidationError,
    InsufficientDataError,
    ValidationError,
)
from ordinalseg.stats import ComparisonVerdict, Interval, compare_intervals, fold_interval


def test_fold_interval_examples():
    assert fold_interval([0.5, 0.5, 0.5]) == Interval(0.5, 0.0, 3)
    assert fold_interval([0.0, 1.0]) == Interval(0.5, 0.5, 2)
    interval = fold_interval([1, 2, 3, 4, 5])
    assert interval.mu == 3
    assert interval.sigma == pytest.approx(math.sqrt(2))


def test_fold_interval_sample_deviation():
    assert fold_interval([0.0, 1.0], population=False).sigma == pytest.approx(
        math.sqrt(0.5)
    )


def test_fold_interval_needs_two_finite_scores():
    with pytest.raises(InsufficientDataError):
        fold_interval([0.3])
    with pytest.raises(ValidationError):
        fold_interval([0.3, float("nan")])


def test_interval_validation():
    with pytest.raises(ValidationError):
        Interval(0.5, -0.1)
    with pytest.raises(ValidationError):
        Interval(float("inf"), 0.1)
    assert Interval(0.5, 0.1).format(scale=100) == "50.0 ± 10.0"


def test_disjoint_intervals():
    verdict = compare_intervals(Interval(0.5, 0.1), Interval(0.8, 0.05))
    assert verdict.relation == "first_inferior"
    assert verdict.triggered == ("a", "c", "d")
    assert verdict.rho == pytest.approx(0.75)
    assert verdict.format() == "first_inferior via a,c,d"


def test_nested_interval_is_inferior():
    verdict = compare_intervals(Interval(0.7, 0.05), Interval(0.75, 0.2))
    assert verdict.relation == "first_inferior"
    assert "b" in verdict.triggered


def test_identical_intervals_are_indeterminate():
    verdict = compare_intervals(Interval(0.6, 0.1), Interval(0.6, 0.1))
    assert verdict == ComparisonVerdict("indeterminate")
    assert verdict.format() == "indeterminate"


def test_zero_deviation_skips_rho():
    verdict = compare_intervals(Interval(0.5, 0.0), Interval(0.6, 0.2))
    assert verdict.skipped == ("e",)
    assert verdict.rho is None
    assert verdict.relation == "first_inferior"


def test_overlapping_intervals_can_be_indeterminate():
    # the lower interval reaches past the upper end of the other
    verdict = compare_intervals(Interval(0.5, 0.4), Interval(0.55, 0.1))
    assert verdict.relation == "indeterminate"
    assert verdict.triggered == ()


def test_lower_is_better_mirrors_intervals():
    verdict = compare_intervals(
        Interval(0.1, 0.01), Interval(0.3, 0.01), higher_is_better=False
    )
    assert verdict.relation == "second_inferior"


def test_rho_threshold_must_be_positive():
    with pytest.raises(ConfigValidationError):
        compare_intervals(Interval(0.1, 0.1), Interval(0.2, 0.1), rho_threshold=0)


def test_verdict_needs_conditions():
    with pytest.raises(ValidationError):
        ComparisonVerdict("first_inferior")


# (first, second, relation, triggered), worked out by hand
INTERVAL_PAIRS = [
    ((0.50, 0.10), (0.80, 0.05), "first_inferior", ("a", "c", "d")),
    ((0.70, 0.05), (0.78, 0.20), "first_inferior", ("b", "c", "d")),
    ((0.60, 0.10), (0.60, 0.10), "indeterminate", ()),
    ((0.50, 0.00), (0.60, 0.20), "first_inferior", ("b", "c", "d")),
    ((0.50, 0.40), (0.55, 0.10), "indeterminate", ()),
    ((0.90, 0.02), (0.10, 0.30), "second_inferior", ("a", "c", "d")),
    ((0.31, 0.07), (0.33, 0.01), "first_inferior", ("e",)),
    ((0.45, 0.15), (0.40, 0.15), "second_inferior", ("d",)),
    ((0.20, 0.20), (0.21, 0.25), "first_inferior", ("b", "d")),
    ((0.99, 0.00), (0.98, 0.00), "second_inferior", ("a", "c", "d")),
    # upper ends meet and rho is exactly the threshold
    ((0.00, 1.00), (0.50, 0.50), "indeterminate", ()),
    ((0.62, 0.03), (0.64, 0.03), "first_inferior", ("d",)),
    ((0.80, 0.30), (0.70, 0.05), "second_inferior", ("b", "c", "d")),
    ((0.15, 0.05), (0.95, 0.01), "first_inferior", ("a", "c", "d")),
    ((0.55, 0.20), (0.56, 0.02), "indeterminate", ()),
    ((0.40, 0.10), (0.40, 0.20), "indeterminate", ()),
    # upper end of the first equals the other mean, rho is exactly 0.5
    ((0.33, 0.33), (0.66, 0.33), "first_inferior", ("d",)),
    ((0.71, 0.08), (0.69, 0.12), "indeterminate", ()),
    ((0.05, 0.01), (0.07, 0.50), "first_inferior", ("b", "c", "d")),
    ((0.88, 0.10), (0.87, 0.05), "second_inferior", ("b", "d")),
]


@pytest.mark.parametrize(("first", "second", "relation", "triggered"), INTERVAL_PAIRS)
def test_compare_interval_pairs(first, second, relation, triggered):
    verdict = compare_intervals(Interval(*first), Interval(*second))
    assert (verdict.relation, verdict.triggered) == (relation, triggered)


@pytest.mark.parametrize(("first", "second", "relation", "triggered"), INTERVAL_PAIRS)
def test_compare_is_antisymmetric(first, second, relation, triggered):
    forward = compare_intervals(Interval(*first), Interval(*second))
    backward = compare_intervals(Interval(*second), Interval(*first))
    swapped = {
        "first_inferior": "second_inferior",
        "second_inferior": "first_inferior",
        "indeterminate": "indeterminate",
    }
    assert backward.relation == swapped[forward.relation]
    assert backward.triggered == forward.triggered


@pytest.mark.parametrize(("first", "second", "relation", "triggered"), INTERVAL_PAIRS)
def test_inferior_interval_has_lower_mean(first, second, relation, triggered):
    verdict = compare_intervals(Interval(*first), Interval(*second))
    if verdict.relation == "first_inferior":
        assert first[0] < second[0]
    elif verdict.relation == "second_inferior":
        assert second[0] < first[0]


def test_condition_implications(rng):
    for _ in range(2000):
        mus = rng.uniform(0, 1, size=2)
        sigmas = rng.uniform(0, 0.3, size=2) * (rng.uniform(size=2) > 0.1)
        verdict = compare_intervals(
            Interval(mus[0], sigmas[0]), Interval(mus[1], sigmas[1])
        )
        triggered = set(verdict.triggered)
        if "a" in triggered:
            assert "c" in triggered and "b" not in triggered
        if "c" in triggered:
            assert "d" in triggered
        assert bool(triggered) == (verdict.relation != "indeterminate")


def test_zero_deviation_of_the_lower_interval_only_skips_rho():
    lower_first = compare_intervals(Interval(0.98, 0.0), Interval(0.99, 0.0))
    assert (lower_first.relation, lower_first.skipped) == ("first_inferior", ("e",))
    lower_second = compare_intervals(Interval(0.6, 0.2), Interval(0.5, 0.0))
    assert lower_second.skipped == ("e",)
    assert lower_second.rho is None

    # a zero deviation on the higher interval still gives rho
    upper_zero = compare_intervals(Interval(0.5, 0.1), Interval(0.6, 0.0))
    assert upper_zero.skipped == ()
    assert upper_zero.rho == pytest.approx(0.0)
    assert upper_zero.triggered == ("e",)
