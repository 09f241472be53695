"""
Aggregation of cross-validation scores into mean ± standard deviation intervals,
and the rule set deciding whether one interval is inferior to another.

Conditions, evaluated for the interval with the lower mean (I1) against the other
(I2), each sufficient on its own:

  a. the intervals are disjoint
  b. I1 lies within I2
  c. the upper end of I1 is below the mean of I2
  d. the upper end of I1 is below the upper end of I2
  e. rho = |(mu1 + sigma1) - (mu2 - sigma2)| / (2 sigma1) is below a threshold
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np

from .exceptions import ConfigValidationError, InsufficientDataError, ValidationError

Relation = Literal["first_inferior", "second_inferior", "indeterminate"]

DEFAULT_RHO_THRESHOLD = 0.5


@dataclass(frozen=True)
class Interval:
    mu: float
    sigma: float
    n_folds: Optional[int] = None

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValidationError(
                f"Interval bounds must be finite, got mu={self.mu} sigma={self.sigma}"
            )
        if self.sigma < 0:
            raise ValidationError(
                f"Standard deviation must be >= 0, got {self.sigma}"
            )
        if self.n_folds is not None and self.n_folds < 1:
            raise ValidationError(f"n_folds must be positive, got {self.n_folds}")
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def low(self) -> float:
        return self.mu - self.sigma

    @property
    def high(self) -> float:
        return self.mu + self.sigma

    def mirrored(self) -> Interval:
        return Interval(-self.mu, self.sigma, self.n_folds)

    def format(self, scale: float = 1.0, digits: int = 1) -> str:
        return f"{self.mu * scale:.{digits}f} ± {self.sigma * scale:.{digits}f}"


@dataclass(frozen=True)
class ComparisonVerdict:
    relation: Relation
    triggered: tuple[str, ...] = ()
    rho: Optional[float] = None
    skipped: tuple[str, ...] = field(default=())
    rho_threshold: float = DEFAULT_RHO_THRESHOLD

    def __post_init__(self):
        if self.relation != "indeterminate" and not self.triggered:
            raise ValidationError(
                f"Verdict {self.relation!r} needs at least one triggered condition"
            )

    def format(self) -> str:
        if self.relation == "indeterminate":
            return "indeterminate"
        return f"{self.relation} via {','.join(self.triggered)}"


def fold_interval(scores: Sequence[float], population: bool = True) -> Interval:
    """
    Mean and standard deviation of per-fold scores, with divisor n by default or
    n - 1 when ``population`` is false.
    """
    values = np.asarray(scores, dtype=np.float64)
    if values.ndim != 1 or values.size < 2:
        raise InsufficientDataError(
            f"At least 2 fold scores are needed for an interval, got {values.size}"
        )
    if not np.isfinite(values).all():
        raise ValidationError("Fold scores must be finite")
    return Interval(
        mu=float(values.mean()),
        sigma=float(values.std(ddof=0 if population else 1)),
        n_folds=int(values.size),
    )


def _inferior_conditions(
    lower: Interval, upper: Interval, rho_threshold: float
) -> tuple[list[str], Optional[float], list[str]]:
    """Conditions under which ``lower`` (mu1 < mu2) is inferior to ``upper``."""
    triggered, skipped = [], []
    if lower.high < upper.low:
        triggered.append("a")
    if upper.low <= lower.low and lower.high <= upper.high:
        triggered.append("b")
    if lower.high < upper.mu:
        triggered.append("c")
    if lower.high < upper.high:
        triggered.append("d")

    rho = None
    if lower.sigma == 0:
        skipped.append("e")
    else:
        rho = abs(lower.high - upper.low) / (2 * lower.sigma)
        if rho < rho_threshold:
            triggered.append("e")
    return triggered, rho, skipped


def compare_intervals(
    i1: Interval,
    i2: Interval,
    rho_threshold: float = DEFAULT_RHO_THRESHOLD,
    higher_is_better: bool = True,
) -> ComparisonVerdict:
    """
    Decide which interval, if any, is inferior. Metrics where lower is better are
    compared on mirrored intervals.
    """
    if not (math.isfinite(rho_threshold) and rho_threshold > 0):
        raise ConfigValidationError(
            f"rho threshold must be > 0, got {rho_threshold}", option="rho"
        )
    if not higher_is_better:
        i1, i2 = i1.mirrored(), i2.mirrored()

    if i1.mu < i2.mu:
        relation: Relation = "first_inferior"
        triggered, rho, skipped = _inferior_conditions(i1, i2, rho_threshold)
    elif i2.mu < i1.mu:
        relation = "second_inferior"
        triggered, rho, skipped = _inferior_conditions(i2, i1, rho_threshold)
    else:
        return ComparisonVerdict("indeterminate", rho_threshold=rho_threshold)

    if not triggered:
        relation = "indeterminate"
    return ComparisonVerdict(
        relation,
        tuple(triggered),
        rho=rho,
        skipped=tuple(skipped),
        rho_threshold=rho_threshold,
    )
