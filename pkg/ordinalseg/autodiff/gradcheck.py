from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..exceptions import AutodiffUsageError, GradientCheckFailure, OracleError
from .node import Node, backward, constant

ABS_FALLBACK = 1e-8


@dataclass(frozen=True)
class GradCheckReport:
    max_abs_error: float
    max_rel_error: float
    step: float
    worst_index: tuple[int, ...]
    tol_rel: float
    coordinates: int

    @property
    def passed(self) -> bool:
        return self.max_rel_error <= self.tol_rel

    def raise_for_failure(self):
        if not self.passed:
            raise GradientCheckFailure(
                f"Gradient check failed: relative error {self.max_rel_error:.3e} "
                f"exceeds {self.tol_rel:.1e} at coordinate {self.worst_index}"
            )

    def describe(self) -> str:
        return (
            f"max_abs_error={self.max_abs_error:.3e} "
            f"max_rel_error={self.max_rel_error:.3e} "
            f"h={self.step:g} worst={','.join(map(str, self.worst_index))} "
            f"{'pass' if self.passed else 'fail'}"
        )


def finite_diff_check(
    loss_fn: Callable[[Node], Node],
    point: np.ndarray,
    h: float = 1e-5,
    tol_rel: float = 1e-4,
) -> GradCheckReport:
    """
    Compare the gradient from backward() against central differences, one
    coordinate at a time.

    A coordinate whose absolute error is at most 1e-8 counts as exact, so points
    where the gradient vanishes do not produce meaningless relative errors.
    """
    if not h > 0:
        raise AutodiffUsageError(f"Finite difference step must be positive, got {h}")
    point = np.array(point, dtype=np.float64)

    def evaluate(x: np.ndarray) -> float:
        return float(loss_fn(constant(x)).value)

    first, second = evaluate(point), evaluate(point)
    if first != second:
        raise OracleError(
            f"Loss function is not deterministic: {first!r} then {second!r} at the "
            "same point"
        )

    variable = Node(point.copy())
    loss = loss_fn(variable)
    backward(loss)
    analytic = (
        variable.grad if variable.grad is not None else np.zeros_like(point)
    )

    abs_errors = np.zeros_like(point)
    rel_errors = np.zeros_like(point)
    for index in np.ndindex(point.shape):
        shifted = point.copy()
        shifted[index] += h
        upper = evaluate(shifted)
        shifted[index] -= 2 * h
        lower = evaluate(shifted)
        numeric = (upper - lower) / (2 * h)

        error = abs(numeric - analytic[index])
        abs_errors[index] = error
        if error > ABS_FALLBACK:
            rel_errors[index] = error / max(abs(numeric), abs(analytic[index]))

    if rel_errors.max(initial=0.0) > 0:
        worst = np.unravel_index(rel_errors.argmax(), point.shape)
    else:
        worst = np.unravel_index(abs_errors.argmax(), point.shape)

    return GradCheckReport(
        max_abs_error=float(abs_errors.max(initial=0.0)),
        max_rel_error=float(rel_errors.max(initial=0.0)),
        step=h,
        worst_index=tuple(int(i) for i in worst),
        tol_rel=tol_rel,
        coordinates=point.size,
    )
