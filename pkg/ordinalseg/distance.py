"""
Exact Euclidean distance transforms on the pixel grid, their saturated variants
and signed distance fields of class regions.

Distances are measured between integer pixel coordinates with unit pitch. The
transform is separable: a linear scan down each column gives the squared distance
to the nearest region pixel in that column, then the lower envelope of parabolas
along each row combines the columns exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import ProbMap
from .exceptions import (
    ConfigValidationError,
    EmptyRegionError,
    UnboundedFieldError,
    ValidationError,
)


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class BinaryMask:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.ndim != 2:
            raise ValidationError(f"Masks must have shape HxW, got {values.shape}")
        object.__setattr__(self, "values", _readonly(values.astype(bool)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def is_empty(self) -> bool:
        return not self.values.any()

    def complement(self) -> BinaryMask:
        return BinaryMask(~self.values)


@dataclass(frozen=True)
class DistField:
    values: np.ndarray
    cap: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(
            self, "values", _readonly(np.asarray(self.values, dtype=np.float64))
        )


@dataclass(frozen=True)
class SignedDistField:
    """
    Positive inside the region, negative outside. A region covering the whole grid
    gives +inf everywhere and an empty region gives -inf, until clamped.
    """

    values: np.ndarray
    clamp: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(
            self, "values", _readonly(np.asarray(self.values, dtype=np.float64))
        )

    @property
    def is_bounded(self) -> bool:
        return bool(np.isfinite(self.values).all())

    def finite_values(self) -> np.ndarray:
        if not self.is_bounded:
            raise UnboundedFieldError(
                "Signed distance field of a degenerate region is unbounded, clamp it "
                "with clamp_sdf before use"
            )
        return self.values


def _check_positive(name: str, value: float):
    if not (isinstance(value, (int, float, np.floating)) and np.isfinite(value)):
        raise ConfigValidationError(f"{name} must be a finite number", option=name)
    if value <= 0:
        raise ConfigValidationError(f"{name} must be > 0, got {value}", option=name)


def _column_sq_distances(mask: np.ndarray, far: float) -> np.ndarray:
    """Squared distance to the nearest true pixel in the same column."""
    height = mask.shape[0]
    dist = np.full(mask.shape, np.inf)
    running = np.full(mask.shape[1], np.inf)
    for row in range(height):
        running = np.where(mask[row], 0.0, running + 1)
        dist[row] = running
    running = np.full(mask.shape[1], np.inf)
    for row in reversed(range(height)):
        running = np.where(mask[row], 0.0, np.minimum(running + 1, dist[row]))
        dist[row] = running
    return np.where(np.isfinite(dist), dist * dist, far)


def _lower_envelope(f: np.ndarray) -> np.ndarray:
    """
    min over q of (p - q)^2 + f[q] for every p, as the lower envelope of the
    parabolas rooted at each q.
    """
    n = f.shape[0]
    out = np.empty(n)
    vertices = np.zeros(n, dtype=np.int64)
    bounds = np.empty(n + 1)
    k = 0
    bounds[0] = -np.inf
    bounds[1] = np.inf
    for q in range(1, n):
        # f is finite so the intersection never falls below bounds[0] = -inf
        while (
            s := ((f[q] + q * q) - (f[vertices[k]] + vertices[k] ** 2))
            / (2 * q - 2 * vertices[k])
        ) <= bounds[k]:
            k -= 1
        k += 1
        vertices[k] = q
        bounds[k] = s
        bounds[k + 1] = np.inf

    k = 0
    for p in range(n):
        while bounds[k + 1] < p:
            k += 1
        v = vertices[k]
        out[p] = (p - v) * (p - v) + f[v]
    return out


def euclidean_dt(mask: BinaryMask) -> DistField:
    """
    Exact Euclidean distance from every pixel to the nearest true pixel of the mask.

    :raises EmptyRegionError: if the mask has no true pixel
    """
    if not isinstance(mask, BinaryMask):
        mask = BinaryMask(mask)
    if mask.is_empty:
        raise EmptyRegionError("Distance transform of an empty region is undefined")

    height, width = mask.values.shape
    far = float(height * height + width * width)
    squared = _column_sq_distances(mask.values, far)
    for row in range(height):
        squared[row] = _lower_envelope(squared[row])
    return DistField(np.sqrt(squared))


def threshold_mask(
    probs: Union[ProbMap, np.ndarray], k: int, delta_conf: float
) -> BinaryMask:
    """
    Pixels whose probability for class k (1-based) is at least delta_conf.
    """
    if not 0 < delta_conf < 1:
        raise ConfigValidationError(
            f"delta_conf must lie in (0, 1), got {delta_conf}", option="delta_conf"
        )
    values = probs.values if isinstance(probs, ProbMap) else np.asarray(probs)
    if not 1 <= k <= values.shape[-1]:
        raise ValidationError(f"Class {k} is outside 1..{values.shape[-1]}")
    return BinaryMask(values[..., k - 1] >= delta_conf)


def clamp_dt(field: DistField, gamma: float) -> DistField:
    _check_positive("gamma", gamma)
    cap = gamma if field.cap is None else min(field.cap, gamma)
    return DistField(np.minimum(field.values, gamma), cap=cap)


def saturated_dt(mask: BinaryMask, gamma: float) -> DistField:
    """
    The distance transform capped at gamma. An empty mask yields the constant
    field gamma.
    """
    _check_positive("gamma", gamma)
    if not isinstance(mask, BinaryMask):
        mask = BinaryMask(mask)
    if mask.is_empty:
        return DistField(np.full(mask.values.shape, float(gamma)), cap=gamma)
    return clamp_dt(euclidean_dt(mask), gamma)


def signed_df(region: BinaryMask) -> SignedDistField:
    """
    Inside the region the value is the distance to the nearest pixel outside it,
    outside the value is minus the distance to the nearest region pixel. Interior
    pixels are therefore at least +1 and there is no zero level set on the grid.
    """
    if not isinstance(region, BinaryMask):
        region = BinaryMask(region)
    if region.is_empty:
        return SignedDistField(np.full(region.values.shape, -np.inf))
    if region.values.all():
        return SignedDistField(np.full(region.values.shape, np.inf))

    inside = euclidean_dt(region.complement()).values
    outside = euclidean_dt(region).values
    return SignedDistField(np.where(region.values, inside, -outside))


def clamp_sdf(field: SignedDistField, gamma_hat: float) -> SignedDistField:
    _check_positive("gamma_hat", gamma_hat)
    cap = gamma_hat if field.clamp is None else min(field.clamp, gamma_hat)
    values = np.sign(field.values) * np.minimum(np.abs(field.values), gamma_hat)
    return SignedDistField(values, clamp=cap)
