"""
Losses over the pixel grid that discourage ordinally distant classes from
touching: the neighbour-pair bilinear penalty (CSNP), the distance transform
reward (CSDT) and the signed distance field discrepancy (CSSDF).

Distance transforms and signed distance fields are not differentiable. They are
computed from the reference probabilities passed to ``build`` and enter the graph
as constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autodiff import Node, constant
from ..core import CostMatrix, LabelLike, ProbLike, as_prob_array
from ..distance import (
    BinaryMask,
    SignedDistField,
    clamp_sdf,
    saturated_dt,
    signed_df,
    threshold_mask,
)
from ..exceptions import ConfigValidationError
from ..options import Bound
from .base import LossValue, OrdinalLoss, SpatialLossConfig


@dataclass(frozen=True)
class NeighborSystem:
    """
    The 4-connected pixel pairs of an HxW grid, horizontal pairs first, each
    unordered pair once.
    """

    height: int
    width: int

    @property
    def size(self) -> int:
        return self.height * (self.width - 1) + (self.height - 1) * self.width

    def pairs(self) -> list[tuple[tuple[int, int], tuple[int, int]]]:
        horizontal = [
            ((i, j), (i, j + 1))
            for i in range(self.height)
            for j in range(self.width - 1)
        ]
        vertical = [
            ((i, j), (i + 1, j))
            for i in range(self.height - 1)
            for j in range(self.width)
        ]
        return horizontal + vertical


def _active_classes(cost: CostMatrix) -> np.ndarray:
    """1-based classes that take part in at least one non-adjacent pair."""
    return np.flatnonzero(cost.entries.any(axis=1)) + 1


def alpha_weight(sdf: SignedDistField, gamma_decay: float) -> np.ndarray:
    """
    Boundary emphasis exp(-gamma_decay * |sdf|), 1 on the boundary and decaying
    away from it.
    """
    if not gamma_decay > 0:
        raise ConfigValidationError(
            f"gamma_decay must be > 0, got {gamma_decay}", option="gamma_decay"
        )
    return np.exp(-gamma_decay * np.abs(sdf.finite_values()))


class NeighborPairLoss(OrdinalLoss):
    __key__ = "csnp"
    LossOptions = SpatialLossConfig
    has_pixel_map = False

    def build(
        self,
        probs: Node,
        labels: np.ndarray,
        reference: Optional[np.ndarray] = None,
    ) -> Node:
        _, height, width, k_classes = probs.shape
        neighbors = NeighborSystem(height, width)
        if neighbors.size == 0:
            return constant(0.0)
        cost = constant(self.cost_for(k_classes).entries)

        horizontal = ((probs[:, :, :-1, :] @ cost) * probs[:, :, 1:, :]).sum()
        vertical = ((probs[:, :-1, :, :] @ cost) * probs[:, 1:, :, :]).sum()
        return (horizontal + vertical) / float(probs.shape[0] * neighbors.size)


class DistanceTransformLoss(OrdinalLoss):
    """
    Minus the probability of each class weighted by the saturated distance to
    confident regions of every ordinally distant class. Minimising it pushes such
    classes apart, so the value is never positive.
    """

    __key__ = "csdt"
    LossOptions = SpatialLossConfig
    protocol_bounds = {"delta_conf": Bound(0.05, 0.05)}

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        cost = self.cost_for(probs.shape[-1])
        fields = np.zeros(probs.shape)
        for n in range(probs.shape[0]):
            for k in _active_classes(cost):
                mask = threshold_mask(reference[n], k, self.options.delta_conf)
                fields[n, ..., k - 1] = saturated_dt(
                    mask, self.options.gamma_clamp
                ).values
        # C is symmetric with zeros on ordinally adjacent pairs, so summing
        # p_k * C[k, l] * DT_l over all k, l visits each non-adjacent pair both ways
        weights = constant(fields @ cost.entries)
        return -(probs * weights).sum(axis=-1)


class SignedDistanceLoss(OrdinalLoss):
    """
    Discrepancy between clamped signed distance fields of ground-truth class
    regions and of thresholded predictions, weighted towards predicted boundaries.

    The predicted regions are a hard threshold, so the gradient uses a
    straight-through weight: the boundary weight of class k is scaled by
    ``1 + p_k - reference_k``, which equals it exactly at the reference point.
    """

    __key__ = "cssdf"
    LossOptions = SpatialLossConfig
    protocol_bounds = {
        "gamma_decay": Bound(0.05, 1.0),
        "delta_conf": Bound(0.05, 0.05),
    }

    def geometry(
        self, reference: np.ndarray, labels: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray]:
        """
        Boundary weights and SDF discrepancies, both NxHxWxK, for classes in some
        non-adjacent pair. Other classes get zeros.
        """
        count, height, width, k_classes = reference.shape
        cost = self.cost_for(k_classes)
        gamma_hat = self.options.resolve_gamma_hat(height, width)
        exponent = self.options.p_exponent

        alphas = np.zeros(reference.shape)
        errors = np.zeros(reference.shape)
        for n in range(count):
            for k in _active_classes(cost):
                predicted = clamp_sdf(
                    signed_df(
                        threshold_mask(reference[n], k, self.options.delta_conf)
                    ),
                    gamma_hat,
                )
                truth = clamp_sdf(signed_df(BinaryMask(labels[n] == k)), gamma_hat)
                alphas[n, ..., k - 1] = alpha_weight(
                    predicted, self.options.gamma_decay
                )
                errors[n, ..., k - 1] = (
                    np.abs(truth.values - predicted.values) ** exponent
                )
        return alphas, errors @ cost.entries

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        alphas, weighted_errors = self.geometry(reference, labels)
        straight_through = constant(alphas) * (1.0 + probs - constant(reference))
        return (straight_through * constant(weighted_errors)).sum(axis=-1)


def csnp_loss(probs: ProbLike, cost: Optional[CostMatrix] = None) -> LossValue:
    """
    Mean over neighbouring pixel pairs (a, b) of p(a)^T C p(b), averaged over
    images. Labels play no part.
    """
    values = as_prob_array(probs)
    loss = NeighborPairLoss(cost=cost)
    loss.cost_for(values.shape[-1])
    labels = np.ones(values.shape[:3], dtype=np.int64)
    return LossValue(loss.build(constant(values), labels).item())


def csdt_loss(
    probs: ProbLike,
    cost: Optional[CostMatrix] = None,
    config: Optional[SpatialLossConfig] = None,
) -> LossValue:
    values = as_prob_array(probs)
    labels = np.ones(values.shape[:3], dtype=np.int64)
    return DistanceTransformLoss(config, cost=cost)(probs, labels)


def cssdf_loss(
    probs: ProbLike,
    gt_labels: LabelLike,
    cost: Optional[CostMatrix] = None,
    config: Optional[SpatialLossConfig] = None,
) -> LossValue:
    return SignedDistanceLoss(config, cost=cost)(probs, gt_labels)

