"""
Per-pixel losses: categorical cross-entropy, the quasi-unimodal hinge loss (QUL),
the expectation/variance loss (EXP_MSE) and the ordinal monotonicity loss (O2).

Every loss is averaged over all pixels of all images in the batch.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..autodiff import Node, clip, constant, log, relu
from ..core import (
    LOG_CLIP,
    ClassConfig,
    LabelLike,
    ProbLike,
    check_probabilities,
    one_hot_array,
)
from ..exceptions import ValidationError
from ..options import Bound
from .base import LossConfig, LossValue, OrdinalLoss

_LAMBDA_GRID = Bound(0.1, 1e4)


def _class_masks(labels: np.ndarray, k_classes: int, offset: int) -> np.ndarray:
    """One-hot encoding of ``label + offset``, all zeros where that is not a class."""
    return one_hot_array(labels + offset, k_classes)


class CrossEntropyLoss(OrdinalLoss):
    __key__ = "ce"

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        target = constant(one_hot_array(labels, probs.shape[-1]))
        return -log(clip((probs * target).sum(axis=-1), LOG_CLIP, 1.0))


class QuasiUnimodalLoss(OrdinalLoss):
    """
    Hinges that make both neighbours of the true class k* smaller than it, plus
    lambda-weighted hinges that make each neighbour dominate every class further
    out on its side.
    """

    __key__ = "qul"
    protocol_bounds = {"qul_delta": Bound(0.05, 0.7), "qul_lambda": _LAMBDA_GRID}

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        k_classes = probs.shape[-1]
        delta = self.options.qul_delta
        classes = np.arange(1, k_classes + 1)

        left_mask = _class_masks(labels, k_classes, -1)
        right_mask = _class_masks(labels, k_classes, 1)
        p_true = (probs * constant(one_hot_array(labels, k_classes))).sum(axis=-1)
        p_left = (probs * constant(left_mask)).sum(axis=-1, keepdims=True)
        p_right = (probs * constant(right_mask)).sum(axis=-1, keepdims=True)

        has_left = constant((labels > 1).astype(np.float64))
        has_right = constant((labels < k_classes).astype(np.float64))
        neighbours = relu(delta + p_left.sum(axis=-1) - p_true) * has_left + relu(
            delta + p_right.sum(axis=-1) - p_true
        ) * has_right

        # classes strictly beyond the left neighbour, resp. the right neighbour
        ascending = constant((classes <= labels[..., np.newaxis] - 2).astype(np.float64))
        descending = constant(
            (classes >= labels[..., np.newaxis] + 2).astype(np.float64)
        )
        outer = (relu(delta + probs - p_left) * ascending).sum(axis=-1) + (
            relu(delta + probs - p_right) * descending
        ).sum(axis=-1)
        return neighbours + self.options.qul_lambda * outer


class ExpectationLoss(OrdinalLoss):
    """
    Squared error of the expected class index plus lambda times its variance.
    """

    __key__ = "expmse"
    protocol_bounds = {"expmse_lambda": _LAMBDA_GRID}

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        classes = constant(np.arange(1, probs.shape[-1] + 1, dtype=np.float64))
        expectation = (probs * classes).sum(axis=-1, keepdims=True)
        variance = (probs * (classes - expectation) ** 2).sum(axis=-1)
        error = expectation.sum(axis=-1) - constant(labels.astype(np.float64))
        return error**2 + self.options.expmse_lambda * variance


class MonotonicityLoss(OrdinalLoss):
    """
    Hinges penalising any decrease of consecutive class probabilities up to the
    true class, and any increase after it.
    """

    __key__ = "o2"

    def pixel_loss(self, probs: Node, labels: np.ndarray, reference) -> Node:
        k_classes = probs.shape[-1]
        delta = self.options.o2_delta
        # pair m joins classes m and m + 1
        pairs = np.arange(1, k_classes)
        rising = constant((pairs + 1 <= labels[..., np.newaxis]).astype(np.float64))
        falling = constant((pairs >= labels[..., np.newaxis]).astype(np.float64))

        lower, upper = probs[..., :-1], probs[..., 1:]
        return (relu(delta + lower - upper) * rising).sum(axis=-1) + (
            relu(delta + upper - lower) * falling
        ).sum(axis=-1)


def ce_loss(probs: ProbLike, labels: LabelLike) -> LossValue:
    return CrossEntropyLoss()(probs, labels)


def qul_sets(
    k_star: int, config: ClassConfig
) -> tuple[tuple[tuple[int, int], ...], tuple[tuple[int, int], ...]]:
    """
    The (dominated, dominator) class pairs of QUL for true class k_star: on the
    ascending side the left neighbour dominates every class further left, on the
    descending side the right neighbour dominates every class further right.
    """
    if not 1 <= k_star <= config.k_classes:
        raise ValidationError(
            f"Class {k_star} is outside 1..{config.k_classes}", location=(k_star,)
        )
    ascending = tuple((k, k_star - 1) for k in range(1, k_star - 1))
    descending = tuple(
        (k, k_star + 1) for k in range(k_star + 2, config.k_classes + 1)
    )
    return ascending, descending


def qul_loss(
    probs: ProbLike, labels: LabelLike, config: Optional[LossConfig] = None
) -> LossValue:
    return QuasiUnimodalLoss(config)(probs, labels)


def _as_distribution(p) -> np.ndarray:
    values = np.asarray(p, dtype=np.float64)
    check_probabilities(values)
    return values


def ordinal_expectation(p) -> float:
    """Expected class index sum(k * p_k) of a distribution over classes 1..K."""
    values = _as_distribution(p)
    return float(values @ np.arange(1, values.shape[-1] + 1))


def ordinal_variance(p) -> float:
    values = _as_distribution(p)
    classes = np.arange(1, values.shape[-1] + 1)
    mean = values @ classes
    return float(values @ (classes - mean) ** 2)


def expmse_loss(
    probs: ProbLike, labels: LabelLike, config: Optional[LossConfig] = None
) -> LossValue:
    return ExpectationLoss(config)(probs, labels)


def o2_loss(
    probs: ProbLike, labels: LabelLike, config: Optional[LossConfig] = None
) -> LossValue:
    return MonotonicityLoss(config)(probs, labels)
