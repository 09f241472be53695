"""
Evaluation metrics for ordinal label maps: argmax decoding, the share of pixels
with a unimodal predicted distribution (UP), the contact surface share of
ordinally invalid transitions (CS) and the Dice coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    ClassConfig,
    LabelLike,
    LabelMap,
    ProbLike,
    ProbMap,
    as_label_array,
    as_prob_array,
    check_probabilities,
    check_same_grid,
)
from .exceptions import ConfigValidationError, ValidationError

DEFAULT_EPSILON = 1e-8


@dataclass(frozen=True)
class MetricReport:
    dice_percent: float
    cs_percent: float
    up_percent: Optional[float]
    per_class_dice: tuple[float, ...]

    def __post_init__(self):
        for name in ("dice_percent", "cs_percent", "up_percent"):
            value = getattr(self, name)
            if value is not None and not 0 <= value <= 100:
                raise ValidationError(f"{name} must lie in [0, 100], got {value}")

    def format(self) -> str:
        """The report as ``dice=.. cs=.. [up=..]`` with one decimal."""
        text = f"dice={self.dice_percent:.1f} cs={self.cs_percent:.1f}"
        if self.up_percent is not None:
            text += f" up={self.up_percent:.1f}"
        return text


def decode_argmax(probs: Union[ProbMap, np.ndarray]) -> LabelMap:
    """
    Most probable class per pixel, ties going to the lowest class index.
    """
    values = probs.values if isinstance(probs, ProbMap) else as_prob_array(probs)[0]
    return LabelMap(values.argmax(axis=-1) + 1)


def _unimodal_mask(values: np.ndarray) -> np.ndarray:
    """
    True where the distribution along the last axis rises (weakly) to its first
    maximum and falls (weakly) after it.
    """
    peak = values.argmax(axis=-1)[..., np.newaxis]
    steps = np.diff(values, axis=-1)
    position = np.arange(steps.shape[-1])
    before_peak = position < peak
    valid = np.where(before_peak, steps >= 0, steps <= 0)
    return valid.all(axis=-1)


def is_unimodal(p) -> bool:
    values = np.asarray(p, dtype=np.float64)
    if values.ndim != 1:
        raise ValidationError(f"Expected a probability vector, got shape {values.shape}")
    check_probabilities(values)
    return bool(_unimodal_mask(values))


def up_metric(probs: ProbLike) -> float:
    """
    Fraction of pixels, over all images, whose predicted distribution is unimodal.
    """
    return float(_unimodal_mask(as_prob_array(probs)).mean())


def _check_epsilon(epsilon: float):
    if not epsilon > 0:
        raise ConfigValidationError(
            f"epsilon must be > 0, got {epsilon}", option="epsilon"
        )


def _contact_surface(labels: np.ndarray, epsilon: float) -> float:
    horizontal = np.abs(np.diff(labels, axis=1))
    vertical = np.abs(np.diff(labels, axis=0))
    return 0.5 * (
        np.count_nonzero(horizontal >= 2)
        / (np.count_nonzero(horizontal >= 1) + epsilon)
        + np.count_nonzero(vertical >= 2) / (np.count_nonzero(vertical >= 1) + epsilon)
    )


def cs_metric(labels: LabelLike, epsilon: float = DEFAULT_EPSILON) -> float:
    """
    Share of class transitions between 4-neighbours that skip at least one class,
    averaged over the horizontal and vertical directions. Several label maps are
    averaged.
    """
    _check_epsilon(epsilon)
    label_array = as_label_array(labels)
    return float(
        np.mean([_contact_surface(image, epsilon) for image in label_array])
    )


def _dice_per_class(
    pred: np.ndarray, gt: np.ndarray, k_classes: int
) -> tuple[np.ndarray, np.ndarray]:
    scores = np.ones(k_classes)
    present = np.zeros(k_classes, dtype=bool)
    for k in range(1, k_classes + 1):
        predicted, truth = pred == k, gt == k
        size = np.count_nonzero(predicted) + np.count_nonzero(truth)
        if size:
            present[k - 1] = True
            scores[k - 1] = 2 * np.count_nonzero(predicted & truth) / size
    return scores, present


def dice(
    pred: LabelLike, gt: LabelLike, config: ClassConfig
) -> tuple[float, tuple[float, ...]]:
    """
    Macro Dice over the classes present in either map, and the per-class Dice
    with classes absent from both scored 1. Several maps are averaged.
    """
    pred_array, gt_array = as_label_array(pred), as_label_array(gt)
    if pred_array.shape != gt_array.shape:
        raise ValidationError(
            f"Prediction shape {pred_array.shape} does not match ground truth "
            f"shape {gt_array.shape}"
        )
    for array in (pred_array, gt_array):
        LabelMap(array.reshape(-1, array.shape[-1])).validate(config)

    macro, per_class = [], []
    for image_pred, image_gt in zip(pred_array, gt_array):
        scores, present = _dice_per_class(image_pred, image_gt, config.k_classes)
        macro.append(scores[present].mean())
        per_class.append(scores)
    return float(np.mean(macro)), tuple(float(v) for v in np.mean(per_class, axis=0))


def evaluate(
    pred: Union[ProbLike, LabelLike],
    gt: LabelLike,
    k_classes: int,
    epsilon: float = DEFAULT_EPSILON,
) -> MetricReport:
    """
    Dice, CS and UP as percentages. ``pred`` may hold probabilities (NxHxWxK or a
    ProbMap) or decoded labels, in which case UP is absent. Several images are
    averaged.
    """
    config = ClassConfig(k_classes)
    gt_array = as_label_array(gt)
    up: Optional[float] = None
    if isinstance(pred, ProbMap) or (
        isinstance(pred, np.ndarray) and np.issubdtype(pred.dtype, np.floating)
    ):
        probs = as_prob_array(pred)
        check_same_grid(probs, gt_array)
        if probs.shape[-1] != k_classes:
            raise ValidationError(
                f"Predictions have {probs.shape[-1]} classes, expected {k_classes}"
            )
        pred_array = probs.argmax(axis=-1) + 1
        up = 100 * up_metric(probs)
    else:
        pred_array = as_label_array(pred)

    macro, per_class = dice(pred_array, gt_array, config)
    return MetricReport(
        dice_percent=100 * macro,
        cs_percent=100 * cs_metric(pred_array, epsilon),
        up_percent=up,
        per_class_dice=per_class,
    )


def evaluate_batch(
    probs: ProbLike,
    labels: LabelLike,
    k_classes: int,
    epsilon: float = DEFAULT_EPSILON,
) -> MetricReport:
    return evaluate(as_prob_array(probs), labels, k_classes, epsilon)
