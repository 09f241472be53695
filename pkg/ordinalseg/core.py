"""
The dense labeling data model: logits, probability maps, label maps, the ordinal
cost matrix and batches of scenes.

Class indices are 1-based in everything public. Arrays holding probabilities use
the last axis for classes, so ``values[..., k - 1]`` is the probability of class k.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import Union

import numpy as np

from .exceptions import ConfigValidationError, ValidationError

PROB_TOLERANCE = 1e-6
LOG_CLIP = 1e-12


def _frozen(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class ClassConfig:
    k_classes: int

    def __post_init__(self):
        if isinstance(self.k_classes, bool) or not isinstance(
            self.k_classes, (int, np.integer)
        ):
            raise ConfigValidationError(
                f"k_classes must be an integer, got {self.k_classes!r}",
                option="k_classes",
            )
        if self.k_classes < 2:
            raise ConfigValidationError(
                f"At least 2 ordered classes are required, got {self.k_classes}",
                option="k_classes",
            )
        object.__setattr__(self, "k_classes", int(self.k_classes))

    @property
    def classes(self) -> range:
        return range(1, self.k_classes + 1)


@dataclass(frozen=True)
class LogitMap:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3 or values.shape[-1] < 1:
            raise ValidationError(
                f"Logits must have shape HxWxK, got {values.shape}"
            )
        _require_finite(values, "logit")
        object.__setattr__(self, "values", _frozen(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def k_classes(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class ProbMap:
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 3:
            raise ValidationError(
                f"Probability maps must have shape HxWxK, got {values.shape}"
            )
        check_probabilities(values)
        object.__setattr__(self, "values", _frozen(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def k_classes(self) -> int:
        return self.values.shape[2]


@dataclass(frozen=True)
class LabelMap:
    values: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.values)
        if raw.ndim != 2:
            raise ValidationError(f"Label maps must have shape HxW, got {raw.shape}")
        if raw.size and not np.issubdtype(raw.dtype, np.integer):
            if not np.all(np.equal(np.mod(raw, 1), 0)):
                raise ValidationError("Label maps must hold integer class indices")
        values = raw.astype(np.int64)
        if values.size and values.min() < 1:
            location = tuple(int(i) for i in np.argwhere(values < 1)[0])
            raise ValidationError(
                f"Class labels start at 1, found {values[location]} at pixel "
                f"{location}",
                location=location,
            )
        object.__setattr__(self, "values", _frozen(values))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def validate(self, config: ClassConfig) -> LabelMap:
        if self.values.size and self.values.max() > config.k_classes:
            location = tuple(
                int(i) for i in np.argwhere(self.values > config.k_classes)[0]
            )
            raise ValidationError(
                f"Label {self.values[location]} at pixel {location} is outside "
                f"1..{config.k_classes}",
                location=location,
            )
        return self


@dataclass(frozen=True)
class CostMatrix:
    k_classes: int
    entries: np.ndarray

    def __getitem__(self, pair: tuple[int, int]) -> float:
        """Look up C[r, s] with 1-based class indices."""
        r, s = pair
        return float(self.entries[r - 1, s - 1])


@dataclass(frozen=True)
class Batch:
    images: tuple[np.ndarray, ...]
    labels: tuple[LabelMap, ...]
    k_classes: int

    def __post_init__(self):
        ClassConfig(self.k_classes)
        if not self.images or len(self.images) != len(self.labels):
            raise ValidationError(
                "A batch needs at least one image and exactly one label map per image"
            )
        images = tuple(_frozen(np.asarray(image, dtype=np.float64)) for image in self.images)
        shape = self.labels[0].values.shape
        for index, (image, labels) in enumerate(zip(images, self.labels)):
            if image.ndim != 3 or image.shape[:2] != shape:
                raise ValidationError(
                    f"Image {index} has shape {image.shape}, expected {shape}xB"
                )
            if labels.values.shape != shape:
                raise ValidationError(
                    f"Label map {index} has shape {labels.values.shape}, "
                    f"expected {shape}"
                )
            labels.validate(ClassConfig(self.k_classes))
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def count(self) -> int:
        return len(self.images)

    @property
    def height(self) -> int:
        return self.labels[0].height

    @property
    def width(self) -> int:
        return self.labels[0].width

    def subset(self, indices: Sequence[int]) -> Batch:
        return Batch(
            images=tuple(self.images[i] for i in indices),
            labels=tuple(self.labels[i] for i in indices),
            k_classes=self.k_classes,
        )

    def image_array(self) -> np.ndarray:
        """Stack images into an NxHxWxB array."""
        return np.stack(self.images)

    def label_array(self) -> np.ndarray:
        """Stack label maps into an NxHxW array."""
        return np.stack([labels.values for labels in self.labels])


ProbLike = Union[ProbMap, np.ndarray, Sequence[ProbMap]]
LabelLike = Union[LabelMap, np.ndarray, Sequence[LabelMap]]


def _require_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        location = tuple(int(i) for i in np.argwhere(~np.isfinite(values))[0])
        raise ValidationError(
            f"Non-finite {what} value {values[location]} at index {location}",
            location=location,
        )


def check_probabilities(values: np.ndarray):
    """
    Check the ProbMap invariants on an array whose last axis holds classes.
    """
    _require_finite(values, "probability")
    if values.size == 0:
        return
    if values.min() < 0 or values.max() > 1:
        bad = (values < 0) | (values > 1)
        location = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValidationError(
            f"Probability {values[location]} at index {location} is outside [0, 1]",
            location=location,
        )
    error = np.abs(values.sum(axis=-1) - 1.0)
    if error.max() > PROB_TOLERANCE:
        location = tuple(int(i) for i in np.unravel_index(error.argmax(), error.shape))
        raise ValidationError(
            f"Probabilities at pixel {location} sum to "
            f"{values[location].sum():.9g}, not 1",
            location=location,
        )


def as_prob_array(probs: ProbLike) -> np.ndarray:
    """
    Normalize a ProbMap, a sequence of them, or a raw HxWxK / NxHxWxK array into a
    validated float64 NxHxWxK array.
    """
    if isinstance(probs, ProbMap):
        return probs.values[np.newaxis]
    if isinstance(probs, np.ndarray):
        values = np.asarray(probs, dtype=np.float64)
        if values.ndim == 3:
            values = values[np.newaxis]
        if values.ndim != 4:
            raise ValidationError(
                f"Expected probabilities shaped HxWxK or NxHxWxK, got {values.shape}"
            )
        check_probabilities(values)
        return values
    return np.stack([as_prob_array(item)[0] for item in probs])


def as_label_array(labels: LabelLike) -> np.ndarray:
    """
    Normalize label maps into an int64 NxHxW array of 1-based class indices.
    """
    if isinstance(labels, LabelMap):
        return labels.values[np.newaxis]
    if isinstance(labels, np.ndarray):
        if labels.ndim == 2:
            return LabelMap(labels).values[np.newaxis]
        if labels.ndim == 3:
            return np.stack([LabelMap(item).values for item in labels])
        raise ValidationError(
            f"Expected labels shaped HxW or NxHxW, got {labels.shape}"
        )
    return np.stack([as_label_array(item)[0] for item in labels])


def check_same_grid(probs: np.ndarray, labels: np.ndarray):
    if probs.shape[:3] != labels.shape:
        raise ValidationError(
            f"Prediction grid {probs.shape[:3]} does not match label grid "
            f"{labels.shape}"
        )
    k_classes = probs.shape[-1]
    if labels.size and labels.max() > k_classes:
        location = tuple(int(i) for i in np.argwhere(labels > k_classes)[0])
        raise ValidationError(
            f"Label {labels[location]} at {location} is outside 1..{k_classes}",
            location=location,
        )


def softmax_array(logits: np.ndarray) -> np.ndarray:
    """
    Softmax over the last axis, stabilized by subtracting the per-pixel maximum.
    """
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exps = np.exp(shifted)
    return exps / exps.sum(axis=-1, keepdims=True)


def softmax(logits: LogitMap) -> ProbMap:
    if not isinstance(logits, LogitMap):
        logits = LogitMap(np.asarray(logits))
    return ProbMap(softmax_array(logits.values))


def cost_matrix(config: ClassConfig) -> CostMatrix:
    """
    The ordinal cost C[r, s] = max(0, |r - s| - 1): identical and adjacent classes
    cost nothing.
    """
    classes = np.arange(1, config.k_classes + 1)
    entries = np.maximum(0, np.abs(classes[:, None] - classes[None, :]) - 1)
    return CostMatrix(config.k_classes, _frozen(entries.astype(np.float64)))


def one_hot(labels: LabelMap, config: ClassConfig) -> ProbMap:
    if not isinstance(labels, LabelMap):
        labels = LabelMap(np.asarray(labels))
    labels.validate(config)
    return ProbMap(one_hot_array(labels.values, config.k_classes))


def one_hot_array(labels: np.ndarray, k_classes: int) -> np.ndarray:
    """One-hot encode 1-based labels of any shape along a new trailing axis."""
    return (labels[..., np.newaxis] == np.arange(1, k_classes + 1)).astype(np.float64)


def nonadjacent_pairs(config: ClassConfig) -> tuple[tuple[int, int], ...]:
    """
    All unordered class pairs (k1, k2), k1 < k2, that are not ordinal neighbours,
    in lexicographic order.
    """
    return tuple(
        (k1, k2)
        for k1 in config.classes
        for k2 in range(k1 + 2, config.k_classes + 1)
    )
