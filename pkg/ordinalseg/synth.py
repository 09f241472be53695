"""
Synthetic ordinal scenes: nested layers of classes whose ground truth never has
neighbouring pixels more than one class apart, with a noisy single-band image.

Randomness comes from numpy's PCG64 bit generator seeded with the scene seed, so
scenes are reproducible across platforms and numpy versions that keep PCG64
stable. Layer parameters are drawn first, then the image noise.

Every geometry assigns a level d(x) that changes by at most 1 between
4-neighbours and cuts it at K - 1 distinct integer thresholds; a step of at most 1
can cross at most one integer, so adjacent labels differ by at most 1.
"""

from __future__ import annotations

from typing import Literal

import numpy as np

from .core import Batch, LabelMap
from .exceptions import ConfigValidationError, GeometryError
from .options import Bound, OrdOptions

Geometry = Literal["concentric_rings", "horizontal_bands", "blob_layers"]


class SceneSpec(OrdOptions):
    height: int = 32
    width: int = 32
    k_classes: int = 4
    geometry: Geometry = "concentric_rings"
    noise_sigma: float = 0.0
    seed: int = 0

    bounds = {
        "height": Bound(low=1),
        "width": Bound(low=1),
        "k_classes": Bound(low=2),
        "noise_sigma": Bound(low=0.0),
        "seed": Bound(low=0, high=2**64 - 1),
    }

    def validate(self):
        if self.k_classes < 2:
            raise ConfigValidationError(
                "Scenes need at least 2 classes", option="k_classes"
            )


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _thresholds(rng: np.random.Generator, k_classes: int, top: int) -> np.ndarray:
    """K - 1 distinct sorted integers drawn from 1..top."""
    return np.sort(rng.choice(np.arange(1, top + 1), size=k_classes - 1, replace=False))


def _bands(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.height < spec.k_classes:
        raise GeometryError(
            f"horizontal_bands needs at least {spec.k_classes} rows for "
            f"{spec.k_classes} classes, got {spec.height}"
        )
    cuts = _thresholds(rng, spec.k_classes, spec.height - 1)
    rows = np.arange(spec.height)
    labels = 1 + np.searchsorted(cuts, rows, side="right")
    return np.repeat(labels[:, np.newaxis], spec.width, axis=1)


def _layers_around(
    spec: SceneSpec,
    rng: np.random.Generator,
    center: tuple[float, float],
    scale: tuple[float, float],
) -> np.ndarray:
    """
    Class K at the centre, decreasing outwards, cut on the elliptical distance
    with the given axis scales (each at least 1).
    """
    cy, cx = center
    sy, sx = scale
    reach = min(
        cy / sy,
        (spec.height - 1 - cy) / sy,
        cx / sx,
        (spec.width - 1 - cx) / sx,
    )
    if int(np.floor(reach)) < spec.k_classes - 1:
        raise GeometryError(
            f"{spec.geometry} needs a radius of at least {spec.k_classes - 1} pixels "
            f"for {spec.k_classes} classes, a {spec.height}x{spec.width} grid allows "
            f"{max(int(np.floor(reach)), 0)}"
        )
    thresholds = _thresholds(rng, spec.k_classes, int(np.floor(reach)))
    rows, cols = np.indices((spec.height, spec.width))
    level = np.hypot((rows - cy) / sy, (cols - cx) / sx)
    return 1 + (level[..., np.newaxis] < thresholds).sum(axis=-1)


def _rings(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    center = ((spec.height - 1) / 2, (spec.width - 1) / 2)
    return _layers_around(spec, rng, center, (1.0, 1.0))


def _blobs(spec: SceneSpec, rng: np.random.Generator) -> np.ndarray:
    scale = (float(rng.uniform(1.0, 1.5)), float(rng.uniform(1.0, 1.5)))
    center = (
        (spec.height - 1) / 2 + float(rng.uniform(-1.0, 1.0)),
        (spec.width - 1) / 2 + float(rng.uniform(-1.0, 1.0)),
    )
    return _layers_around(spec, rng, center, scale)


_GEOMETRIES = {
    "horizontal_bands": _bands,
    "concentric_rings": _rings,
    "blob_layers": _blobs,
}


def generate(spec: SceneSpec) -> tuple[np.ndarray, LabelMap]:
    """
    One scene: an HxWx1 image whose intensity is (k - 1)/(K - 1) for class k plus
    Gaussian noise, and its label map.
    """
    rng = _generator(spec.seed)
    labels = _GEOMETRIES[spec.geometry](spec, rng)
    image = (labels - 1) / (spec.k_classes - 1)
    if spec.noise_sigma > 0:
        image = image + spec.noise_sigma * rng.standard_normal(labels.shape)
    return image[..., np.newaxis].astype(np.float64), LabelMap(labels)


def make_dataset(spec: SceneSpec, count: int) -> Batch:
    """
    ``count`` scenes generated with seeds seed, seed + 1, ... in that order.
    """
    if count < 1:
        raise ConfigValidationError(
            f"A dataset needs at least one scene, got {count}", option="count"
        )
    scenes = [generate(spec.replace(seed=spec.seed + index)) for index in range(count)]
    return Batch(
        images=tuple(image for image, _ in scenes),
        labels=tuple(labels for _, labels in scenes),
        k_classes=spec.k_classes,
    )
