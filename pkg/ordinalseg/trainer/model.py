"""
A small convolutional encoder-decoder over the autodiff engine: two pooling
stages, two upsampling stages with skip connections and a 1x1 projection to
class logits.
"""

from __future__ import annotations

from collections.abc import Mapping
from typing import Optional

import numpy as np

from ..autodiff import Node, concat, constant, pad, relu, repeat, softmax
from ..exceptions import ValidationError

Params = dict[str, np.ndarray]

# 3x3 kernel offsets in row-major order
_OFFSETS = tuple((dy, dx) for dy in range(3) for dx in range(3))


def conv3x3(x: Node, weight: Node, bias: Node) -> Node:
    """
    Same-padded 3x3 convolution of an NxHxWxC node with a (9 * C)xC' weight
    matrix, as a matrix product over the nine shifted copies of the input.
    """
    _, height, width, _ = x.shape
    padded = pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    patches = concat(
        [padded[:, dy : dy + height, dx : dx + width, :] for dy, dx in _OFFSETS],
        axis=-1,
    )
    return patches @ weight + bias


def avg_pool(x: Node) -> Node:
    count, height, width, channels = x.shape
    return x.reshape(count, height // 2, 2, width // 2, 2, channels).mean(axis=(2, 4))


def upsample(x: Node) -> Node:
    return repeat(repeat(x, 2, axis=1), 2, axis=2)


class SegModel:
    """
    Encoder-decoder segmenter with channel widths ``widths`` at the full, half and
    quarter resolutions. Inputs are NxHxWxB with H and W divisible by 4.
    """

    def __init__(
        self,
        k_classes: int,
        in_channels: int = 1,
        widths: tuple[int, int, int] = (8, 16, 32),
        seed: int = 0,
    ):
        self.k_classes = k_classes
        self.in_channels = in_channels
        self.widths = widths
        w1, w2, w3 = widths
        # fan-in and fan-out of every layer, 3x3 convolutions see nine shifted copies
        self.layout: dict[str, tuple[int, int]] = {
            "enc1a": (9 * in_channels, w1),
            "enc1b": (9 * w1, w1),
            "enc2": (9 * w1, w2),
            "bottom": (9 * w2, w3),
            "dec2": (9 * (w3 + w2), w2),
            "dec1": (9 * (w2 + w1), w1),
            "head": (w1, k_classes),
        }
        self.params = self.initial_params(seed)

    def initial_params(self, seed: int) -> Params:
        """He-normal weights and zero biases drawn from a PCG64 stream."""
        rng = np.random.Generator(np.random.PCG64(seed))
        params: Params = {}
        for name, (fan_in, fan_out) in self.layout.items():
            params[f"{name}.w"] = rng.standard_normal((fan_in, fan_out)) * np.sqrt(
                2.0 / fan_in
            )
            params[f"{name}.b"] = np.zeros(fan_out)
        return params

    @property
    def parameter_count(self) -> int:
        return sum(value.size for value in self.params.values())

    def state(self) -> Params:
        return {name: value.copy() for name, value in self.params.items()}

    def load_state(self, state: Mapping[str, np.ndarray]):
        if set(state) != set(self.params):
            raise ValidationError("Parameter names do not match the model layout")
        self.params = {name: np.array(value) for name, value in state.items()}

    def _check_input(self, images: np.ndarray):
        if images.ndim != 4 or images.shape[-1] != self.in_channels:
            raise ValidationError(
                f"Expected NxHxWx{self.in_channels} images, got shape {images.shape}"
            )
        if images.shape[1] % 4 or images.shape[2] % 4:
            raise ValidationError(
                f"Image size {images.shape[1]}x{images.shape[2]} is not divisible by 4"
            )

    def forward(
        self, images: np.ndarray, params: Optional[Mapping[str, Node]] = None
    ) -> Node:
        """
        NxHxWxK logits. Without ``params`` the current parameters enter as
        constants.
        """
        images = np.asarray(images, dtype=np.float64)
        self._check_input(images)
        if params is None:
            params = {name: constant(value) for name, value in self.params.items()}

        def block(name: str, x: Node) -> Node:
            return relu(conv3x3(x, params[f"{name}.w"], params[f"{name}.b"]))

        x = constant(images)
        skip1 = block("enc1b", block("enc1a", x))
        skip2 = block("enc2", avg_pool(skip1))
        bottom = block("bottom", avg_pool(skip2))
        up2 = block("dec2", concat([upsample(bottom), skip2], axis=-1))
        up1 = block("dec1", concat([upsample(up2), skip1], axis=-1))
        return up1 @ params["head.w"] + params["head.b"]

    def predict(self, images: np.ndarray) -> np.ndarray:
        return softmax(self.forward(images)).value
