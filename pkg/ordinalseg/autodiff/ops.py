"""
Differentiable functions on Nodes beyond the arithmetic operators.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from .node import Node, Operand, as_node, constant, make_node


def exp(x: Operand) -> Node:
    x = as_node(x)
    out = np.exp(x.value)
    return make_node(out, "exp", (x, lambda g: g * out))


def log(x: Operand) -> Node:
    x = as_node(x)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(x.value)
    return make_node(out, "log", (x, lambda g: g / x.value))


def relu(x: Operand) -> Node:
    """
    max(x, 0), with derivative 0 at exactly 0.
    """
    x = as_node(x)
    active = x.value > 0
    return make_node(np.where(active, x.value, 0.0), "relu", (x, lambda g: g * active))


def absolute(x: Operand) -> Node:
    x = as_node(x)
    return make_node(np.abs(x.value), "abs", (x, lambda g: g * np.sign(x.value)))


def clip(x: Operand, low: float, high: float) -> Node:
    x = as_node(x)
    inside = (x.value >= low) & (x.value <= high)
    return make_node(
        np.clip(x.value, low, high), "clip", (x, lambda g: g * inside)
    )


def power(x: Operand, exponent: float) -> Node:
    return as_node(x) ** exponent


def softmax(logits: Operand, axis: int = -1) -> Node:
    logits = as_node(logits)
    shift = constant(logits.value.max(axis=axis, keepdims=True))
    exps = exp(logits - shift)
    return exps / exps.sum(axis=axis, keepdims=True)


def concat(nodes: Sequence[Operand], axis: int = -1) -> Node:
    nodes = [as_node(node) for node in nodes]
    sizes = [node.shape[axis] for node in nodes]
    bounds = np.cumsum([0, *sizes])

    def vjp_for(index: int):
        def vjp(g: np.ndarray) -> np.ndarray:
            slices = [slice(None)] * g.ndim
            slices[axis] = slice(bounds[index], bounds[index + 1])
            return g[tuple(slices)]

        return vjp

    return make_node(
        np.concatenate([node.value for node in nodes], axis=axis),
        "concat",
        *((node, vjp_for(index)) for index, node in enumerate(nodes)),
    )


def pad(x: Operand, width: Sequence[tuple[int, int]]) -> Node:
    """Zero padding, ``width`` holds one (before, after) pair per axis."""
    x = as_node(x)
    inner = tuple(
        slice(before, before + size) for (before, _), size in zip(width, x.shape)
    )
    return make_node(
        np.pad(x.value, width), "pad", (x, lambda g: g[inner])
    )


def repeat(x: Operand, factor: int, axis: int) -> Node:
    """Repeat every entry ``factor`` times along one axis."""
    x = as_node(x)
    axis = axis % x.ndim

    def vjp(g: np.ndarray) -> np.ndarray:
        shape = (*g.shape[:axis], x.shape[axis], factor, *g.shape[axis + 1 :])
        return g.reshape(shape).sum(axis=axis + 1)

    return make_node(np.repeat(x.value, factor, axis=axis), "repeat", (x, vjp))
