from __future__ import annotations

from collections.abc import Iterator
from typing import Any, Callable, Optional, Union

import numpy as np

from ..exceptions import AutodiffUsageError, GraphCycleError, NumericError

VectorJacobian = Callable[[np.ndarray], np.ndarray]
Operand = Union["Node", np.ndarray, float, int]


class Node:
    """
    A value in an eagerly built computation graph.

    Each node keeps its upstream nodes paired with a closure that maps the gradient
    of this node onto the contribution for that parent (a vector-Jacobian product).
    Nodes that do not require a gradient are never recorded as parents.
    """

    __slots__ = ("_consumed", "grad", "op", "parents", "requires_grad", "value")
    __array_ufunc__ = None

    value: np.ndarray
    grad: Optional[np.ndarray]
    parents: tuple[tuple[Node, VectorJacobian], ...]
    op: str
    requires_grad: bool

    def __init__(
        self,
        value: Any,
        parents: tuple[tuple[Node, VectorJacobian], ...] = (),
        op: str = "leaf",
        requires_grad: bool = True,
    ):
        self.value = np.asarray(value, dtype=np.float64)
        self.grad = None
        self.parents = parents
        self.op = op
        self.requires_grad = requires_grad
        self._consumed = False

    def __repr__(self):
        return f"Node(op={self.op!r}, shape={self.shape})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def size(self) -> int:
        return self.value.size

    def item(self) -> float:
        return float(self.value)

    def detach(self) -> Node:
        return constant(self.value)

    def backward(self):
        backward(self)

    def zero_grad(self):
        zero_grad(self)

    def __add__(self, other: Operand) -> Node:
        other = as_node(other)
        return make_node(
            self.value + other.value,
            "add",
            (self, lambda g: unbroadcast(g, self.shape)),
            (other, lambda g: unbroadcast(g, other.shape)),
        )

    def __radd__(self, other: Operand) -> Node:
        return as_node(other) + self

    def __sub__(self, other: Operand) -> Node:
        other = as_node(other)
        return make_node(
            self.value - other.value,
            "sub",
            (self, lambda g: unbroadcast(g, self.shape)),
            (other, lambda g: unbroadcast(-g, other.shape)),
        )

    def __rsub__(self, other: Operand) -> Node:
        return as_node(other) - self

    def __neg__(self) -> Node:
        return make_node(-self.value, "neg", (self, lambda g: -g))

    def __mul__(self, other: Operand) -> Node:
        other = as_node(other)
        return make_node(
            self.value * other.value,
            "mul",
            (self, lambda g: unbroadcast(g * other.value, self.shape)),
            (other, lambda g: unbroadcast(g * self.value, other.shape)),
        )

    def __rmul__(self, other: Operand) -> Node:
        return as_node(other) * self

    def __truediv__(self, other: Operand) -> Node:
        other = as_node(other)
        return make_node(
            self.value / other.value,
            "div",
            (self, lambda g: unbroadcast(g / other.value, self.shape)),
            (
                other,
                lambda g: unbroadcast(
                    -g * self.value / (other.value * other.value), other.shape
                ),
            ),
        )

    def __rtruediv__(self, other: Operand) -> Node:
        return as_node(other) / self

    def __pow__(self, exponent: float) -> Node:
        if isinstance(exponent, Node):
            raise AutodiffUsageError("Only constant exponents are supported")
        return make_node(
            self.value**exponent,
            "pow",
            (self, lambda g: g * exponent * self.value ** (exponent - 1)),
        )

    def __matmul__(self, other: Operand) -> Node:
        """
        Contract the last axis of self (..., n) with a matrix (n, m).
        """
        other = as_node(other)
        if other.ndim != 2 or self.shape[-1] != other.shape[0]:
            raise AutodiffUsageError(
                f"Cannot multiply shape {self.shape} by {other.shape}"
            )
        n, m = other.shape
        return make_node(
            self.value @ other.value,
            "matmul",
            (self, lambda g: g @ other.value.T),
            (other, lambda g: self.value.reshape(-1, n).T @ g.reshape(-1, m)),
        )

    def __getitem__(self, index: Any) -> Node:
        def vjp(g: np.ndarray) -> np.ndarray:
            full = np.zeros_like(self.value)
            np.add.at(full, index, g)
            return full

        return make_node(self.value[index], "getitem", (self, vjp))

    def sum(self, axis: Union[int, tuple[int, ...], None] = None, keepdims=False):
        def vjp(g: np.ndarray) -> np.ndarray:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return np.broadcast_to(g, self.shape).copy()

        return make_node(self.value.sum(axis=axis, keepdims=keepdims), "sum", (self, vjp))

    def mean(self, axis: Union[int, tuple[int, ...], None] = None, keepdims=False):
        total = self.sum(axis=axis, keepdims=keepdims)
        count = self.size // max(total.size, 1)
        return total / float(count)

    def reshape(self, *shape: int) -> Node:
        if len(shape) == 1 and isinstance(shape[0], tuple):
            shape = shape[0]
        return make_node(
            self.value.reshape(shape),
            "reshape",
            (self, lambda g: g.reshape(self.shape)),
        )


def constant(value: Any) -> Node:
    return Node(value, requires_grad=False, op="constant")


def as_node(value: Operand) -> Node:
    if isinstance(value, Node):
        return value
    return constant(value)


def unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """
    Sum a gradient over the axes that broadcasting added or stretched, so that it
    matches the shape of the operand it belongs to.
    """
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def make_node(
    value: np.ndarray, op: str, *parents: tuple[Node, VectorJacobian]
) -> Node:
    """
    Create the output node of an operation, recording only parents that need a
    gradient.
    """
    value = np.asarray(value, dtype=np.float64)
    if np.isnan(value).any():
        raise NumericError(f"Operation {op!r} produced NaN", op=op)
    recorded = tuple(
        (parent, vjp) for parent, vjp in parents if parent.requires_grad
    )
    return Node(value, recorded, op=op, requires_grad=bool(recorded))


class ComputationGraph:
    """
    The nodes upstream of a sink node in topological order, found by depth-first
    traversal from the sink. Nodes reachable by several paths appear once.
    """

    sink: Node
    order: list[Node]

    def __init__(self, sink: Node):
        self.sink = sink
        self.order = []
        self._resolve_node_deps()

    def __iter__(self) -> Iterator[Node]:
        return iter(self.order)

    def _resolve_node_deps(self):
        visited: set[int] = set()
        on_path: set[int] = set()
        stack: list[tuple[Node, Iterator[tuple[Node, VectorJacobian]]]] = [
            (self.sink, iter(self.sink.parents))
        ]
        on_path.add(id(self.sink))

        while stack:
            node, pending = stack[-1]
            for parent, _ in pending:
                if id(parent) in on_path:
                    raise GraphCycleError(
                        f"Encountered cyclic dependency at operation {parent.op!r}"
                    )
                if id(parent) not in visited:
                    on_path.add(id(parent))
                    stack.append((parent, iter(parent.parents)))
                    break
            else:
                # all parents done, so node can be placed
                stack.pop()
                on_path.discard(id(node))
                visited.add(id(node))
                self.order.append(node)


def backward(loss: Node):
    """
    Populate ``grad`` on every node upstream of a scalar loss.
    """
    if loss.size != 1:
        raise AutodiffUsageError(
            f"Can only differentiate a scalar loss, got shape {loss.shape}"
        )
    if loss._consumed:
        raise AutodiffUsageError(
            "Gradients were already computed for this loss, call zero_grad() "
            "before differentiating it again"
        )

    graph = ComputationGraph(loss)
    for node in graph:
        node.grad = None
    loss.grad = np.ones_like(loss.value)

    for node in reversed(graph.order):
        if node.grad is None:
            continue
        for parent, vjp in node.parents:
            contribution = vjp(node.grad)
            if np.isnan(contribution).any():
                raise NumericError(
                    f"Gradient of operation {node.op!r} is NaN", op=node.op
                )
            parent.grad = (
                contribution if parent.grad is None else parent.grad + contribution
            )

    for node in graph:
        if node.grad is None:
            node.grad = np.zeros_like(node.value)
    loss._consumed = True


def zero_grad(loss: Node):
    for node in ComputationGraph(loss):
        node.grad = None
    loss._consumed = False
