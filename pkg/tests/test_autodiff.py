import numpy as np
import pytest

from ordinalseg.autodiff import (
    ComputationGraph,
    Node,
    absolute,
    clip,
    concat,
    constant,
    exp,
    finite_diff_check,
    log,
    pad,
    relu,
    repeat,
    softmax,
    zero_grad,
)
from ordinalseg.exceptions import (
    AutodiffUsageError,
    GradientCheckFailure,
    GraphCycleError,
    NumericError,
    OracleError,
)


def test_gradient_of_polynomial():
    x = Node(np.array([1.0, 2.0, 3.0]))
    loss = (x * x * 3.0 + x).sum()
    loss.backward()
    assert np.allclose(x.grad, 6 * x.value + 1)


def test_broadcast_gradients_are_reduced():
    x = Node(np.ones((2, 3)))
    bias = Node(np.zeros(3))
    ((x + bias) * 2.0).sum().backward()
    assert np.allclose(bias.grad, [4.0, 4.0, 4.0])
    assert np.allclose(x.grad, 2.0)


def test_shared_subexpression_accumulates():
    x = Node(np.array(2.0))
    y = x * x
    (y + y).backward()
    assert x.grad == pytest.approx(8.0)


def test_backward_requires_scalar():
    x = Node(np.ones(3))
    with pytest.raises(AutodiffUsageError, match="scalar"):
        (x * 2.0).backward()


def test_backward_twice_requires_zero_grad():
    x = Node(np.array(3.0))
    loss = x * x
    loss.backward()
    with pytest.raises(AutodiffUsageError):
        loss.backward()
    zero_grad(loss)
    loss.backward()
    assert x.grad == pytest.approx(6.0)


def test_constants_get_no_gradient():
    x = Node(np.array(1.5))
    c = constant(np.array(4.0))
    (x * c).backward()
    assert c.grad is None
    assert x.grad == pytest.approx(4.0)


def test_relu_derivative_is_zero_at_kink():
    x = Node(np.array([-1.0, 0.0, 2.0]))
    relu(x).sum().backward()
    assert np.array_equal(x.grad, [0.0, 0.0, 1.0])


def test_nan_values_raise_numeric_error():
    x = Node(np.array([-1.0]))
    with pytest.raises(NumericError) as excinfo:
        log(x) * 0.0
    assert excinfo.value.op is not None


def test_graph_order_is_topological():
    x = Node(np.array(1.0))
    y = exp(x)
    z = y * x
    order = list(ComputationGraph(z))
    assert order.index(x) < order.index(y) < order.index(z)


def test_cycles_are_detected():
    x = Node(np.array(1.0))
    y = x * 2.0
    x.parents = ((y, lambda g: g),)
    with pytest.raises(GraphCycleError):
        ComputationGraph(y)


def test_softmax_rows_sum_to_one():
    logits = Node(np.array([[1.0, 2.0, 3.0], [1000.0, 1000.0, 1000.0]]))
    probs = softmax(logits)
    assert np.allclose(probs.value.sum(axis=-1), 1.0)
    assert np.allclose(probs.value[1], 1 / 3)


def test_structural_ops_pass_gradients(rng):
    x = Node(rng.standard_normal((1, 2, 2, 2)))
    padded = pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    joined = concat([padded, padded], axis=-1)
    upsampled = repeat(x, 2, axis=1)
    (joined.sum() + upsampled.sum()).backward()
    assert np.allclose(x.grad, 4.0)


@pytest.mark.parametrize(
    "loss_fn",
    [
        lambda x: (softmax(x) * constant(np.arange(3.0))).sum(),
        lambda x: (absolute(x) ** 2).mean(),
        lambda x: exp(clip(x, -0.9, 0.9)).sum(),
        lambda x: log(softmax(x)[..., 0]).sum(),
        lambda x: (x @ constant(np.eye(3) * 2.0)).sum() / 3.0,
    ],
)
def test_finite_diff_check_passes(loss_fn, rng):
    point = rng.uniform(-0.8, 0.8, size=(2, 3))
    report = finite_diff_check(loss_fn, point)
    assert report.passed, report.describe()
    assert report.coordinates == 6


def test_finite_diff_check_reports_wrong_gradients():
    def broken(x: Node) -> Node:
        # value is x^2 but the recorded derivative is the identity
        from ordinalseg.autodiff.node import make_node

        return make_node(x.value**2, "broken", (x, lambda g: g)).sum()

    report = finite_diff_check(broken, np.array([1.0, 2.0]))
    assert not report.passed
    with pytest.raises(GradientCheckFailure):
        report.raise_for_failure()


def test_finite_diff_check_rejects_non_deterministic_functions():
    calls = []

    def drifting(x: Node) -> Node:
        calls.append(1)
        return x.sum() * float(len(calls))

    with pytest.raises(OracleError):
        finite_diff_check(drifting, np.array([1.0]))


def test_finite_diff_check_rejects_bad_step():
    with pytest.raises(AutodiffUsageError):
        finite_diff_check(lambda x: x.sum(), np.ones(2), h=0.0)
