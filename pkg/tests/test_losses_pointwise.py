import math

import numpy as np
import pytest

from ordinalseg.autodiff import constant
from ordinalseg.core import ClassConfig, LabelMap, ProbMap, one_hot_array
from ordinalseg.exceptions import ConfigValidationError, UsageError, ValidationError
from ordinalseg.losses import (
    CrossEntropyLoss,
    LossConfig,
    LossValue,
    Objective,
    OrdinalLoss,
    QuasiUnimodalLoss,
    ce_loss,
    combined_loss,
    expmse_loss,
    o2_loss,
    ordinal_expectation,
    ordinal_variance,
    qul_loss,
    qul_sets,
)

from . import oracles


def pixel(*probs):
    return ProbMap(np.array([[probs]], dtype=np.float64))


def label(k):
    return LabelMap(np.array([[k]]))


def random_probs(rng, shape, k_classes):
    return rng.dirichlet(np.ones(k_classes), size=shape)


def test_ce_examples():
    assert ce_loss(pixel(0.5, 0.5), label(1)).total == pytest.approx(math.log(2))
    uniform = ProbMap(np.full((3, 2, 4), 0.25))
    labels = LabelMap(np.array([[1, 2], [3, 4], [4, 1]]))
    assert ce_loss(uniform, labels).total == pytest.approx(math.log(4))
    one_hot = ProbMap(one_hot_array(labels.values, 4))
    assert ce_loss(one_hot, labels).total <= 1e-11


def test_ce_rejects_shape_mismatch():
    with pytest.raises(ValidationError):
        ce_loss(ProbMap(np.full((2, 2, 2), 0.5)), LabelMap(np.ones((2, 3), dtype=int)))


def test_pixel_map_mean_is_total(rng):
    probs = ProbMap(random_probs(rng, (3, 4), 3))
    labels = LabelMap(rng.integers(1, 4, size=(3, 4)))
    value = qul_loss(probs, labels)
    assert value.pixel_map.shape == (3, 4)
    assert value.total == pytest.approx(value.pixel_map.mean())


def test_qul_sets():
    assert qul_sets(3, ClassConfig(5)) == (((1, 2),), ((5, 4),))
    assert qul_sets(2, ClassConfig(3)) == ((), ())
    assert qul_sets(1, ClassConfig(4)) == ((), ((3, 2), (4, 2)))
    with pytest.raises(ValidationError):
        qul_sets(6, ClassConfig(5))


def test_qul_examples():
    config = LossConfig.load(qul_delta=0.05)
    assert qul_loss(pixel(0.2, 0.6, 0.2), label(2), config).total == 0
    no_margin = LossConfig(qul_delta=1e-300, qul_lambda=1.0)
    assert qul_loss(pixel(0.6, 0.2, 0.2), label(2), no_margin).total == pytest.approx(0.4)
    assert qul_loss(pixel(0.9, 0.1), label(1), config).total == 0


def test_expectation_and_variance():
    assert ordinal_expectation([0, 0, 1]) == 3
    assert ordinal_expectation([1 / 3] * 3) == pytest.approx(2)
    assert ordinal_expectation([0.25, 0.75]) == pytest.approx(1.75)
    assert ordinal_variance([0, 1, 0]) == 0
    assert ordinal_variance([1 / 3] * 3) == pytest.approx(2 / 3)
    assert ordinal_variance([0.5, 0, 0.5]) == pytest.approx(1)


def test_expmse_examples():
    config = LossConfig.load(expmse_lambda=1)
    assert expmse_loss(pixel(1 / 3, 1 / 3, 1 / 3), label(2), config).total == (
        pytest.approx(2 / 3)
    )
    assert expmse_loss(pixel(0, 0, 1), label(1), LossConfig.load(expmse_lambda=7)).total == 4


def test_o2_examples():
    config = LossConfig.load(o2_delta=0.05)
    assert o2_loss(pixel(0.1, 0.6, 0.2, 0.1), label(2), config).total == 0
    no_margin = LossConfig(o2_delta=1e-300)
    assert o2_loss(pixel(0.5, 0.2, 0.3), label(2), no_margin).total == pytest.approx(0.4)
    assert o2_loss(pixel(0.8, 0.2), label(1), config).total == 0


def test_combined_loss():
    ce, ordinal = LossValue(0.5), LossValue(0.2)
    assert combined_loss(ce, ordinal, 10).total == pytest.approx(2.5)
    assert combined_loss(ce, ordinal, 0).total == 0.5
    assert combined_loss(ce, [ordinal, LossValue(0.3)], 1).total == pytest.approx(1.0)
    with pytest.raises(ConfigValidationError):
        combined_loss(ce, ordinal, -1)


@pytest.mark.parametrize("k_classes", [2, 3, 4, 5])
def test_pointwise_losses_match_oracles(k_classes, rng):
    for _ in range(250):
        probs = random_probs(rng, (1, 1), k_classes)
        labels = rng.integers(1, k_classes + 1, size=(1, 1))
        delta, lam = rng.uniform(0.01, 0.5), rng.uniform(0.1, 5)
        config = LossConfig.load(
            qul_delta=delta, qul_lambda=lam, expmse_lambda=lam, o2_delta=delta
        )
        p, y = probs.tolist(), labels.tolist()
        assert ce_loss(probs, labels).total == pytest.approx(oracles.ce(p, y), abs=1e-10)
        assert qul_loss(probs, labels, config).total == pytest.approx(
            oracles.qul(p, y, delta, lam), abs=1e-10
        )
        assert expmse_loss(probs, labels, config).total == pytest.approx(
            oracles.expmse(p, y, lam), abs=1e-10
        )
        assert o2_loss(probs, labels, config).total == pytest.approx(
            oracles.o2(p, y, delta), abs=1e-10
        )


def test_losses_are_nonnegative_on_random_maps(rng):
    for _ in range(50):
        k_classes = int(rng.integers(2, 6))
        probs = random_probs(rng, (4, 5), k_classes)
        labels = rng.integers(1, k_classes + 1, size=(4, 5))
        for loss in (ce_loss, qul_loss, expmse_loss, o2_loss):
            assert loss(probs, labels).total >= 0


def unimodal_with_margin(rng, k_star, k_classes, delta):
    """A distribution strictly rising to k_star and strictly falling after it."""
    levels = k_classes - np.abs(np.arange(1, k_classes + 1) - k_star)
    heights = levels + rng.uniform(0.0, 0.5, size=k_classes)
    probs = heights / heights.sum()
    return probs, min(delta, np.abs(np.diff(probs)).min() * 0.99)


@pytest.mark.parametrize("k_classes", [2, 3, 4, 5, 6])
def test_zero_loss_on_unimodal_distributions(k_classes, rng):
    for k_star in range(1, k_classes + 1):
        probs, delta = unimodal_with_margin(rng, k_star, k_classes, 0.05)
        config = LossConfig.load(qul_delta=delta, o2_delta=delta)
        values = probs[np.newaxis, np.newaxis]
        labels = np.array([[k_star]])
        assert qul_loss(values, labels, config).total == 0
        assert o2_loss(values, labels, config).total == 0


@pytest.mark.parametrize("k_classes", [2, 3, 4])
def test_expmse_zero_exactly_on_correct_one_hot(k_classes):
    for k_star in range(1, k_classes + 1):
        for k in range(1, k_classes + 1):
            probs = one_hot_array(np.array([[k]]), k_classes)
            value = expmse_loss(probs, np.array([[k_star]])).total
            assert (value == 0) == (k == k_star)
        soft = np.full((1, 1, k_classes), 1 / k_classes)
        assert expmse_loss(soft, np.array([[k_star]])).total > 0


def test_gradient_matches_one_hot_ce():
    probs = np.array([[[0.25, 0.75]]])
    grad = CrossEntropyLoss().gradient(probs, np.array([[2]]))
    assert grad == pytest.approx(np.array([[[0.0, -1 / 0.75]]]).reshape(grad.shape))


def test_loss_registry():
    assert set(OrdinalLoss.get_loss_types()) >= {
        "ce",
        "qul",
        "expmse",
        "o2",
        "csnp",
        "csdt",
        "cssdf",
    }
    assert OrdinalLoss.lookup("qul") is QuasiUnimodalLoss
    with pytest.raises(UsageError, match="Unknown loss"):
        OrdinalLoss.lookup("focal")


def test_protocol_ranges_apply_unless_unsafe():
    with pytest.raises(ConfigValidationError, match="tuned range"):
        QuasiUnimodalLoss.from_mapping({"qul_delta": 0.9})
    loss = QuasiUnimodalLoss.from_mapping({"qul_delta": 0.9}, safe=False)
    assert loss.options.qul_delta == 0.9


def test_objective_selection():
    assert Objective.parse_selection("ce") == ()
    assert Objective.parse_selection("qul+cssdf") == ("qul", "cssdf")
    with pytest.raises(UsageError):
        Objective.parse_selection("ce+qul")
    with pytest.raises(UsageError):
        Objective.parse_selection("qul+")
    objective = Objective.from_selection("qul+expmse", {"lambda_combine": 10})
    assert objective.name == "qul+expmse"
    assert [term.__key__ for term in objective.iter_terms()] == ["ce", "qul", "expmse"]


def test_objective_is_ce_plus_weighted_terms(rng):
    probs = random_probs(rng, (1, 3, 3), 4)
    labels = rng.integers(1, 5, size=(1, 3, 3))
    objective = Objective.from_selection("qul+o2", {"lambda_combine": 2.5})
    expected = (
        ce_loss(probs, labels).total
        + 2.5 * (qul_loss(probs, labels).total + o2_loss(probs, labels).total)
    )
    assert objective.build(constant(probs), labels).item() == pytest.approx(expected)
    ce_only = Objective.from_selection("ce")
    assert ce_only.build(constant(probs), labels).item() == pytest.approx(
        ce_loss(probs, labels).total
    )
