import numpy as np
import pytest

from skintone.losses import (LossConfig, batch_loss, inverse_frequency_weights,
                             loss, ordinal_multiplier, softmax)


def numerical_gradient(logits, target, cfg, eps=1e-6):
    grad = np.zeros_like(logits)
    for i in range(len(logits)):
        up = logits.copy()
        up[i] += eps
        down = logits.copy()
        down[i] -= eps
        grad[i] = (loss(up, target, cfg)[0] - loss(down, target, cfg)[0]) / (2 * eps)
    return grad


def test_plain_ce_value():
    logits = np.zeros(10)
    value, grad = loss(logits, 3, LossConfig("CE"))
    assert value == pytest.approx(np.log(10))
    assert grad.sum() == pytest.approx(0.0, abs=1e-12)


def test_ordinal_equals_ce_when_correct():
    rng = np.random.default_rng(0)
    logits = rng.normal(size=10)
    target = int(np.argmax(logits)) + 1
    v_ord, g_ord = loss(logits, target, LossConfig("ORDINAL_CE"))
    v_ce, g_ce = loss(logits, target, LossConfig("CE"))
    assert v_ord == v_ce
    assert (g_ord == g_ce).all()


def test_ordinal_multiplier_distance_3():
    # prediction at class 8, target 5 -> m = 1 + 9/10 = 1.9
    logits = np.zeros(10)
    logits[7] = 5.0
    v_ord, _ = loss(logits, 5, LossConfig("ORDINAL_CE"))
    v_ce, _ = loss(logits, 5, LossConfig("CE"))
    assert v_ord / v_ce == pytest.approx(1.9, rel=1e-12)
    assert ordinal_multiplier(8, 5) == pytest.approx(1.9)


def test_multiplier_monotone_in_distance():
    values = [ordinal_multiplier(1 + d, 1) for d in range(10)]
    assert values == sorted(values)
    assert values[-1] == pytest.approx(1 + 81 / 10)


def test_gradient_matches_finite_differences_all_kinds():
    rng = np.random.default_rng(42)
    for trial in range(100):
        kind = ("CE", "WEIGHTED_CE", "ORDINAL_CE",
                "WEIGHTED_ORDINAL_CE")[trial % 4]
        weights = tuple(rng.uniform(0.2, 3.0, size=10)) if "WEIGHTED" in kind \
            else None
        cfg = LossConfig(kind, class_weights=weights)
        logits = rng.normal(scale=2.0, size=10)
        target = int(rng.integers(1, 11))
        _, grad = loss(logits, target, cfg)
        approx = numerical_gradient(logits, target, cfg)
        denom = max(np.abs(approx).max(), 1e-8)
        assert np.abs(grad - approx).max() / denom < 1e-5


def test_weighted_scales_by_target_weight():
    weights = tuple([1.0] * 9 + [4.0])
    logits = np.linspace(-1, 1, 10)
    v_plain, _ = loss(logits, 10, LossConfig("CE"))
    v_weighted, _ = loss(logits, 10, LossConfig("WEIGHTED_CE",
                                                class_weights=weights))
    assert v_weighted == pytest.approx(4.0 * v_plain)


def test_non_finite_logits_rejected():
    bad = np.zeros(10)
    bad[3] = np.nan
    with pytest.raises(ValueError):
        loss(bad, 1, LossConfig())
    bad[3] = np.inf
    with pytest.raises(ValueError):
        loss(bad, 1, LossConfig())


def test_inverse_frequency_weights():
    y = np.array([1] * 30 + [2] * 10 + [3] * 10)
    weights = inverse_frequency_weights(y)
    assert weights[1] == pytest.approx(weights[2])
    assert weights[1] == pytest.approx(3 * weights[0])
    assert np.mean(weights[:3]) == pytest.approx(1.0)
    assert (weights > 0).all()


def test_batch_matches_single():
    rng = np.random.default_rng(1)
    logits = rng.normal(size=(6, 10))
    targets = rng.integers(1, 11, size=6)
    cfg = LossConfig("ORDINAL_CE")
    values, grads = batch_loss(logits, targets, cfg)
    for i in range(6):
        v, g = loss(logits[i], targets[i], cfg)
        assert values[i] == pytest.approx(v)
        assert np.allclose(grads[i], g)


def test_softmax_stable():
    probs = softmax(np.array([1000.0, 0.0, -1000.0] + [0.0] * 7))
    assert np.isfinite(probs).all()
    assert probs.sum() == pytest.approx(1.0)


def test_invalid_kind_rejected():
    with pytest.raises(ValueError):
        LossConfig("HINGE")
    with pytest.raises(ValueError):
        LossConfig("WEIGHTED_CE", class_weights=(1.0,) * 9 + (0.0,))
