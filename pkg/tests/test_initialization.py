import numpy as np
import pytest

from tskfuzzy.gradcheck import central_difference
from tskfuzzy.initialization import (
    RulebaseSpec,
    init_fcm,
    init_grid,
    init_kmeans,
    init_random,
    initialize,
)
from tskfuzzy.model import SIGMA_MIN, loss, sample_drop_mask
from tskfuzzy.optim import OptimizerConfig, OptimizerState, step


def labelled_clouds(rng, n=80):
    a = rng.normal(-10.0, 0.1, (n, 2))
    b = rng.normal(10.0, 0.1, (n, 2))
    return np.vstack([a, b]), np.r_[np.ones(n), -np.ones(n)]


def test_fcm_single_rule(rng):
    X, y = rng.normal(size=(50, 3)), rng.normal(size=50)
    m = init_fcm(X, y, 1, rng=rng)
    np.testing.assert_allclose(m.centers[0], X.mean(axis=0), atol=1e-12)
    np.testing.assert_allclose(m.sigmas[0], X.std(axis=0), rtol=1e-12)
    assert m.weights[0, 0] == pytest.approx(y.mean(), rel=1e-12)
    np.testing.assert_array_equal(m.weights[0, 1:], 0.0)


def test_fcm_two_clouds_biases(rng):
    X, y = labelled_clouds(rng)
    m = init_fcm(X, y, 2, rng=rng)
    np.testing.assert_allclose(np.sort(m.weights[:, 0]), [-1.0, 1.0], atol=0.05)


def test_sigma_floor_on_constant_feature(rng):
    X = np.column_stack([rng.normal(size=30), np.full(30, 2.0)])
    for m in (init_fcm(X, np.zeros(30), 3, rng=rng), init_kmeans(X, np.zeros(30), 3, rng=rng)):
        assert np.all(m.sigmas >= SIGMA_MIN)


def test_fcm_needs_enough_samples():
    with pytest.raises(ValueError):
        init_fcm(np.zeros((3, 2)), np.zeros(3), 4)


def test_kmeans_single_rule_matches_fcm(rng):
    X, y = rng.normal(size=(40, 2)), rng.normal(size=40)
    a, b = init_kmeans(X, y, 1, rng=1), init_fcm(X, y, 1, rng=1)
    np.testing.assert_allclose(a.centers, b.centers, atol=1e-12)
    np.testing.assert_allclose(a.sigmas, b.sigmas, rtol=1e-12)
    np.testing.assert_allclose(a.weights, b.weights, atol=1e-12)


def test_kmeans_singleton_cluster_hits_floor():
    X = np.vstack([np.random.default_rng(0).normal(size=(20, 2)), [[100.0, 100.0]]])
    m = init_kmeans(X, np.zeros(21), 2, rng=0)
    far = np.argmax(m.centers[:, 0])
    np.testing.assert_array_equal(m.sigmas[far], SIGMA_MIN)


def test_kmeans_two_clouds_biases(rng):
    X, y = labelled_clouds(rng)
    m = init_kmeans(X, y, 2, rng=rng)
    np.testing.assert_allclose(np.sort(m.weights[:, 0]), [-1.0, 1.0], atol=0.05)


def test_clustering_inits_share_structure(rng):
    X, y = rng.normal(size=(60, 4)), rng.normal(size=60)
    a, b = init_fcm(X, y, 5, rng=rng), init_kmeans(X, y, 5, rng=rng)
    assert a.centers.shape == b.centers.shape and a.weights.shape == b.weights.shape


def test_random_init_ranges():
    m = init_random(6, 40, rng=3)
    assert np.all((m.centers >= 0) & (m.centers <= 1))
    assert np.all((m.weights >= 0) & (m.weights <= 1))
    assert np.all((m.sigmas >= SIGMA_MIN) & (m.sigmas <= 5))
    assert init_random(6, 40, rng=3) == m


def test_grid_enumerates_cross_product():
    X = np.array([[0.0, -1.0], [10.0, 1.0]])
    m = init_grid(X, np.array([1.0, 3.0]), RulebaseSpec.shared_grid((2, 2)))
    assert m.n_rules == 4
    pairs = {tuple(c) for c in m.centers}
    assert pairs == {(0.0, -1.0), (0.0, 1.0), (10.0, -1.0), (10.0, 1.0)}
    np.testing.assert_array_equal(m.weights[:, 0], 2.0)
    np.testing.assert_array_equal(m.weights[:, 1:], 0.0)


def test_grid_even_spacing():
    X = np.array([[0.0], [3.0], [10.0]])
    m = init_grid(X, np.zeros(3), (2,))
    np.testing.assert_array_equal(m.centers[:, 0], [0.0, 10.0])
    np.testing.assert_array_equal(m.sigmas[:, 0], 5.0)


def test_grid_constant_feature():
    X = np.column_stack([np.full(5, 4.0), np.arange(5.0)])
    m = init_grid(X, np.zeros(5), (2, 2))
    np.testing.assert_array_equal(m.centers[:, 0], 4.0)
    np.testing.assert_array_equal(m.sigmas[:, 0], SIGMA_MIN)


def test_grid_shared_slot_gradient_matches_finite_difference(rng):
    X = rng.normal(size=(12, 2))
    y = rng.normal(size=12)
    m = init_grid(X, y, (2, 2))
    m = m.with_params(m.flatten() + 0.1 * rng.normal(size=m.n_params))
    m = m.with_params(m.project(m.flatten()))  # re-tie after the perturbation
    mask = sample_drop_mask(12, 4, 0.7, rng)
    _, tied = m.objective(X, y, mask, 0.05)
    # the shared MF for feature 0, index 1, drives centers of rules with mf_index[:, 0] == 1
    rules = np.flatnonzero(m.mf_index[:, 0] == 1)
    slots = rules * 2 + 0
    base = m.flatten()

    def f(v):
        th = base.copy()
        th[slots] = v[0]
        return loss(m.with_params(th), X, y, mask, 0.05)

    fd = central_difference(f, np.array([base[slots[0]]]))[0]
    assert tied[slots[0]] == pytest.approx(fd, rel=1e-5)
    np.testing.assert_array_equal(tied[slots], tied[slots[0]])


def test_grid_tying_survives_optimizer_steps(rng):
    X, y = rng.normal(size=(30, 3)), rng.normal(size=30)
    m = init_grid(X, y, (2, 2, 2))
    theta = m.flatten()
    state = OptimizerState.zeros(theta.size)
    cfg = OptimizerConfig()
    for _ in range(5):
        mask = sample_drop_mask(30, m.n_rules, 0.5, rng)
        _, g = m.with_params(theta).objective(X, y, mask, 0.05)
        state, theta = step(state, theta, g, cfg, m.project)
    tuned = m.with_params(theta)
    for feat in range(3):
        for k in range(2):
            rows = m.mf_index[:, feat] == k
            assert np.unique(tuned.centers[rows, feat]).size == 1
            assert np.unique(tuned.sigmas[rows, feat]).size == 1


@pytest.mark.parametrize("strategy", ["fcm", "kmeans", "random"])
def test_initial_predictions_finite(rng, strategy):
    X, y = rng.normal(size=(80, 5)), rng.normal(size=80)
    m = initialize(strategy, X, y, RulebaseSpec.independent(6), rng=rng)
    assert np.all(np.isfinite(m.predict(X)))


def test_grid_predictions_finite(rng):
    X, y = rng.normal(size=(80, 4)), rng.normal(size=80)
    m = initialize("grid", X, y, RulebaseSpec.shared_grid((2,) * 4))
    assert np.all(np.isfinite(m.predict(X)))


def test_rulebase_spec_validation():
    with pytest.raises(ValueError):
        RulebaseSpec(n_rules=3, mf_counts=(2,))
    assert RulebaseSpec.shared_grid((2, 3)).rule_count == 6
