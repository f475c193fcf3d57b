import numpy as np
import pytest

from tskfuzzy.augment import (
    MODES,
    AugmentedModel,
    AugmentSpec,
    augment_forward,
    augment_gradient,
    augment_model,
    projection_dim,
)
from tskfuzzy.gradcheck import check_model
from tskfuzzy.model import TskModel, load_model, sample_drop_mask, save_model


def base_model(rng, R=4, M=3):
    return TskModel(rng.normal(size=(R, M)), rng.uniform(0.5, 2, (R, M)), rng.normal(size=(R, M + 1)))


@pytest.mark.parametrize("R,d", [(1, 1), (2, 1), (4, 2), (16, 4), (24, 5), (30, 5)])
def test_projection_dim(R, d):
    assert projection_dim(R) == d


def test_forward_layout_per_mode(rng):
    x = np.array([1.0, 2.0, 3.0])
    base = base_model(rng)
    for mode, (na, nc) in {"none": (3, 3), "antecedent": (5, 3), "shared": (5, 5), "split": (5, 5)}.items():
        m = augment_model(base, AugmentSpec(mode, 2), rng)
        a, z = augment_forward(m, x)
        assert (a.size, z.size) == (na, nc)
        np.testing.assert_array_equal(a[-3:], x)
        if mode != "none":
            np.testing.assert_allclose(a[:2], x @ m.proj_a, rtol=1e-15)
        if mode == "split":
            np.testing.assert_allclose(z[:2], x @ m.proj_c, rtol=1e-15)
            assert not np.array_equal(a[:2], z[:2])
        if mode == "shared":
            np.testing.assert_array_equal(a, z)


def test_zero_projection_inputs_are_zero(rng):
    m = augment_model(base_model(rng), AugmentSpec("split", 2), rng)
    m = AugmentedModel(m.tsk, m.spec, 3, np.zeros((3, 2)), np.zeros((3, 2)))
    a, z = augment_forward(m, np.array([4.0, -1.0, 2.0]))
    np.testing.assert_array_equal(a[:2], 0.0)
    np.testing.assert_array_equal(z[:2], 0.0)


@pytest.mark.parametrize("mode", MODES)
def test_fresh_augmentation_keeps_consequents(mode, rng):
    """New slopes start at zero, so consequents match the base rulebase."""
    base = base_model(rng)
    m = augment_model(base, AugmentSpec(mode, 2), rng)
    X = rng.normal(size=(5, 3))
    A, Z = m.inputs(X)
    np.testing.assert_allclose(
        Z @ m.tsk.weights[:, 1:].T + m.tsk.weights[:, 0], X @ base.weights[:, 1:].T + base.weights[:, 0],
        rtol=1e-13, atol=1e-13,
    )


def test_initial_projection_range(rng):
    m = augment_model(base_model(rng, M=16), AugmentSpec("split", 3), rng)
    assert np.all(np.abs(m.proj_a) <= 0.25) and np.all(np.abs(m.proj_c) <= 0.25)


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("seed", range(4))
def test_gradients_match_finite_difference(mode, seed):
    rng = np.random.default_rng(seed)
    m = augment_model(base_model(rng), AugmentSpec(mode, 2), rng)
    m = m.with_params(m.flatten() + 0.2 * rng.normal(size=m.n_params))
    X, y = rng.normal(size=(6, 3)), rng.normal(size=6)
    res = check_model(m, X, y, sample_drop_mask(6, 4, 0.6, rng), 0.05)
    assert res.passed, res


def test_path_isolation(rng):
    X = rng.normal(size=(5, 3))
    gA, gZ = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
    spec = AugmentSpec("split", 2)
    ga, gc = augment_gradient(spec, X, gA, np.zeros_like(gZ))
    np.testing.assert_array_equal(gc, 0.0)
    ga, gc = augment_gradient(spec, X, np.zeros_like(gA), gZ)
    np.testing.assert_array_equal(ga, 0.0)
    ga, gc = augment_gradient(AugmentSpec("antecedent", 2), X, gA, gZ)
    assert gc is None
    np.testing.assert_allclose(ga, X.T @ gA[:, :2])


def test_shared_is_sum_of_paths(rng):
    X = rng.normal(size=(5, 3))
    gA, gZ = rng.normal(size=(5, 5)), rng.normal(size=(5, 5))
    shared, _ = augment_gradient(AugmentSpec("shared", 2), X, gA, gZ)
    pa, pc = augment_gradient(AugmentSpec("split", 2), X, gA, gZ)
    np.testing.assert_allclose(shared, pa + pc, rtol=1e-14)


@pytest.mark.parametrize("mode,extra", [("none", 0), ("antecedent", 6), ("shared", 6), ("split", 12)])
def test_parameter_counts(mode, extra, rng):
    base = base_model(rng)
    m = augment_model(base, AugmentSpec(mode, 2), rng)
    spec = m.spec
    R, M = 4, 3
    expected = 2 * R * spec.antecedent_dim(M) + R * (spec.consequent_dim(M) + 1) + extra
    assert m.n_params == expected == m.flatten().size


def test_projection_unaffected_by_tsk_projection(rng):
    m = augment_model(base_model(rng), AugmentSpec("split", 1), rng)
    theta = m.flatten()
    theta[-1] = -5.0
    assert m.project(theta)[-1] == -5.0


def test_save_load_roundtrip(tmp_path, rng):
    m = augment_model(base_model(rng), AugmentSpec("split", 2), rng)
    save_model(m, tmp_path / "m.json")
    assert load_model(tmp_path / "m.json") == m


def test_shared_grid_rejected(rng):
    from tskfuzzy.initialization import init_grid

    grid = init_grid(rng.normal(size=(8, 2)), np.zeros(8), (2, 2))
    with pytest.raises(ValueError):
        augment_model(grid, AugmentSpec("split", 1), rng)


def test_bad_mode():
    with pytest.raises(ValueError):
        AugmentSpec("both", 1)
