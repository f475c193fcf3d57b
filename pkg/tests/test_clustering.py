import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tskfuzzy.clustering import fcm, fcm_memberships, kmeans, subsample_for_clustering


def two_clouds(rng, n=100):
    a = rng.normal(-10.0, 0.1, (n, 2))
    b = rng.normal(10.0, 0.1, (n, 2))
    return np.vstack([a, b]), a.mean(axis=0), b.mean(axis=0)


def match_centers(centers, truth):
    """Max distance after pairing each true mean with its nearest center."""
    return max(np.min(np.linalg.norm(centers - t, axis=1)) for t in truth)


def entropy(u):
    p = np.clip(u, 1e-300, 1.0)
    return float(-np.sum(p * np.log(p), axis=0).mean())


def test_fcm_single_cluster_is_mean(rng):
    X = rng.normal(size=(40, 3))
    res = fcm(X, 1, rng=rng)
    np.testing.assert_allclose(res.centers[0], X.mean(axis=0), atol=1e-12)
    np.testing.assert_array_equal(res.memberships, 1.0)


def test_fcm_recovers_two_clouds(rng):
    X, ma, mb = two_clouds(rng)
    res = fcm(X, 2, rng=rng)
    assert match_centers(res.centers, [ma, mb]) < 0.1


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(5, 60), c=st.integers(1, 5), m=st.floats(1.2, 4.0))
def test_fcm_membership_invariants(seed, n, c, m):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    res = fcm(X, c, fuzzifier=m, rng=rng, max_iter=30)
    np.testing.assert_allclose(res.memberships.sum(axis=0), 1.0, atol=1e-9)
    assert np.all((res.memberships >= 0) & (res.memberships <= 1))
    assert np.all(np.isfinite(res.centers))


def test_fcm_objective_non_increasing(rng):
    X = rng.normal(size=(200, 4))
    res = fcm(X, 5, rng=rng, tol=0.0, max_iter=60)
    J = np.array(res.objective)
    assert np.all(np.diff(J) <= 1e-10 * J[:-1])


def test_fcm_coincident_point_gets_full_membership():
    X = np.array([[0.0], [1.0], [5.0]])
    u = fcm_memberships(X, np.array([[1.0], [4.0]]))
    np.testing.assert_array_equal(u[:, 1], [1.0, 0.0])


def test_fcm_fuzzifier_controls_hardness(rng):
    X, _, _ = two_clouds(rng)
    hard = fcm(X, 2, fuzzifier=1.1, rng=1)
    soft = fcm(X, 2, fuzzifier=4.0, rng=1)
    assert entropy(hard.memberships) < entropy(soft.memberships)


def test_fcm_deterministic():
    X = np.random.default_rng(3).normal(size=(50, 2))
    a, b = fcm(X, 3, rng=7), fcm(X, 3, rng=7)
    np.testing.assert_array_equal(a.centers, b.centers)
    np.testing.assert_array_equal(a.memberships, b.memberships)


def test_fcm_too_many_clusters():
    with pytest.raises(ValueError):
        fcm(np.zeros((3, 2)), 4)


def test_kmeans_single_cluster_is_mean(rng):
    X = rng.normal(size=(30, 2))
    np.testing.assert_allclose(kmeans(X, 1, rng=rng).centers[0], X.mean(axis=0), atol=1e-12)


def test_kmeans_recovers_two_clouds(rng):
    X, ma, mb = two_clouds(rng)
    res = kmeans(X, 2, rng=rng)
    assert match_centers(res.centers, [ma, mb]) < 0.1
    np.testing.assert_array_equal(res.memberships.sum(axis=0), 1.0)


def test_kmeans_sse_non_increasing(rng):
    X = rng.normal(size=(300, 3))
    res = kmeans(X, 8, tol=0.0, rng=rng)
    sse = np.array(res.objective)
    assert np.all(np.diff(sse) <= 1e-9 * sse[:-1])


def test_kmeans_handles_duplicate_points():
    X = np.vstack([np.zeros((10, 2)), np.ones((1, 2))])
    res = kmeans(X, 3, rng=0)
    assert np.all(np.isfinite(res.centers))


def test_subsample_keeps_small_sets(rng):
    X = rng.normal(size=(20, 2))
    np.testing.assert_array_equal(subsample_for_clustering(X, 50, rng), X)


def test_subsample_caps_large_sets(rng):
    X = np.arange(1_000_000, dtype=float)[:, None]
    sub, idx = subsample_for_clustering(X, 10_000, rng, return_index=True)
    assert sub.shape == (10_000, 1)
    assert np.unique(idx).size == 10_000
    assert idx.min() >= 0 and idx.max() < 1_000_000


def test_memberships_finite_for_small_fuzzifier():
    X = np.array([[1e3], [-1e3], [0.5]])
    u = fcm_memberships(X, np.array([[0.0], [2.0]]), fuzzifier=1.01)
    assert np.all(np.isfinite(u))
    np.testing.assert_allclose(u.sum(axis=0), 1.0, atol=1e-12)
