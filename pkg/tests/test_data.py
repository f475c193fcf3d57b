import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tskfuzzy.data import (
    DataError,
    Normalizer,
    load_csv,
    one_hot,
    pca_fit,
    prepare,
    read_manifest,
    split,
    znorm_fit_apply,
)


def write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_basic(tmp_path):
    p = write(tmp_path, "a,b,y\n1,2,3\n4,5,6\n")
    t = load_csv(p, "y")
    assert t.names == ["a", "b"]
    np.testing.assert_array_equal(t.y, [3.0, 6.0])
    np.testing.assert_array_equal(t.columns[1], [2.0, 5.0])


def test_load_csv_missing_value_reports_line(tmp_path):
    p = write(tmp_path, "a,y\n1,2\n?,3\n")
    with pytest.raises(DataError, match=":3:"):
        load_csv(p, "y")


def test_load_csv_ragged_row(tmp_path):
    p = write(tmp_path, "a,y\n1,2\n1,2,3\n")
    with pytest.raises(DataError, match="expected 2 fields"):
        load_csv(p, "y")


def test_load_csv_drop_and_unknown_target(tmp_path):
    p = write(tmp_path, "id,a,y\nx,1,2\nz,3,4\n")
    assert load_csv(p, "y", drop=["id"]).names == ["a"]
    with pytest.raises(DataError):
        load_csv(p, "nope", drop=["id"])
    with pytest.raises(DataError, match="non-numeric"):
        load_csv(p, "y")


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(DataError, match="no such data file"):
        load_csv(tmp_path / "absent.csv", "y")


def test_one_hot_first_appearance_order(tmp_path):
    p = write(tmp_path, "s,a,y\nM,1,0\nF,2,0\nI,3,0\nM,4,0\n")
    X, names = one_hot(load_csv(p, "y", categorical=["s"]))
    assert names == ["s=M", "s=F", "s=I", "a"]
    np.testing.assert_array_equal(X[:, :3], [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0]])


def test_znorm_two_points():
    norm, (Xt, yt), [(Xv, yv)] = znorm_fit_apply(np.array([[0.0], [10.0]]), np.array([1.0, 3.0]),
                                                   (np.array([[5.0]]), np.array([4.0])))
    np.testing.assert_array_equal(Xt[:, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(yt, [-1.0, 1.0])
    np.testing.assert_array_equal(Xv, [[0.0]])
    np.testing.assert_array_equal(yv, [2.0])


def test_znorm_constant_feature_maps_to_zero():
    X = np.column_stack([np.full(4, 7.0), np.arange(4.0)])
    norm = Normalizer.fit(X, np.zeros(4))
    assert norm.std[0] == 1.0
    np.testing.assert_array_equal(norm.transform(X)[:, 0], 0.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), n=st.integers(3, 50), m=st.integers(1, 6))
def test_znorm_training_statistics(seed, n, m):
    rng = np.random.default_rng(seed)
    X = rng.normal(3.0, 5.0, (n, m))
    Z = Normalizer.fit(X, rng.normal(size=n)).transform(X)
    np.testing.assert_allclose(Z.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(Z.std(axis=0), 1.0, rtol=1e-10)


def test_pca_orthonormal_and_sorted(rng):
    X = rng.normal(size=(200, 5)) @ rng.normal(size=(5, 5))
    p = pca_fit(X, 3)
    np.testing.assert_allclose(p.components.T @ p.components, np.eye(3), atol=1e-12)
    assert np.all(np.diff(p.explained_variance) <= 0)
    lead = p.components[np.argmax(np.abs(p.components), axis=0), np.arange(3)]
    assert np.all(lead > 0)


def test_pca_matches_svd_oracle(rng):
    X = rng.normal(size=(100, 4)) * [5, 3, 1, 0.5]
    Xc = X - X.mean(axis=0)
    _, s, vt = np.linalg.svd(Xc, full_matrices=False)
    p = pca_fit(X, 2)
    np.testing.assert_allclose(p.explained_variance, s[:2] ** 2 / 100, rtol=1e-10)
    for j in range(2):
        assert abs(abs(vt[j] @ p.components[:, j]) - 1.0) < 1e-10


def test_pca_full_rank_ratio_sums_to_one(rng):
    X = rng.normal(size=(50, 3))
    assert pca_fit(X, 3).explained_ratio.sum() == pytest.approx(1.0, rel=1e-12)


def test_pca_too_many_components():
    with pytest.raises(ValueError):
        pca_fit(np.zeros((5, 2)), 3)


def test_split_sizes_and_partition():
    s = split(1000, seed=1)
    assert (s.train.size, s.val.size, s.test.size) == (700, 150, 150)
    all_idx = np.concatenate([s.train, s.val, s.test])
    np.testing.assert_array_equal(np.sort(all_idx), np.arange(1000))


def test_split_deterministic_and_seed_sensitive():
    a, b, c = split(100, seed=5), split(100, seed=5), split(100, seed=6)
    np.testing.assert_array_equal(a.train, b.train)
    assert not np.array_equal(a.train, c.train)


def test_split_small_n():
    s = split(7, seed=0)
    assert s.train.size + s.val.size + s.test.size == 7


def test_prepare_uses_training_statistics_only(rng):
    X = rng.normal(size=(40, 3))
    y = rng.normal(size=40)
    s = split(40, seed=0)
    ds = prepare(X, y, s)
    np.testing.assert_allclose(ds.X_train.mean(axis=0), 0, atol=1e-12)
    assert ds.y_train.mean() == pytest.approx(0, abs=1e-12)
    np.testing.assert_allclose(ds.y_test, y[s.test] - y[s.train].mean())


def test_prepare_with_pca(rng):
    X = rng.normal(size=(40, 5))
    ds = prepare(X, rng.normal(size=40), split(40, seed=0), pca_dim=2)
    assert ds.n_features == 2 and ds.feature_names == ["pc1", "pc2"]


def test_read_manifest_resolves_relative_paths(tmp_path):
    (tmp_path / "sub").mkdir()
    m = tmp_path / "sub" / "m.toml"
    m.write_text('[[dataset]]\nname = "D"\npath = "d.csv"\ntarget = "y"\ndrop = ["id"]\n')
    (e,) = read_manifest(m)
    assert e.path == tmp_path / "sub" / "d.csv" and e.drop == ("id",)
