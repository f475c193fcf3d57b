"""Dataset loading, encoding, normalisation, PCA and train/val/test splits."""

from __future__ import annotations

import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MISSING = {"", "na", "nan", "?", "null"}


class DataError(ValueError):
    pass


@dataclass
class RawTable:
    """Typed columns of a CSV file with the target split off."""

    names: list[str]
    columns: list[np.ndarray]
    categories: dict[str, list[str]]
    y: np.ndarray

    @property
    def n_rows(self) -> int:
        return self.y.shape[0]

    def is_categorical(self, name) -> bool:
        return name in self.categories


def load_csv(path, target, categorical=(), drop=()) -> RawTable:
    """Read a comma-separated file with a header row.

    Missing values and ragged rows raise :class:`DataError`.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such data file: {path}")
    categorical, drop = set(categorical), set(drop)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        rows = []
        for row in reader:
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}"
                )
            cells = [c.strip() for c in row]
            for name, cell in zip(header, cells):
                if cell.lower() in MISSING and name not in drop:
                    raise DataError(f"{path}:{reader.line_num}: missing value in column {name!r}")
            rows.append(cells)
    if not rows:
        raise DataError(f"{path} has no data rows")
    for name in [target, *categorical, *drop]:
        if name not in header:
            raise DataError(f"column {name!r} not found in {path}")

    table = list(zip(*rows))
    names, columns, cats = [], [], {}
    y = None
    for j, name in enumerate(header):
        raw = table[j]
        if name in drop:
            continue
        if name in categorical:
            levels = list(dict.fromkeys(raw))
            cats[name] = levels
            names.append(name)
            columns.append(np.array(raw, dtype=object))
            continue
        try:
            values = np.array([float(v) for v in raw])
        except ValueError as exc:
            raise DataError(f"{path}: non-numeric value in column {name!r}: {exc}") from None
        if name == target:
            y = values
        else:
            names.append(name)
            columns.append(values)
    if target in categorical:
        raise DataError("the target column must be numeric")
    return RawTable(names, columns, cats, y)


def one_hot(table: RawTable):
    """Numeric feature matrix with one indicator column per category level.

    Returns ``(X, feature_names)``.
    """
    blocks, names = [], []
    for name, col in zip(table.names, table.columns):
        if table.is_categorical(name):
            for level in table.categories[name]:
                blocks.append((col == level).astype(float))
                names.append(f"{name}={level}")
        else:
            blocks.append(np.asarray(col, dtype=float))
            names.append(name)
    if not blocks:
        return np.empty((table.n_rows, 0)), names
    return np.column_stack(blocks), names


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int | None = None


def split(n, proportions=(0.7, 0.15, 0.15), seed=None) -> SplitIndices:
    """Random partition of ``range(n)`` into train/validation/test."""
    p = np.asarray(proportions, dtype=float)
    if p.shape != (3,) or np.any(p < 0) or not np.isclose(p.sum(), 1.0):
        raise ValueError("proportions must be three non-negative numbers summing to 1")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(round(p[0] * n))
    n_val = int(round(p[1] * n))
    n_val = min(n_val, n - n_train)
    return SplitIndices(
        np.sort(perm[:n_train]),
        np.sort(perm[n_train : n_train + n_val]),
        np.sort(perm[n_train + n_val :]),
        seed,
    )


@dataclass(frozen=True)
class Pca:
    components: np.ndarray  # M x d, orthonormal columns
    explained_variance: np.ndarray
    explained_ratio: np.ndarray

    def transform(self, X):
        return np.asarray(X, dtype=float) @ self.components


def pca_fit(X, d) -> Pca:
    """Top-``d`` principal directions of the (population) covariance of ``X``.

    Each direction is signed so that its largest-magnitude entry is positive.
    """
    X = np.asarray(X, dtype=float)
    M = X.shape[1]
    if d > M:
        raise ValueError(f"cannot keep {d} components of {M} features")
    if d < 1:
        raise ValueError("need at least one component")
    Xc = X - X.mean(axis=0)
    cov = Xc.T @ Xc / X.shape[0]
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1][:d]
    vals = np.maximum(vals[order], 0.0)
    vecs = vecs[:, order]
    lead = vecs[np.argmax(np.abs(vecs), axis=0), np.arange(d)]
    vecs = vecs * np.where(lead < 0, -1.0, 1.0)
    total = np.maximum(np.trace(cov), np.finfo(float).tiny)
    return Pca(vecs, vals, vals / total)


@dataclass(frozen=True)
class Normalizer:
    """Training-split statistics, applied unchanged to every split."""

    mean: np.ndarray
    std: np.ndarray
    y_mean: float
    pca: Pca | None = None

    @classmethod
    def fit(cls, X, y, pca_dim=None):
        X = np.asarray(X, dtype=float)
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        pca = None
        if pca_dim is not None:
            pca = pca_fit((X - mean) / std, pca_dim)
        return cls(mean, std, float(np.mean(y)), pca)

    def transform(self, X):
        Z = (np.asarray(X, dtype=float) - self.mean) / self.std
        return Z if self.pca is None else self.pca.transform(Z)

    def transform_target(self, y):
        return np.asarray(y, dtype=float) - self.y_mean


def znorm_fit_apply(X_train, y_train, *others):
    """z-normalise features and centre targets with training statistics.

    ``others`` are ``(X, y)`` pairs. Returns the normaliser, the transformed
    training pair and the transformed other pairs.
    """
    norm = Normalizer.fit(X_train, y_train)
    train = (norm.transform(X_train), norm.transform_target(y_train))
    rest = [(norm.transform(X), norm.transform_target(y)) for X, y in others]
    return norm, train, rest


@dataclass(frozen=True)
class Dataset:
    """Preprocessed train/validation/test arrays plus their statistics."""

    X_train: np.ndarray
    y_train: np.ndarray
    X_val: np.ndarray
    y_val: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    normalizer: Normalizer
    feature_names: list = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.X_train.shape[1]


def prepare(X, y, indices: SplitIndices, pca_dim=None, feature_names=()) -> Dataset:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    tr, va, te = indices.train, indices.val, indices.test
    norm = Normalizer.fit(X[tr], y[tr], pca_dim)
    return Dataset(
        norm.transform(X[tr]), norm.transform_target(y[tr]),
        norm.transform(X[va]), norm.transform_target(y[va]),
        norm.transform(X[te]), norm.transform_target(y[te]),
        norm,
        list(feature_names) if pca_dim is None else [f"pc{i + 1}" for i in range(pca_dim)],
    )


@dataclass(frozen=True)
class DatasetEntry:
    name: str
    path: Path
    target: str
    categorical: tuple = ()
    drop: tuple = ()

    def load(self):
        """Encoded feature matrix, target vector and feature names."""
        table = load_csv(self.path, self.target, self.categorical, self.drop)
        X, names = one_hot(table)
        return X, table.y, names


def read_manifest(path) -> list[DatasetEntry]:
    """Parse a TOML manifest of ``[[dataset]]`` tables.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    with path.open("rb") as fh:
        doc = tomllib.load(fh)
    entries = []
    for item in doc.get("dataset", []):
        p = Path(item["path"])
        if not p.is_absolute():
            p = path.parent / p
        entries.append(
            DatasetEntry(
                item["name"], p, item["target"],
                tuple(item.get("categorical", ())), tuple(item.get("drop", ())),
            )
        )
    return entries
