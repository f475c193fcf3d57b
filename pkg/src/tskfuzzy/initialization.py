"""Building initial rulebases from data.

Four strategies are available: fuzzy c-means, k-means, uniform random draws,
and grid partition with shared MFs.  Clustering-based rulebases take their
MF centers from the cluster centers, their widths from the membership
weighted spread of the samples, and their consequent biases from the
membership weighted target mean; consequent slopes start at zero.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .clustering import fcm, kmeans, subsample_for_clustering
from .model import SIGMA_MIN, TskModel


@dataclass(frozen=True)
class RulebaseSpec:
    """Rulebase structure: ``n_rules`` independent rules, or a grid of shared MFs."""

    n_rules: int | None = None
    mf_counts: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.n_rules is None) == (self.mf_counts is None):
            raise ValueError("give exactly one of n_rules or mf_counts")
        if self.mf_counts is not None:
            if any(k < 1 for k in self.mf_counts):
                raise ValueError("every feature needs at least one MF")
            object.__setattr__(self, "mf_counts", tuple(int(k) for k in self.mf_counts))
        elif self.n_rules < 1:
            raise ValueError("need at least one rule")

    @classmethod
    def independent(cls, n_rules):
        return cls(n_rules=int(n_rules))

    @classmethod
    def shared_grid(cls, mf_counts):
        return cls(mf_counts=tuple(mf_counts))

    @property
    def shared(self) -> bool:
        return self.mf_counts is not None

    @property
    def rule_count(self) -> int:
        return int(np.prod(self.mf_counts)) if self.shared else self.n_rules


def model_from_memberships(X, y, centers, u) -> TskModel:
    """Rulebase whose rule ``r`` is summarised from membership row ``u[r]``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    mass = u.sum(axis=1)
    safe = np.where(mass > 0, mass, 1.0)
    var = np.einsum("rn,rnm->rm", u, (X[None, :, :] - centers[:, None, :]) ** 2) / safe[:, None]
    sigmas = np.maximum(np.sqrt(var), SIGMA_MIN)
    bias = np.where(mass > 0, (u @ y) / safe, y.mean())
    weights = np.zeros((centers.shape[0], X.shape[1] + 1))
    weights[:, 0] = bias
    return TskModel(centers.copy(), sigmas, weights)


def _clustering_sample(X, y, n_rules, cap, rng):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] < n_rules:
        raise ValueError(f"{X.shape[0]} samples cannot seed {n_rules} rules")
    Xs, idx = subsample_for_clustering(X, cap, rng, return_index=True)
    return Xs, y[idx]


def init_fcm(X, y, n_rules, fuzzifier=2.0, tol=1e-5, max_iter=100, cap=10_000, rng=None):
    rng = np.random.default_rng(rng)
    Xs, ys = _clustering_sample(X, y, n_rules, cap, rng)
    res = fcm(Xs, n_rules, fuzzifier=fuzzifier, tol=tol, max_iter=max_iter, rng=rng)
    return model_from_memberships(Xs, ys, res.centers, res.memberships)


def init_kmeans(X, y, n_rules, tol=1e-5, max_iter=100, cap=10_000, rng=None):
    rng = np.random.default_rng(rng)
    Xs, ys = _clustering_sample(X, y, n_rules, cap, rng)
    res = kmeans(Xs, n_rules, tol=tol, max_iter=max_iter, rng=rng)
    return model_from_memberships(Xs, ys, res.centers, res.memberships)


def init_random(n_inputs, n_rules, rng=None) -> TskModel:
    """Centers and consequents uniform in [0, 1], widths uniform in [0, 5]."""
    rng = np.random.default_rng(rng)
    centers = rng.uniform(0.0, 1.0, (n_rules, n_inputs))
    sigmas = np.maximum(rng.uniform(0.0, 5.0, (n_rules, n_inputs)), SIGMA_MIN)
    weights = rng.uniform(0.0, 1.0, (n_rules, n_inputs + 1))
    return TskModel(centers, sigmas, weights)


def grid_mfs(column, k):
    """Evenly spaced MF centers over the column range and their common width."""
    lo, hi = float(np.min(column)), float(np.max(column))
    if hi <= lo or k == 1:
        width = SIGMA_MIN if hi <= lo else (hi - lo) / 2.0
        return np.full(k, (lo + hi) / 2.0 if k == 1 else lo), max(width, SIGMA_MIN)
    return np.linspace(lo, hi, k), max((hi - lo) / (k - 1) / 2.0, SIGMA_MIN)


def init_grid(X, y, spec) -> TskModel:
    """Grid-partition rulebase enumerating every combination of per-feature MFs."""
    X = np.asarray(X, dtype=float)
    counts = spec.mf_counts if isinstance(spec, RulebaseSpec) else tuple(spec)
    if len(counts) != X.shape[1]:
        raise ValueError("need one MF count per feature")
    per_feature = [grid_mfs(X[:, m], k) for m, k in enumerate(counts)]
    mf_index = np.array(list(itertools.product(*(range(k) for k in counts))), dtype=np.int64)
    mf_index = mf_index.reshape(-1, len(counts))
    R, M = mf_index.shape
    centers = np.empty((R, M))
    sigmas = np.empty((R, M))
    for m, (c, s) in enumerate(per_feature):
        centers[:, m] = c[mf_index[:, m]]
        sigmas[:, m] = s
    weights = np.zeros((R, M + 1))
    weights[:, 0] = np.mean(y)
    return TskModel(centers, sigmas, weights, mf_index=mf_index)


def initialize(strategy, X, y, spec, rng=None, cap=10_000) -> TskModel:
    """Dispatch on strategy name: ``fcm``, ``kmeans``, ``random`` or ``grid``."""
    if strategy == "grid":
        if not isinstance(spec, RulebaseSpec) or not spec.shared:
            raise ValueError("grid initialisation needs a shared-grid spec")
        return init_grid(X, y, spec)
    n_rules = spec.rule_count if isinstance(spec, RulebaseSpec) else int(spec)
    if strategy == "fcm":
        return init_fcm(X, y, n_rules, cap=cap, rng=rng)
    if strategy == "kmeans":
        return init_kmeans(X, y, n_rules, cap=cap, rng=rng)
    if strategy == "random":
        return init_random(np.asarray(X).shape[1], n_rules, rng)
    raise ValueError(f"unknown initialisation strategy {strategy!r}")
