"""Fuzzy c-means and k-means clustering used to seed rulebases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FcmResult:
    """Outcome of :func:`fcm`.

    ``memberships`` is c x N; each column sums to one.
    """

    centers: np.ndarray
    memberships: np.ndarray
    iterations: int
    objective: list = field(default_factory=list)


def _sq_dists(X, centers):
    d = np.sum(X * X, axis=1)[None, :] - 2.0 * centers @ X.T + np.sum(centers * centers, axis=1)[:, None]
    return np.maximum(d, 0.0)


def _check(X, c):
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or not np.all(np.isfinite(X)):
        raise ValueError("X must be a finite 2-D array")
    if c < 1:
        raise ValueError("cluster count must be at least 1")
    if c > X.shape[0]:
        raise ValueError(f"cannot form {c} clusters from {X.shape[0]} samples")
    return X


def fcm_memberships(X, centers, fuzzifier=2.0):
    """Membership matrix (c x N) of every sample given fixed centers.

    A sample that coincides with one or more centers gets membership split
    evenly over the coincident centers and zero elsewhere.
    """
    d2 = _sq_dists(X, centers)
    zero = d2 <= 1e-24
    hit = zero.any(axis=0)
    u = np.empty_like(d2)
    free = d2[:, ~hit]
    # ratios to the nearest center keep the powers in range for small fuzzifiers
    inv = (free / free.min(axis=0)) ** (-1.0 / (fuzzifier - 1.0))
    u[:, ~hit] = inv / inv.sum(axis=0)
    if hit.any():
        z = zero[:, hit].astype(float)
        u[:, hit] = z / z.sum(axis=0, keepdims=True)
    return u


def fcm_objective(X, centers, u, fuzzifier=2.0) -> float:
    return float(np.sum(u**fuzzifier * _sq_dists(X, centers)))


def fcm(X, c, fuzzifier=2.0, tol=1e-5, max_iter=100, rng=None) -> FcmResult:
    """Bezdek's fuzzy c-means.

    Memberships start as normalised uniform random draws; centers and
    memberships are then updated alternately until no center moves by more
    than ``tol`` (max-abs coordinate) or ``max_iter`` is hit.
    """
    X = _check(X, c)
    if fuzzifier <= 1.0:
        raise ValueError("fuzzifier must exceed 1")
    rng = np.random.default_rng(rng)
    u = rng.random((c, X.shape[0]))
    u /= u.sum(axis=0, keepdims=True)
    centers = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        um = u**fuzzifier
        new_centers = (um @ X) / um.sum(axis=1, keepdims=True)
        u = fcm_memberships(X, new_centers, fuzzifier)
        history.append(fcm_objective(X, new_centers, u, fuzzifier))
        shift = np.inf if centers is None else np.max(np.abs(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break
    return FcmResult(centers, u, it, history)


def _kmeans_pp(X, c, rng):
    n = X.shape[0]
    centers = [X[rng.integers(n)]]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for _ in range(1, c):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=d2 / total)
        centers.append(X[idx])
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return np.array(centers)


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    memberships: np.ndarray  # c x N one-hot
    iterations: int
    objective: list = field(default_factory=list)


def kmeans(X, c, tol=1e-5, max_iter=100, rng=None) -> KMeansResult:
    """Lloyd's algorithm with k-means++ seeding.

    An emptied cluster is reseeded at the point farthest from its current
    center.
    """
    X = _check(X, c)
    rng = np.random.default_rng(rng)
    centers = _kmeans_pp(X, c, rng)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        d2 = _sq_dists(X, centers)
        labels = np.argmin(d2, axis=0)
        nearest = d2[labels, np.arange(X.shape[0])]
        history.append(float(nearest.sum()))
        new_centers = centers.copy()
        for k in range(c):
            members = labels == k
            if members.any():
                new_centers[k] = X[members].mean(axis=0)
            else:
                far = int(np.argmax(nearest))
                new_centers[k] = X[far]
                nearest[far] = 0.0
        shift = np.max(np.abs(new_centers - centers))
        centers = new_centers
        if shift < tol:
            break
    d2 = _sq_dists(X, centers)
    labels = np.argmin(d2, axis=0)
    history.append(float(d2[labels, np.arange(X.shape[0])].sum()))
    u = np.zeros((c, X.shape[0]))
    u[labels, np.arange(X.shape[0])] = 1.0
    return KMeansResult(centers, labels, u, it, history)


def subsample_for_clustering(X, cap=10_000, rng=None, return_index=False):
    """Uniformly pick ``min(N, cap)`` distinct rows of ``X``."""
    if cap < 1:
        raise ValueError("cap must be at least 1")
    X = np.asarray(X)
    n = X.shape[0]
    if n <= cap:
        idx = np.arange(n)
    else:
        idx = np.sort(np.random.default_rng(rng).choice(n, size=cap, replace=False))
    return (X[idx], idx) if return_index else X[idx]
