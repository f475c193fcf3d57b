"""Rule inputs extended with trainable linear projections of the features.

For an input ``x`` of length M and projection dimension d the modes are

``none``        antecedent ``x``,            consequent ``x``
``antecedent``  antecedent ``[x @ P, x]``,   consequent ``x``
``shared``      antecedent ``[x @ P, x]``,   consequent ``[x @ P, x]``
``split``       antecedent ``[x @ P, x]``,   consequent ``[x @ Q, x]``

``P`` therefore learns from the antecedent path only in ``antecedent`` and
``split`` modes and from both paths in ``shared`` mode; ``Q`` learns from the
consequent path only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import LAYOUT_VERSION, TskModel, _check_finite, _from_hex, _hex_matrix

MODES = ("none", "antecedent", "shared", "split")


def projection_dim(n_rules: int) -> int:
    return max(1, int(round(math.log2(n_rules))))


@dataclass(frozen=True)
class AugmentSpec:
    mode: str = "split"
    proj_dim: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown augmentation mode {self.mode!r}")
        if self.proj_dim < 1:
            raise ValueError("projection dimension must be at least 1")

    @classmethod
    def for_rules(cls, mode, n_rules):
        return cls(mode, projection_dim(n_rules))

    def antecedent_dim(self, n_features):
        return n_features if self.mode == "none" else n_features + self.proj_dim

    def consequent_dim(self, n_features):
        return n_features + self.proj_dim if self.mode in ("shared", "split") else n_features

    def n_projection_params(self, n_features):
        count = {"none": 0, "antecedent": 1, "shared": 1, "split": 2}[self.mode]
        return count * n_features * self.proj_dim


@dataclass(frozen=True, eq=False)
class AugmentedModel:
    """A TSK rulebase fed by augmented inputs.

    ``proj_a`` feeds the antecedents (and, in ``shared`` mode, the
    consequents); ``proj_c`` feeds the consequents in ``split`` mode.
    """

    tsk: TskModel
    spec: AugmentSpec
    n_features: int
    proj_a: np.ndarray | None = None
    proj_c: np.ndarray | None = None

    def __post_init__(self):
        M, d, mode = self.n_features, self.spec.proj_dim, self.spec.mode
        want_a = mode != "none"
        want_c = mode == "split"
        for name, want in (("proj_a", want_a), ("proj_c", want_c)):
            p = getattr(self, name)
            if want != (p is not None):
                raise ValueError(f"{name} presence does not match mode {mode!r}")
            if p is not None:
                p = np.array(p, dtype=float, ndmin=2)
                if p.shape != (M, d):
                    raise ValueError(f"{name} must be {M}x{d}")
                object.__setattr__(self, name, p)
        if self.tsk.n_inputs != self.spec.antecedent_dim(M):
            raise ValueError("rulebase antecedent dimension does not match the augmentation layout")
        if self.tsk.n_consequent != self.spec.consequent_dim(M):
            raise ValueError("rulebase consequent dimension does not match the augmentation layout")

    @property
    def n_rules(self):
        return self.tsk.n_rules

    @property
    def n_params(self):
        return self.tsk.n_params + self.spec.n_projection_params(self.n_features)

    def __eq__(self, other):
        if not isinstance(other, AugmentedModel):
            return NotImplemented

        def same(a, b):
            return (a is None and b is None) or (a is not None and b is not None and np.array_equal(a, b))

        return (
            self.spec == other.spec
            and self.n_features == other.n_features
            and self.tsk == other.tsk
            and same(self.proj_a, other.proj_a)
            and same(self.proj_c, other.proj_c)
        )

    def flatten(self):
        parts = [self.tsk.flatten()]
        parts += [p.ravel() for p in (self.proj_a, self.proj_c) if p is not None]
        return np.concatenate(parts)

    def with_params(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got {theta.shape}")
        k = self.tsk.n_params
        tsk = self.tsk.with_params(theta[:k])
        size = self.n_features * self.spec.proj_dim
        shape = (self.n_features, self.spec.proj_dim)
        pa = theta[k : k + size].reshape(shape).copy() if self.proj_a is not None else None
        pc = theta[k + size : k + 2 * size].reshape(shape).copy() if self.proj_c is not None else None
        return AugmentedModel(tsk, self.spec, self.n_features, pa, pc)

    def project(self, theta):
        theta = np.array(theta, dtype=float)
        k = self.tsk.n_params
        theta[:k] = self.tsk.project(theta[:k])
        return theta

    def inputs(self, X):
        """Antecedent and consequent input matrices for a batch."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        mode = self.spec.mode
        if mode == "none":
            return X, X
        A = np.hstack([X @ self.proj_a, X])
        if mode == "antecedent":
            return A, X
        if mode == "shared":
            return A, A
        return A, np.hstack([X @ self.proj_c, X])

    def predict(self, X, mask=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_finite(X)
        A, Z = self.inputs(X)
        t = self.tsk
        return kernels.forward(A, Z, t.centers, t.sigmas, t.weights, mask)

    def objective(self, X, y, mask=None, lam=0.0):
        """Regularised loss and its gradient over the augmented parameter vector.

        The penalty covers every consequent slope, including those on
        projected inputs.
        """
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] == 0:
            raise ValueError("empty batch")
        _check_finite(X, y)
        A, Z = self.inputs(X)
        t = self.tsk
        pred, gc, gs, gw, gA, gZ = kernels.value_and_grad(
            A, Z, y, t.centers, t.sigmas, t.weights, mask, input_grads=self.spec.mode != "none"
        )
        w = t.weights[:, 1:]
        value = 0.5 * float(np.sum((pred - y) ** 2)) + 0.5 * lam * float(np.sum(w * w))
        gw = gw.copy()
        gw[:, 1:] += lam * w
        parts = [gc.ravel(), gs.ravel(), gw.ravel()]
        parts += [g.ravel() for g in augment_gradient(self.spec, X, gA, gZ) if g is not None]
        return value, np.concatenate(parts)

    def to_dict(self):
        d = {
            "format": "tskfuzzy-model",
            "layout_version": LAYOUT_VERSION,
            "kind": "augmented",
            "mode": self.spec.mode,
            "proj_dim": self.spec.proj_dim,
            "n_features": self.n_features,
            "n_rules": self.tsk.n_rules,
            "n_inputs": self.tsk.n_inputs,
            "n_consequent": self.tsk.n_consequent,
            "centers": _hex_matrix(self.tsk.centers),
            "sigmas": _hex_matrix(self.tsk.sigmas),
            "weights": _hex_matrix(self.tsk.weights),
        }
        if self.proj_a is not None:
            d["proj_a"] = _hex_matrix(self.proj_a)
        if self.proj_c is not None:
            d["proj_c"] = _hex_matrix(self.proj_c)
        return d

    @classmethod
    def from_dict(cls, d):
        tsk = TskModel(_from_hex(d["centers"]), _from_hex(d["sigmas"]), _from_hex(d["weights"]))
        pa = _from_hex(d["proj_a"]) if "proj_a" in d else None
        pc = _from_hex(d["proj_c"]) if "proj_c" in d else None
        return cls(tsk, AugmentSpec(d["mode"], d["proj_dim"]), d["n_features"], pa, pc)


def augment_forward(model: AugmentedModel, x):
    """Antecedent and consequent input vectors for a single sample."""
    A, Z = model.inputs(np.asarray(x, dtype=float)[None, :])
    return A[0], Z[0]


def augment_gradient(spec: AugmentSpec, X, g_antecedent, g_consequent):
    """Chain the input-space gradients back onto the projection matrices.

    Returns ``(grad_proj_a, grad_proj_c)``, None where the mode has no such
    matrix.
    """
    d = spec.proj_dim
    if spec.mode == "none":
        return None, None
    ga = X.T @ g_antecedent[:, :d]
    if spec.mode == "antecedent":
        return ga, None
    gc = X.T @ g_consequent[:, :d]
    if spec.mode == "shared":
        return ga + gc, None
    return ga, gc


def augment_model(base: TskModel, spec: AugmentSpec, rng=None) -> AugmentedModel:
    """Extend a rulebase over the raw features with projected input slots.

    Projection entries are uniform in ``[-1/sqrt(M), 1/sqrt(M)]``; new
    antecedent slots get center 0 and width 1, new consequent slopes 0.
    """
    if base.shared:
        raise ValueError("feature augmentation needs an independent-MF rulebase")
    M, d, R = base.n_inputs, spec.proj_dim, base.n_rules
    if spec.mode == "none":
        return AugmentedModel(base, spec, M)
    rng = np.random.default_rng(rng)
    bound = 1.0 / math.sqrt(M)
    pa = rng.uniform(-bound, bound, (M, d))
    pc = rng.uniform(-bound, bound, (M, d)) if spec.mode == "split" else None
    centers = np.hstack([np.zeros((R, d)), base.centers])
    sigmas = np.hstack([np.ones((R, d)), base.sigmas])
    weights = base.weights
    if spec.mode in ("shared", "split"):
        weights = np.hstack([weights[:, :1], np.zeros((R, d)), weights[:, 1:]])
    return AugmentedModel(TskModel(centers, sigmas, weights), spec, M, pa, pc)
