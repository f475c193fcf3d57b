"""First-order TSK fuzzy regression model with Gaussian membership functions.

A model with R rules over M inputs stores

* ``centers`` (R x M) and ``sigmas`` (R x M) of the Gaussian MFs,
* ``weights`` (R x (M+1)) of the affine consequents, column 0 being the bias.

The flat parameter vector is laid out as all centers (row-major), then all
sigmas, then all weights, so it has ``R * (3M + 1)`` entries.

Rules can also share MFs (grid-partition rulebases).  Sharing is recorded in
``mf_index``: ``mf_index[r, m]`` names the MF of feature ``m`` used by rule
``r``.  Slots that name the same MF are tied; their gradients are summed and
every optimizer step copies the canonical value back to all aliases.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels

SIGMA_MIN = 1e-3
LAYOUT_VERSION = 1


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise FloatingPointError("non-finite value in model input or parameters")


def membership(x, c, sigma):
    """Gaussian membership grade ``exp(-(x - c)^2 / (2 sigma^2))``."""
    x, c, sigma = np.asarray(x, float), np.asarray(c, float), np.asarray(sigma, float)
    _check_finite(x, c, sigma)
    if np.any(sigma <= 0):
        raise ValueError("sigma must be positive")
    out = np.exp(-((x - c) ** 2) / (2.0 * sigma**2))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class TskModel:
    centers: np.ndarray
    sigmas: np.ndarray
    weights: np.ndarray
    mf_index: np.ndarray | None = field(default=None)

    def __post_init__(self):
        c = np.array(self.centers, dtype=float, ndmin=2)
        s = np.array(self.sigmas, dtype=float, ndmin=2)
        w = np.array(self.weights, dtype=float, ndmin=2)
        if c.shape != s.shape:
            raise ValueError(f"centers {c.shape} and sigmas {s.shape} differ")
        if w.shape[0] != c.shape[0]:
            raise ValueError("weights must have one row per rule")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "sigmas", s)
        object.__setattr__(self, "weights", w)
        if self.mf_index is not None:
            idx = np.array(self.mf_index, dtype=np.int64, ndmin=2)
            if idx.shape != c.shape:
                raise ValueError("mf_index must match the centers shape")
            object.__setattr__(self, "mf_index", idx)

    @property
    def n_rules(self) -> int:
        return self.centers.shape[0]

    @property
    def n_inputs(self) -> int:
        """Antecedent input dimension."""
        return self.centers.shape[1]

    @property
    def n_consequent(self) -> int:
        """Consequent input dimension (bias excluded)."""
        return self.weights.shape[1] - 1

    @property
    def n_params(self) -> int:
        return 2 * self.centers.size + self.weights.size

    @property
    def shared(self) -> bool:
        return self.mf_index is not None

    def __eq__(self, other):
        if not isinstance(other, TskModel):
            return NotImplemented
        same_idx = (self.mf_index is None and other.mf_index is None) or (
            self.mf_index is not None
            and other.mf_index is not None
            and np.array_equal(self.mf_index, other.mf_index)
        )
        return (
            same_idx
            and np.array_equal(self.centers, other.centers)
            and np.array_equal(self.sigmas, other.sigmas)
            and np.array_equal(self.weights, other.weights)
        )

    # -- flat parameter view -------------------------------------------------

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.centers.ravel(), self.sigmas.ravel(), self.weights.ravel()])

    @classmethod
    def unflatten(cls, theta, n_rules, n_inputs, n_consequent=None, mf_index=None):
        n_consequent = n_inputs if n_consequent is None else n_consequent
        theta = np.asarray(theta, dtype=float)
        k = n_rules * n_inputs
        expected = 2 * k + n_rules * (n_consequent + 1)
        if theta.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got {theta.shape}")
        return cls(
            theta[:k].reshape(n_rules, n_inputs).copy(),
            theta[k : 2 * k].reshape(n_rules, n_inputs).copy(),
            theta[2 * k :].reshape(n_rules, n_consequent + 1).copy(),
            mf_index=mf_index,
        )

    def with_params(self, theta) -> "TskModel":
        return TskModel.unflatten(
            theta, self.n_rules, self.n_inputs, self.n_consequent, mf_index=self.mf_index
        )

    # -- tying / feasibility ---------------------------------------------------

    def _tie_groups(self):
        """Yield (slots, canonical) groups of flat antecedent slots sharing an MF."""
        R, M = self.centers.shape
        for m in range(M):
            col = self.mf_index[:, m]
            for k in np.unique(col):
                rules = np.flatnonzero(col == k)
                if rules.size > 1:
                    yield rules * M + m

    def tie_gradient(self, grad):
        """Sum antecedent gradients over tied slots and share the sum."""
        if not self.shared:
            return grad
        grad = np.array(grad, dtype=float)
        k = self.centers.size
        for slots in self._tie_groups():
            for off in (0, k):
                grad[off + slots] = grad[off + slots].sum()
        return grad

    def project(self, theta):
        """Clamp sigmas to ``SIGMA_MIN`` and copy tied slots from their canonical rule."""
        theta = np.array(theta, dtype=float)
        k = self.centers.size
        sig = theta[k : 2 * k]
        np.maximum(sig, SIGMA_MIN, out=sig)
        if self.shared:
            for slots in self._tie_groups():
                for off in (0, k):
                    theta[off + slots] = theta[off + slots[0]]
        return theta

    # -- evaluation ------------------------------------------------------------

    def predict(self, X, mask=None):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        _check_finite(X)
        return kernels.forward(X, X, self.centers, self.sigmas, self.weights, mask)

    def objective(self, X, y, mask=None, lam=0.0):
        """Regularised batch loss and its (tied) gradient as a flat vector."""
        loss_value, grad = loss_and_gradient(self, X, y, mask, lam)
        return loss_value, self.tie_gradient(grad)


def firing_levels(model: TskModel, x, mask=None):
    """Raw rule firing levels for one input vector; dropped rules fire 0."""
    x = np.asarray(x, dtype=float)
    _check_finite(x)
    f = np.prod(membership(x[None, :], model.centers, model.sigmas), axis=1)
    if mask is not None:
        f = np.where(np.asarray(mask, dtype=bool), f, 0.0)
    return f


def predict(model, X, mask=None):
    """Model output for one sample (returns float) or a batch (returns array)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        m = None if mask is None else np.asarray(mask, dtype=bool)[None, :]
        return float(model.predict(X[None, :], m)[0])
    return model.predict(X, mask)


def loss_and_gradient(model: TskModel, X, y, mask=None, lam=0.0):
    """Loss ``0.5*sum(err^2) + 0.5*lam*sum(w[:, 1:]^2)`` and its raw gradient."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    _check_finite(X, y)
    pred, gc, gs, gw, _, _ = kernels.value_and_grad(
        X, X, y, model.centers, model.sigmas, model.weights, mask
    )
    w = model.weights[:, 1:]
    value = 0.5 * float(np.sum((pred - y) ** 2)) + 0.5 * lam * float(np.sum(w * w))
    gw = gw.copy()
    gw[:, 1:] += lam * w
    return value, np.concatenate([gc.ravel(), gs.ravel(), gw.ravel()])


def loss(model, X, y, mask=None, lam=0.0) -> float:
    if hasattr(model, "objective") and not isinstance(model, TskModel):
        return model.objective(X, y, mask, lam)[0]
    return loss_and_gradient(model, X, y, mask, lam)[0]


def gradient(model, X, y, mask=None, lam=0.0) -> np.ndarray:
    """Analytic gradient of :func:`loss` with respect to the flat parameters.

    Shared-MF slots are not tied here; see :meth:`TskModel.tie_gradient`.
    """
    if not isinstance(model, TskModel):
        return model.objective(X, y, mask, lam)[1]
    return loss_and_gradient(model, X, y, mask, lam)[1]


def sample_drop_mask(n, n_rules, p, rng) -> np.ndarray:
    """DropRule mask: each rule kept with probability ``p`` per sample.

    Rows in which every rule was dropped are redrawn until one survives.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("preservation rate must lie in (0, 1]")
    if p == 1.0:
        return np.ones((n, n_rules), dtype=bool)
    mask = rng.random((n, n_rules)) < p
    empty = ~mask.any(axis=1)
    while empty.any():
        mask[empty] = rng.random((int(empty.sum()), n_rules)) < p
        empty = ~mask.any(axis=1)
    return mask


# -- serialisation --------------------------------------------------------------


def _hex_matrix(a):
    return [[float(v).hex() for v in row] for row in np.atleast_2d(a)]


def _from_hex(rows):
    return np.array([[float.fromhex(v) for v in row] for row in rows], dtype=float)


def model_to_dict(model) -> dict:
    if not isinstance(model, TskModel):
        return model.to_dict()
    d = {
        "format": "tskfuzzy-model",
        "layout_version": LAYOUT_VERSION,
        "kind": "tsk",
        "n_rules": model.n_rules,
        "n_inputs": model.n_inputs,
        "n_consequent": model.n_consequent,
        "centers": _hex_matrix(model.centers),
        "sigmas": _hex_matrix(model.sigmas),
        "weights": _hex_matrix(model.weights),
    }
    if model.shared:
        d["mf_index"] = model.mf_index.tolist()
    return d


def model_from_dict(d: dict):
    if d.get("format") != "tskfuzzy-model":
        raise ValueError("not a tskfuzzy model file")
    if d.get("layout_version") != LAYOUT_VERSION:
        raise ValueError(f"unsupported layout version {d.get('layout_version')}")
    if d["kind"] == "augmented":
        from .augment import AugmentedModel

        return AugmentedModel.from_dict(d)
    model = TskModel(
        _from_hex(d["centers"]), _from_hex(d["sigmas"]), _from_hex(d["weights"]),
        mf_index=d.get("mf_index"),
    )
    if (model.n_rules, model.n_inputs, model.n_consequent) != (
        d["n_rules"], d["n_inputs"], d["n_consequent"]
    ):
        raise ValueError("model file dimensions disagree with its matrices")
    return model


def save_model(model, path) -> None:
    """Write a model as JSON with hex-encoded floats (exact round trip)."""
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1) + "\n")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
