"""Central finite-difference checks of the analytic loss gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .augment import MODES, AugmentSpec, augment_model
from .model import TskModel, sample_drop_mask


def central_difference(f, theta, h=1e-6):
    """Gradient of scalar ``f`` at ``theta`` by central differences."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        out[i] = (f(up) - f(down)) / (2.0 * h)
    return out


@dataclass
class GradCheck:
    max_rel_error: float
    max_abs_error_small: float
    n_params: int
    passed: bool
    label: str = ""


def compare(analytic, numeric, rtol=1e-4, atol_small=1e-7, small=1e-3) -> GradCheck:
    """Relative error where ``|numeric| >= small``; absolute error elsewhere."""
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    diff = np.abs(analytic - numeric)
    big = np.abs(numeric) >= small
    rel = float(np.max(diff[big] / np.abs(numeric[big]))) if big.any() else 0.0
    ab = float(np.max(diff[~big])) if (~big).any() else 0.0
    return GradCheck(rel, ab, analytic.size, rel <= rtol and ab <= atol_small)


def check_model(model, X, y, mask, lam, h=1e-6) -> GradCheck:
    theta = model.flatten()
    _, analytic = model.objective(X, y, mask, lam)

    def f(th):
        return model.with_params(th).objective(X, y, mask, lam)[0]

    return compare(analytic, central_difference(f, theta, h))


def random_case(rng, augment_mode="none", max_inputs=8, max_rules=16, batch=8):
    """Random well-scaled (model, X, y, mask, lam) configuration."""
    M = int(rng.integers(1, max_inputs + 1))
    R = int(rng.integers(1, max_rules + 1))
    model = TskModel(
        rng.normal(size=(R, M)),
        rng.uniform(0.5, 2.0, (R, M)),
        rng.normal(size=(R, M + 1)),
    )
    if augment_mode != "none":
        model = augment_model(model, AugmentSpec(augment_mode, int(rng.integers(1, 4))), rng)
    X = rng.normal(size=(batch, M))
    y = rng.normal(size=batch)
    mask = sample_drop_mask(batch, R, float(rng.choice([1.0, 0.5, 0.7])), rng)
    if rng.random() < 0.25:
        mask = None
    lam = float(rng.choice([0.0, 0.05, 0.5]))
    return model, X, y, mask, lam


def run_suite(n_configs=100, seed=0, modes=MODES):
    """Check ``n_configs`` random cases, cycling through augmentation modes."""
    rng = np.random.default_rng(seed)
    results = []
    for i in range(n_configs):
        mode = modes[i % len(modes)]
        model, X, y, mask, lam = random_case(rng, mode)
        res = check_model(model, X, y, mask, lam)
        res.label = f"case {i}: mode={mode} R={model.n_rules} params={res.n_params}"
        results.append(res)
    return results
