"""Mini-batch gradient optimizers in the generic momentum / second-moment /
step-size framework, each with an optional Powerball gradient transform.

Every update first maps the raw gradient through ``sign(g) * |g|**gamma``
(identity when Powerball is off), then updates the accumulators of the chosen
variant and moves the parameters:

============  =============================  ===============================
variant       moments                        parameter step
============  =============================  ===============================
sgdm          m = b1*m + g                   theta -= alpha * m
adam          EMA of g and g**2              theta -= alpha * m^ / (sqrt(v^) + eps)
adabound      as adam                        per-element rate clipped to
                                             [eta_l(t), eta_u(t)], times m^
adabelief     EMA of g and (g - m)**2        as adam
============  =============================  ===============================

``m^``, ``v^`` are the bias-corrected moments (``debias=True``); with
``debias=False`` the raw accumulators are used.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

VARIANTS = ("sgdm", "adam", "adabound", "adabelief")


@dataclass(frozen=True)
class OptimizerConfig:
    variant: str = "adabelief"
    powerball: bool = True
    alpha: float = 0.01
    gamma: float = 0.5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    debias: bool = True

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown optimizer variant {self.variant!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ValueError("betas must lie in [0, 1)")
        if self.powerball and not 0 <= self.gamma < 1:
            raise ValueError("Powerball exponent must lie in [0, 1)")

    @property
    def exponent(self) -> float:
        return self.gamma if self.powerball else 1.0

    def with_(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)


@dataclass
class OptimizerState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n) -> "OptimizerState":
        return cls(np.zeros(n), np.zeros(n), 0)


def powerball(g, gamma):
    """Element-wise ``sign(g) * |g|**gamma``; gamma == 1 returns g unchanged."""
    g = np.asarray(g, dtype=float)
    if gamma == 1:
        return g.copy()
    return np.sign(g) * np.abs(g) ** gamma


def adabound_bounds(alpha, beta2, t):
    """Lower and upper step-size bounds at iteration ``t >= 1``."""
    k = (1.0 - beta2) * t
    return alpha * k / (k + 1.0), alpha * (k + 1.0) / k


def step(state: OptimizerState, theta, grad, cfg: OptimizerConfig, project=None):
    """One optimizer update; returns ``(new_state, new_theta)``.

    ``project`` maps the raw updated parameters onto the feasible set.
    """
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != theta.shape or state.m.shape != theta.shape:
        raise ValueError("parameter, gradient and state dimensions differ")
    if not np.all(np.isfinite(grad)):
        raise FloatingPointError("non-finite gradient")

    g = powerball(grad, cfg.exponent)
    t = state.t + 1
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.epsilon

    if cfg.variant == "sgdm":
        m = b1 * state.m + g
        v = state.v
        new_theta = theta - cfg.alpha * m
    else:
        m = b1 * state.m + (1.0 - b1) * g
        if cfg.variant == "adabelief":
            v = b2 * state.v + (1.0 - b2) * (g - m) ** 2
        else:
            v = b2 * state.v + (1.0 - b2) * g * g
        if cfg.debias:
            m_hat = m / (1.0 - b1**t)
            v_hat = v / (1.0 - b2**t)
        else:
            m_hat, v_hat = m, v
        rate = cfg.alpha / (np.sqrt(v_hat) + eps)
        if cfg.variant == "adabound":
            lo, hi = adabound_bounds(cfg.alpha, b2, t)
            rate = np.clip(rate, lo, hi)
        new_theta = theta - rate * m_hat

    if project is not None:
        new_theta = project(new_theta)
    return OptimizerState(m, v, t), new_theta


@dataclass
class Optimizer:
    """Stateful convenience wrapper around :func:`step`."""

    cfg: OptimizerConfig
    n_params: int
    project: object = None
    state: OptimizerState = field(init=False)

    def __post_init__(self):
        self.state = OptimizerState.zeros(self.n_params)

    def update(self, theta, grad):
        self.state, theta = step(self.state, theta, grad, self.cfg, self.project)
        return theta
