"""Mini-batch training of TSK rulebases with DropRule and validation-based
checkpoint selection, the ridge-regression baseline, and the named
pipelines that combine preprocessing, initialisation and optimizer."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .augment import AugmentSpec, augment_model
from .data import Dataset, SplitIndices, prepare
from .initialization import RulebaseSpec, initialize
from .model import sample_drop_mask
from .optim import Optimizer, OptimizerConfig


class InfeasiblePipeline(ValueError):
    """The pipeline cannot run on this dataset (e.g. PCA to more dims than features)."""


@dataclass(frozen=True)
class TrainConfig:
    n_rules: int = 16
    n_iters: int = 1000
    batch_size: int = 64
    lam: float = 0.05
    p: float = 0.5
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    init: str = "fcm"
    augment: str = "none"
    seed: int = 0
    val_stride: int = 1
    cluster_cap: int = 10_000

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError("need at least one iteration")
        if self.batch_size < 1:
            raise ValueError("batch size must be positive")
        if not 0 < self.p <= 1:
            raise ValueError("DropRule preservation rate must lie in (0, 1]")
        if self.lam < 0:
            raise ValueError("regularisation coefficient must be non-negative")
        if self.val_stride < 1:
            raise ValueError("validation stride must be positive")

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


@dataclass
class TrainReport:
    """Outcome of one training run.

    ``best_iter`` counts from 1 (the model after the first update); it is 0
    only for closed-form baselines with no iterations.
    """

    val_rmse_trace: np.ndarray
    train_loss_trace: np.ndarray
    best_iter: int
    best_model: object
    best_val_rmse: float
    test_rmse: float
    wall_time: float
    n_params: int = 0


def rmse(y_true, y_pred) -> float:
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    return float(np.sqrt(np.mean((y_true - y_pred) ** 2)))


def normalized_rmse(alg_rmse, rr_rmse):
    """Per-dataset ratio of an algorithm's RMSE to the ridge baseline's."""
    return np.asarray(alg_rmse, dtype=float) / np.asarray(rr_rmse, dtype=float)


def mean_normalized_rmse(alg_rmse, rr_rmse) -> float:
    return float(np.mean(normalized_rmse(alg_rmse, rr_rmse)))


@dataclass(frozen=True)
class RidgeModel:
    coef: np.ndarray
    intercept: float

    def predict(self, X):
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def ridge(X, y, lam=0.05) -> RidgeModel:
    """Closed-form ridge regression with an unpenalised intercept."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    x_mean, y_mean = X.mean(axis=0), y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc + lam * np.eye(X.shape[1])
    coef = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    return RidgeModel(coef, float(y_mean - x_mean @ coef))


def build_model(ds: Dataset, cfg: TrainConfig, rng):
    M = ds.n_features
    if cfg.init == "grid":
        spec = RulebaseSpec.shared_grid((2,) * M)
        if spec.rule_count != cfg.n_rules:
            raise ValueError(f"a 2-MF grid over {M} features has {spec.rule_count} rules, not {cfg.n_rules}")
    else:
        spec = RulebaseSpec.independent(cfg.n_rules)
    model = initialize(cfg.init, ds.X_train, ds.y_train, spec, rng=rng, cap=cfg.cluster_cap)
    if cfg.augment != "none":
        model = augment_model(model, AugmentSpec.for_rules(cfg.augment, cfg.n_rules), rng)
    return model


def train(ds: Dataset, cfg: TrainConfig, model=None, callback=None) -> TrainReport:
    """Run mini-batch training and return the best-validation snapshot.

    Each iteration draws ``batch_size`` distinct training samples (the whole
    set if smaller), samples a DropRule mask, takes one optimizer step and,
    every ``val_stride`` iterations and at the last one, scores the
    validation split with all rules active.  ``model`` overrides the
    configured initialisation; ``callback(t, theta)`` sees the parameters
    after every update.
    """
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    if model is None:
        model = build_model(ds, cfg, rng)
    theta = model.flatten()
    opt = Optimizer(cfg.optimizer, theta.size, project=model.project)
    n_train = ds.X_train.shape[0]
    n_batch = min(cfg.batch_size, n_train)

    val_trace = np.full(cfg.n_iters, np.nan)
    loss_trace = np.empty(cfg.n_iters)
    best_val, best_iter, best_theta = math.inf, 0, theta
    for t in range(cfg.n_iters):
        if n_batch == n_train:
            idx = np.arange(n_train)
        else:
            idx = rng.choice(n_train, size=n_batch, replace=False)
        mask = sample_drop_mask(n_batch, model.n_rules, cfg.p, rng)
        current = model.with_params(theta)
        loss_trace[t], grad = current.objective(ds.X_train[idx], ds.y_train[idx], mask, cfg.lam)
        theta = opt.update(theta, grad)
        if callback is not None:
            callback(t + 1, theta)

        if (t + 1) % cfg.val_stride == 0 or t + 1 == cfg.n_iters:
            score = rmse(ds.y_val, model.with_params(theta).predict(ds.X_val))
            if not math.isfinite(score):
                raise FloatingPointError(f"validation RMSE became {score} at iteration {t + 1}")
            val_trace[t] = score
            if score < best_val:
                best_val, best_iter, best_theta = score, t + 1, theta

    best = model.with_params(best_theta)
    test = rmse(ds.y_test, best.predict(ds.X_test))
    return TrainReport(
        val_trace, loss_trace, best_iter, best, best_val, test,
        time.perf_counter() - start, best.n_params,
    )


def train_ridge(ds: Dataset, lam=0.05) -> TrainReport:
    start = time.perf_counter()
    model = ridge(ds.X_train, ds.y_train, lam)
    val = rmse(ds.y_val, model.predict(ds.X_val))
    test = rmse(ds.y_test, model.predict(ds.X_test))
    return TrainReport(
        np.empty(0), np.empty(0), 0, model, val, test,
        time.perf_counter() - start, model.coef.size + 1,
    )


# -- pipelines --------------------------------------------------------------------


@dataclass(frozen=True)
class Pipeline:
    name: str
    pca: bool = False
    init: str = "fcm"
    variant: str = "adabelief"
    powerball: bool = True
    augment: str = "none"
    ridge: bool = False


_RDA = dict(variant="adabound", powerball=False)

PIPELINES = {
    p.name: p
    for p in [
        Pipeline("RR", ridge=True),
        Pipeline("PCA-GP-RDA", pca=True, init="grid", **_RDA),
        Pipeline("PCA-GP-RDpA", pca=True, init="grid"),
        Pipeline("PCA-FCM-RDA", pca=True, **_RDA),
        Pipeline("PCA-FCM-RDpA", pca=True),
        Pipeline("FCM-RDA", **_RDA),
        Pipeline("FCM-RDpA"),
        Pipeline("rand-RDpA", init="random"),
        Pipeline("kM-RDpA", init="kmeans"),
        Pipeline("RD-pAdaBound", variant="adabound"),
        Pipeline("RD-SGDM", variant="sgdm", powerball=False),
        Pipeline("RD-pSGDM", variant="sgdm"),
        Pipeline("RD-Adam", variant="adam", powerball=False),
        Pipeline("RD-pAdam", variant="adam"),
        Pipeline("RD-AdaBelief", variant="adabelief", powerball=False),
        Pipeline("FCM-RDpA'", augment="antecedent"),
        Pipeline("FCM-RDpA''", augment="shared"),
        Pipeline("FCM-RDpAx", augment="split"),
    ]
}
ALIASES = {
    "RDA": "FCM-RDA",
    "RDpA": "FCM-RDpA",
    "FCM-RDpA-prime": "FCM-RDpA'",
    "FCM-RDpA-dprime": "FCM-RDpA''",
}


def get_pipeline(name) -> Pipeline:
    try:
        return PIPELINES[ALIASES.get(name, name)]
    except KeyError:
        raise ValueError(f"unknown pipeline {name!r}") from None


def pca_dim(n_rules) -> int:
    d = math.log2(n_rules)
    if d != int(d) or d < 1:
        raise InfeasiblePipeline(f"PCA pipelines need a power-of-two rule count, got {n_rules}")
    return int(d)


def run_pipeline(name, X, y, indices: SplitIndices, cfg: TrainConfig, feature_names=()):
    """Preprocess one split for the named pipeline and train it.

    ``X``/``y`` are the encoded but unnormalised data; ``cfg`` supplies the
    rule count, iteration budget, seed and hyperparameters, while the
    pipeline fixes PCA, initialisation, optimizer variant and augmentation.
    """
    pipe = get_pipeline(name)
    if pipe.ridge:
        return train_ridge(prepare(X, y, indices, None, feature_names), cfg.lam)
    d = None
    if pipe.pca:
        d = pca_dim(cfg.n_rules)
        if d > np.asarray(X).shape[1]:
            raise InfeasiblePipeline(
                f"{name}: cannot reduce {np.asarray(X).shape[1]} features to {d}"
            )
    ds = prepare(X, y, indices, d, feature_names)
    opt = cfg.optimizer.with_(variant=pipe.variant, powerball=pipe.powerball)
    run_cfg = cfg.with_(optimizer=opt, init=pipe.init, augment=pipe.augment)
    return train(ds, run_cfg)
