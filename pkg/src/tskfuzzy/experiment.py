"""Repeated-split experiments over a dataset manifest, and parameter sweeps.

Every (dataset, repeat) pair gets a seed derived from the base seed, the
dataset name and the repeat index only, so all pipelines and rule counts see
the same splits and the comparison between them is paired.
"""

from __future__ import annotations

import csv
import logging
import os
import re
import sys
import zlib
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import DataError, read_manifest, split
from .optim import OptimizerConfig
from .trainer import InfeasiblePipeline, TrainConfig, get_pipeline, run_pipeline

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger(__name__)

SCHEMA = "tskfuzzy-results/1"
WORKERS_ENV = "TSKFUZZY_WORKERS"
HYPER_KEYS = {"alpha", "p", "gamma", "lam", "batch_size", "n_iters"}


@dataclass(frozen=True)
class ExperimentConfig:
    manifest: Path
    pipelines: tuple = ("RR", "FCM-RDpA")
    rules: tuple = (16,)
    repeats: int = 8
    seed: int = 0
    output: Path = Path("results")
    hyper: dict = field(default_factory=dict)
    workers: int = 1
    datasets: tuple | None = None

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        for name in self.pipelines:
            get_pipeline(name)
        unknown = set(self.hyper) - HYPER_KEYS
        if unknown:
            raise ValueError(f"unknown hyperparameters: {sorted(unknown)}")
        clustering = any(not get_pipeline(p).ridge for p in self.pipelines)
        if clustering and any(r < 2 for r in self.rules):
            raise ValueError("rule counts must be at least 2")

    def train_config(self) -> TrainConfig:
        h = self.hyper
        opt = OptimizerConfig(alpha=h.get("alpha", 0.01), gamma=h.get("gamma", 0.5))
        return TrainConfig(
            n_iters=h.get("n_iters", 1000),
            batch_size=h.get("batch_size", 64),
            lam=h.get("lam", 0.05),
            p=h.get("p", 0.5),
            optimizer=opt,
        )

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


def load_config(path) -> ExperimentConfig:
    """Read an experiment TOML file; relative paths resolve against it."""
    path = Path(path)
    with path.open("rb") as fh:
        doc = tomllib.load(fh)
    base = path.parent

    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base / p

    return ExperimentConfig(
        manifest=resolve(doc["manifest"]),
        pipelines=tuple(doc.get("pipelines", ("RR", "FCM-RDpA"))),
        rules=tuple(int(r) for r in doc.get("rules", (16,))),
        repeats=int(doc.get("repeats", 8)),
        seed=int(doc.get("seed", 0)),
        output=resolve(doc.get("output", "results")),
        hyper=dict(doc.get("hyper", {})),
        workers=int(doc.get("workers", 1)),
        datasets=tuple(doc["datasets"]) if "datasets" in doc else None,
    )


def derive_seed(*parts) -> int:
    """Deterministic 32-bit seed from ints and strings."""
    words = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["schema", *header])
        for row in rows:
            w.writerow([SCHEMA, *(_fmt(v) for v in row)])


def _slug(text):
    return re.sub(r"[^A-Za-z0-9_.-]", "p", text)


@dataclass(frozen=True)
class Cell:
    dataset_idx: int
    dataset: str
    pipeline_idx: int
    pipeline: str
    n_rules: int | None
    repeat: int


def _run_cell(args):
    cell, X, y, names, cfg, base_seed = args
    split_seed = derive_seed(base_seed, cell.dataset, cell.repeat)
    idx = split(len(y), seed=split_seed)
    train_seed = derive_seed(base_seed, cell.dataset, cell.repeat, cell.n_rules or 0)
    run_cfg = cfg.with_(n_rules=cell.n_rules or cfg.n_rules, seed=train_seed)
    try:
        report = run_pipeline(cell.pipeline, X, y, idx, run_cfg, names)
    except InfeasiblePipeline as exc:
        return cell, None, str(exc)
    return cell, report, None


def _cells(cfg: ExperimentConfig, datasets):
    for di, entry in enumerate(datasets):
        for pi, name in enumerate(cfg.pipelines):
            rule_counts = [None] if get_pipeline(name).ridge else cfg.rules
            for R in rule_counts:
                for rep in range(cfg.repeats):
                    yield Cell(di, entry.name, pi, name, R, rep)


def worker_count(cfg: ExperimentConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else max(1, cfg.workers)


@dataclass
class ExperimentResult:
    output: Path
    rows: list
    aggregate: list
    failed_datasets: list
    skipped: list


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Train every (dataset, pipeline, rule count, repeat) cell and write CSVs.

    Writes ``results.csv`` (one row per run), ``timing.csv`` (wall-clock
    seconds per run), ``traces/*.csv`` (per-iteration curves), ``skipped.csv``
    and ``aggregate.csv`` (mean normalised test RMSE per pipeline and rule
    count) under ``cfg.output``.
    """
    entries = read_manifest(cfg.manifest)
    if cfg.datasets is not None:
        entries = [e for e in entries if e.name in cfg.datasets]
    train_cfg = cfg.train_config()
    loaded, failed = [], []
    for entry in entries:
        try:
            X, y, names = entry.load()
        except DataError as exc:
            log.error("dataset %s aborted: %s", entry.name, exc)
            failed.append((entry.name, str(exc)))
            continue
        loaded.append((entry, X, y, names))

    data = {e.name: (X, y, names) for e, X, y, names in loaded}
    cells = list(_cells(cfg, [e for e, *_ in loaded]))
    jobs = [(c, *data[c.dataset], train_cfg, cfg.seed) for c in cells]
    workers = worker_count(cfg)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, jobs, chunksize=1))
    else:
        outcomes = [_run_cell(j) for j in jobs]
    outcomes.sort(key=lambda o: (o[0].dataset_idx, o[0].pipeline_idx, o[0].n_rules or 0, o[0].repeat))

    out = Path(cfg.output)
    rows, timing, skipped = [], [], []
    for cell, rep, reason in outcomes:
        key = (cell.dataset, cell.pipeline, cell.n_rules, cell.repeat)
        if rep is None:
            if cell.repeat == 0:
                log.warning("skipping %s on %s with R=%s: %s", cell.pipeline, cell.dataset, cell.n_rules, reason)
            skipped.append((*key, reason))
            continue
        rows.append((*key, rep.test_rmse, rep.best_val_rmse, rep.best_iter, rep.n_params))
        timing.append((*key, rep.wall_time))
        if rep.val_rmse_trace.size:
            name = f"{_slug(cell.dataset)}__{_slug(cell.pipeline)}__R{cell.n_rules}__rep{cell.repeat}.csv"
            trace_rows = [
                (t + 1, float(loss), None if np.isnan(v) else float(v))
                for t, (loss, v) in enumerate(zip(rep.train_loss_trace, rep.val_rmse_trace))
            ]
            _write_csv(out / "traces" / name, ["iteration", "train_batch_loss", "val_rmse"], trace_rows)

    key_cols = ["dataset", "pipeline", "R", "repeat"]
    _write_csv(out / "results.csv", key_cols + ["test_rmse", "best_val_rmse", "best_iter", "n_params"], rows)
    _write_csv(out / "timing.csv", key_cols + ["wall_time"], timing)
    _write_csv(out / "skipped.csv", key_cols + ["reason"], skipped)
    aggregate = aggregate_rows(rows, [e.name for e, *_ in loaded])
    _write_csv(
        out / "aggregate.csv",
        ["pipeline", "R", "mean_normalized_test_rmse", "n_datasets"],
        aggregate,
    )
    if failed:
        _write_csv(out / "failed.csv", ["dataset", "reason"], failed)
    return ExperimentResult(out, rows, aggregate, failed, skipped)


def aggregate_rows(rows, dataset_order=None):
    """Mean over datasets of (mean test RMSE / mean ridge test RMSE).

    Cells missing for a dataset (skipped as infeasible) are left out of that
    pipeline's mean rather than imputed.
    """
    per = defaultdict(list)
    for dataset, pipeline, R, _, test, *_ in rows:
        per[(dataset, pipeline, R)].append(float(test))
    rr = {d: np.mean(v) for (d, p, R), v in per.items() if get_pipeline(p).ridge}
    groups = defaultdict(dict)
    for (d, p, R), v in per.items():
        if get_pipeline(p).ridge or d not in rr:
            continue
        groups[(p, R)][d] = np.mean(v) / rr[d]
    pipeline_order = {}
    for _, p, *_ in rows:
        pipeline_order.setdefault(p, len(pipeline_order))
    out = []
    for (p, R), ratios in sorted(groups.items(), key=lambda kv: (pipeline_order[kv[0][0]], kv[0][1])):
        out.append((p, R, float(np.mean(list(ratios.values()))), len(ratios)))
    return out


SWEEP_PARAMS = {"alpha": "alpha", "p": "p", "gamma": "gamma"}
DEFAULTS = {"alpha": 0.01, "p": 0.5, "gamma": 0.5}


def sweep(cfg: ExperimentConfig, param: str, values) -> Path:
    """Vary one of alpha, P or gamma with the other two at their defaults.

    Writes ``sweep_<param>.csv`` with one row per value, pipeline and rule
    count.
    """
    if param not in SWEEP_PARAMS:
        raise ValueError(f"can only sweep {sorted(SWEEP_PARAMS)}")
    rows = []
    failed = False
    for value in values:
        hyper = {k: v for k, v in cfg.hyper.items() if k not in DEFAULTS}
        hyper.update({k: v for k, v in DEFAULTS.items() if k != param})
        hyper[param] = float(value)
        sub = cfg.with_(hyper=hyper, output=Path(cfg.output) / f"sweep_{param}" / _fmt(float(value)))
        res = run_experiment(sub)
        failed = failed or bool(res.failed_datasets)
        for pipeline, R, score, n in res.aggregate:
            rows.append((param, float(value), pipeline, R, score, n))
    path = Path(cfg.output) / f"sweep_{param}.csv"
    _write_csv(path, ["param", "value", "pipeline", "R", "mean_normalized_test_rmse", "n_datasets"], rows)
    if failed:
        raise DataError("one or more datasets failed to load during the sweep")
    return path


def read_aggregate(results_dir):
    path = Path(results_dir) / "aggregate.csv"
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))
