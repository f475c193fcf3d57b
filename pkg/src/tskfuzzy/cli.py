"""Command-line entry point: ``tskfuzzy {run,sweep,validate-gradients,report}``."""

from __future__ import annotations

import argparse
import logging
import sys

from . import kernels
from .data import DataError
from .experiment import load_config, read_aggregate, run_experiment, sweep
from .gradcheck import run_suite


def _cmd_run(args):
    cfg = load_config(args.config)
    if args.output:
        cfg = cfg.with_(output=args.output)
    res = run_experiment(cfg)
    print(f"wrote {len(res.rows)} result rows to {res.output}")
    _print_aggregate([dict(pipeline=p, R=R, mean_normalized_test_rmse=s, n_datasets=n) for p, R, s, n in res.aggregate])
    for name, reason in res.failed_datasets:
        print(f"dataset {name} aborted: {reason}", file=sys.stderr)
    return 1 if res.failed_datasets else 0


def _cmd_sweep(args):
    cfg = load_config(args.config)
    if args.output:
        cfg = cfg.with_(output=args.output)
    try:
        path = sweep(cfg, args.param, args.values)
    except DataError as exc:
        print(exc, file=sys.stderr)
        return 1
    print(f"wrote {path}")
    return 0


def _cmd_validate(args):
    results = run_suite(args.configs, args.seed)
    worst_rel = max(r.max_rel_error for r in results)
    worst_abs = max(r.max_abs_error_small for r in results)
    bad = [r for r in results if not r.passed]
    for r in bad:
        print(f"FAIL {r.label}: rel={r.max_rel_error:.3e} abs={r.max_abs_error_small:.3e}")
    print(
        f"backend={kernels.BACKEND} configs={len(results)} "
        f"max_rel_error={worst_rel:.3e} max_abs_error_small={worst_abs:.3e} "
        f"{'PASS' if not bad else 'FAIL'}"
    )
    return 1 if bad else 0


def _print_aggregate(rows):
    if not rows:
        print("(no aggregate rows)")
        return
    print(f"{'pipeline':<16} {'R':>4} {'norm. RMSE':>11} {'datasets':>9}")
    for r in rows:
        print(
            f"{r['pipeline']:<16} {str(r['R']):>4} "
            f"{float(r['mean_normalized_test_rmse']):>11.4f} {str(r['n_datasets']):>9}"
        )


def _cmd_report(args):
    try:
        rows = read_aggregate(args.results)
    except FileNotFoundError:
        print(f"no aggregate.csv under {args.results}", file=sys.stderr)
        return 1
    _print_aggregate(rows)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="tskfuzzy", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--output", help="override the output directory")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="sweep alpha, p or gamma")
    p.add_argument("config")
    p.add_argument("--param", required=True, choices=["alpha", "p", "gamma"])
    p.add_argument("--values", required=True, nargs="+", type=float)
    p.add_argument("--output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate-gradients", help="finite-difference gradient suite")
    p.add_argument("--configs", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("report", help="print the aggregate table of a results directory")
    p.add_argument("results")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
