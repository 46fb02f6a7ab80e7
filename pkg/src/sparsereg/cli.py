"""Command-line front end.

Subcommands: solve one instance from CSV inputs, generate synthetic
data, run a sweep spec into a results CSV, cross-validate (k, gamma),
and render report figures from a results CSV.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .datagen import SyntheticSpec, generate
from .experiment import SweepSpec, run_experiment
from .features import expand_features
from .metrics import cross_validate_k
from .oracle import Dataset
from .solver import SolveConfig, solve_cardinality, solve_penalized


def _solve_config(args) -> SolveConfig:
    kwargs = {}
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.time_limit is not None:
        kwargs["time_limit"] = args.time_limit
    kwargs["mode"] = {"single": "single_tree", "multi": "multi_tree"}[args.mode]
    kwargs["warm_start"] = {
        "dual": "dual_relaxation",
        "lasso": "lasso",
        "none": "none",
    }[args.warm]
    return SolveConfig(**kwargs)


def cmd_solve(args) -> int:
    dataset = io.load_dataset(args.x, args.y)
    feature_names = None
    if args.expand_features:
        expansion = expand_features(dataset.X)
        dataset = Dataset(X=expansion.psi_x, Y=dataset.Y)
        feature_names = expansion.names
    config = _solve_config(args)
    if args.penalized is not None:
        result = solve_penalized(dataset, args.gamma, args.penalized, config)
    else:
        if args.k is None:
            print("error: either --k or --penalized is required", file=sys.stderr)
            return 2
        result = solve_cardinality(dataset, args.gamma, args.k, config)
    echo = {
        "gamma": args.gamma,
        "k": args.k,
        "penalized": args.penalized,
        "mode": config.mode,
        "tol": config.tol,
        "time_limit": config.time_limit,
        "warm_start": config.warm_start,
        "expand_features": bool(args.expand_features),
    }
    io.write_result_json(args.out, result, echo, feature_names)
    gap = result.objective - result.lower_bound
    print(f"status={result.status} objective={result.objective:.6g} "
          f"gap={gap:.3g} support={io.to_one_based(result.indices)}")
    return 0


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        n=args.n, p=args.p, k=args.k, rho=args.rho, snr_sqrt=args.snr_sqrt, seed=args.seed
    )
    inst = generate(spec)
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    x_path = prefix.with_name(prefix.name + "X.csv")
    y_path = prefix.with_name(prefix.name + "Y.csv")
    truth_path = prefix.with_name(prefix.name + "truth.json")
    io.write_matrix_csv(x_path, inst.dataset.X)
    io.write_vector_csv(y_path, inst.dataset.Y)
    signs = [int(inst.w_true[j]) for j in inst.support_true]
    io.write_truth_json(truth_path, inst.support_true, signs, inst.sigma2_effective)
    print(f"wrote {x_path} {y_path} {truth_path}")
    return 0


def cmd_experiment(args) -> int:
    spec = SweepSpec.from_file(args.spec)
    new_rows, summary = run_experiment(
        spec, args.out, jobs=args.jobs, log=lambda msg: print(msg, flush=True)
    )
    print(f"{new_rows} new rows -> {args.out}; summary -> {summary}")
    return 0


def cmd_cv(args) -> int:
    dataset = io.load_dataset(args.x, args.y)
    gamma_grid = None
    if args.gamma_grid:
        gamma_grid = [float(v) for v in args.gamma_grid.split(",")]
    kwargs = {}
    if args.time_limit is not None:
        kwargs["time_limit"] = args.time_limit
    config = SolveConfig(**kwargs)
    result = cross_validate_k(
        dataset,
        gamma_grid,
        range(args.k_min, args.k_max + 1),
        folds=args.folds,
        config=config,
        seed=args.seed,
    )
    doc = {
        "k_star": result.k_star,
        "gamma_star": result.gamma_star,
        "table": [
            {
                "gamma": cell.gamma,
                "k": cell.k,
                "mean_error": cell.mean_error,
                "fold_errors": cell.fold_errors,
                "timeouts": cell.timeouts,
            }
            for cell in result.table
        ],
    }
    Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    print(f"k_star={result.k_star} gamma_star={result.gamma_star:.6g} -> {args.out}")
    return 0


def cmd_report(args) -> int:
    from .report import render_report  # defers the matplotlib import

    created = render_report(args.runs, args.out_dir, x_col=args.x_col, fmt=args.format)
    for path in created:
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparsereg",
        description="Exact sparse regression via cutting planes, with "
        "synthetic benchmarks and recovery experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance from X/Y CSV files")
    ps.add_argument("--x", required=True, help="design matrix CSV (no header)")
    ps.add_argument("--y", required=True, help="response CSV, one value per line")
    ps.add_argument("--k", type=int, default=None, help="sparsity budget")
    ps.add_argument("--gamma", type=float, required=True, help="ridge weight")
    ps.add_argument("--penalized", type=float, default=None, metavar="LAMBDA",
                    help="solve the l0-penalized form instead of the budgeted one")
    ps.add_argument("--mode", choices=["single", "multi"], default="single")
    ps.add_argument("--tol", type=float, default=None)
    ps.add_argument("--time-limit", type=float, default=None, metavar="SECONDS")
    ps.add_argument("--warm", choices=["dual", "lasso", "none"], default="dual")
    ps.add_argument("--expand-features", action="store_true",
                    help="lift columns through the transformation dictionary first")
    ps.add_argument("--out", required=True, help="result JSON path")
    ps.set_defaults(func=cmd_solve)

    pg = sub.add_parser("gen", help="generate a synthetic instance")
    pg.add_argument("--n", type=int, required=True)
    pg.add_argument("--p", type=int, required=True)
    pg.add_argument("--k", type=int, required=True)
    pg.add_argument("--rho", type=float, default=0.0)
    pg.add_argument("--snr-sqrt", type=float, default=20.0)
    pg.add_argument("--seed", type=int, default=0)
    pg.add_argument("--out-prefix", required=True,
                    help="writes <prefix>X.csv, <prefix>Y.csv, <prefix>truth.json")
    pg.set_defaults(func=cmd_gen)

    pe = sub.add_parser("experiment", help="run a sweep spec into a results CSV")
    pe.add_argument("--spec", required=True, help="sweep spec JSON")
    pe.add_argument("--out", required=True, help="results CSV (appended, resumable)")
    pe.add_argument("--jobs", type=int, default=1)
    pe.set_defaults(func=cmd_experiment)

    pc = sub.add_parser("cv", help="cross-validate the sparsity budget and gamma")
    pc.add_argument("--x", required=True)
    pc.add_argument("--y", required=True)
    pc.add_argument("--k-min", type=int, required=True)
    pc.add_argument("--k-max", type=int, required=True)
    pc.add_argument("--folds", type=int, default=5)
    pc.add_argument("--gamma-grid", default=None,
                    help="comma-separated gammas; default {0.01,0.1,1,10}/sqrt(n)")
    pc.add_argument("--time-limit", type=float, default=None,
                    help="per-solve cap in seconds")
    pc.add_argument("--seed", type=int, default=0, help="fold shuffle seed")
    pc.add_argument("--out", required=True, help="CV result JSON")
    pc.set_defaults(func=cmd_cv)

    pr = sub.add_parser("report", help="render figures from a results CSV")
    pr.add_argument("--runs", required=True, help="results CSV from 'experiment'")
    pr.add_argument("--out-dir", required=True)
    pr.add_argument("--x-col", default="n", help="sweep column on the x axis")
    pr.add_argument("--format", default="png", choices=["png", "pdf", "svg"])
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
