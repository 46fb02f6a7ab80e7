"""Sweep harness: generate instances, solve, score, append CSV rows.

A sweep spec (JSON document or dict) names a base instance, the
parameters to sweep, a replication count and the methods to run. Every
(point, replication, method) triple yields one CSV row keyed by a
derived instance seed, so finished rows are skipped on rerun and two
runs with the same spec produce identical rows apart from wall time.
"""

from __future__ import annotations

import csv
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .baselines import PathConfig, lasso_k_sparse
from .datagen import SyntheticSpec, generate
from .metrics import support_metrics
from .solver import SolveConfig, solve_cardinality

CSV_COLUMNS = [
    "seed",
    "n",
    "p",
    "k_true",
    "k_used",
    "rho",
    "snr_sqrt",
    "method",
    "accuracy_pct",
    "false_alarm_pct",
    "objective",
    "lower_bound",
    "wall_time_s",
    "status",
    "support_pred",
    "support_true",
]

KEY_COLUMNS = ["method", "seed", "n", "p", "k_true", "k_used", "rho", "snr_sqrt"]

SWEEPABLE = ("n", "p", "k", "rho", "snr_sqrt")


@dataclass(frozen=True)
class SweepSpec:
    seed: int
    replications: int
    methods: tuple[str, ...]
    gamma: float
    base: dict
    sweep: dict
    k_used: int | None = None
    solver: dict | None = None
    lasso: dict | None = None

    @staticmethod
    def from_dict(doc: dict) -> "SweepSpec":
        methods = tuple(doc.get("methods", ["exact", "lasso"]))
        for m in methods:
            if m not in ("exact", "lasso"):
                raise ValueError(f"unknown method {m!r}")
        base = dict(doc["base"])
        missing = [f for f in ("n", "p", "k", "rho", "snr_sqrt") if f not in base]
        if missing:
            raise ValueError(f"sweep base is missing {missing}")
        sweep = dict(doc.get("sweep", {}))
        for param in sweep:
            if param not in SWEEPABLE:
                raise ValueError(f"cannot sweep over {param!r}")
        reps = int(doc.get("replications", 1))
        if reps < 1:
            raise ValueError("replications must be >= 1")
        return SweepSpec(
            seed=int(doc.get("seed", 0)),
            replications=reps,
            methods=methods,
            gamma=float(doc["gamma"]),
            base=base,
            sweep=sweep,
            k_used=doc.get("k_used"),
            solver=doc.get("solver"),
            lasso=doc.get("lasso"),
        )

    @staticmethod
    def from_file(path: str | Path) -> "SweepSpec":
        return SweepSpec.from_dict(json.loads(Path(path).read_text()))

    def points(self) -> list[dict]:
        """Cartesian product of the sweep lists over the base point."""
        if not self.sweep:
            return [dict(self.base)]
        params = sorted(self.sweep)
        out = []
        for combo in itertools.product(*(self.sweep[p] for p in params)):
            point = dict(self.base)
            point.update(dict(zip(params, combo)))
            out.append(point)
        return out


def _float_bits(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def instance_seed(spec_seed: int, replication: int, point: dict) -> int:
    """Stable per-task seed, independent of sweep-point ordering."""
    entropy = [
        int(spec_seed),
        int(replication),
        int(point["n"]),
        int(point["p"]),
        int(point["k"]),
        _float_bits(float(point["rho"])),
        _float_bits(float(point["snr_sqrt"])),
    ]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0])


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _support_field(indices: Iterable[int]) -> str:
    return json.dumps([int(j) + 1 for j in indices])


def _task_list(spec: SweepSpec) -> list[dict]:
    tasks = []
    for point in spec.points():
        for rep in range(spec.replications):
            seed = instance_seed(spec.seed, rep, point)
            for method in spec.methods:
                tasks.append(
                    {
                        "method": method,
                        "seed": seed,
                        "point": point,
                        "k_used": int(spec.k_used if spec.k_used is not None else point["k"]),
                        "gamma": spec.gamma,
                        "solver": spec.solver or {},
                        "lasso": spec.lasso or {},
                    }
                )
    return tasks


def _task_key(task: dict) -> tuple:
    point = task["point"]
    return (
        task["method"],
        _fmt(task["seed"]),
        _fmt(int(point["n"])),
        _fmt(int(point["p"])),
        _fmt(int(point["k"])),
        _fmt(float(point["rho"])),
        _fmt(float(point["snr_sqrt"])),
        _fmt(task["k_used"]),
    )


def _row_key(row: dict) -> tuple:
    return (
        row["method"],
        row["seed"],
        row["n"],
        row["p"],
        row["k_true"],
        row["rho"],
        row["snr_sqrt"],
        row["k_used"],
    )


def run_task(task: dict) -> dict:
    """One (point, replication, method) cell; importable for workers."""
    point = task["point"]
    spec = SyntheticSpec(
        n=int(point["n"]),
        p=int(point["p"]),
        k=int(point["k"]),
        rho=float(point["rho"]),
        snr_sqrt=float(point["snr_sqrt"]),
        seed=int(task["seed"]),
    )
    inst = generate(spec)
    k_used = int(task["k_used"])
    if task["method"] == "exact":
        config = SolveConfig(**task["solver"])
        res = solve_cardinality(inst.dataset, float(task["gamma"]), k_used, config)
        support = res.indices
        objective, lower, wall, status = res.objective, res.lower_bound, res.wall_time, res.status
    else:
        path = PathConfig(**task["lasso"])
        t0 = time.perf_counter()
        sol = lasso_k_sparse(inst.dataset, k_used, path)
        wall = time.perf_counter() - t0
        support = tuple(int(j) for j in np.nonzero(sol.coef)[0])
        resid = inst.dataset.Y - inst.dataset.X @ sol.coef
        objective = 0.5 * float(resid @ resid)
        lower = 0.0  # the loss is nonnegative; heuristics certify nothing more
        status = "heuristic" if sol.exact_k else "heuristic_nearest_k"
    score = support_metrics(support, inst.support_true, k_true=spec.k)
    return {
        "seed": _fmt(spec.seed),
        "n": _fmt(spec.n),
        "p": _fmt(spec.p),
        "k_true": _fmt(spec.k),
        "k_used": _fmt(k_used),
        "rho": _fmt(spec.rho),
        "snr_sqrt": _fmt(spec.snr_sqrt),
        "method": task["method"],
        "accuracy_pct": _fmt(score.accuracy_pct),
        "false_alarm_pct": _fmt(score.false_alarm_pct),
        "objective": _fmt(float(objective)),
        "lower_bound": _fmt(float(lower)),
        "wall_time_s": f"{wall:.6f}",
        "status": status,
        "support_pred": _support_field(support),
        "support_true": _support_field(inst.support_true),
    }


def _read_existing(out_path: Path) -> tuple[list[dict], set[tuple]]:
    rows: list[dict] = []
    keys: set[tuple] = set()
    if out_path.exists():
        with out_path.open(newline="") as fh:
            for row in csv.DictReader(fh):
                rows.append(row)
                keys.add(_row_key(row))
    return rows, keys


def run_experiment(
    spec: SweepSpec | dict,
    out_path: str | Path,
    jobs: int = 1,
    log=None,
) -> tuple[int, Path]:
    """Run all pending cells of the sweep, appending to out_path.

    Returns (number of new rows, summary CSV path). Cells already in
    the output are skipped; new rows always land in task order so a
    fresh run is byte-reproducible apart from wall time and status
    detail. The companion summary aggregates everything present.
    """
    if isinstance(spec, dict):
        spec = SweepSpec.from_dict(spec)
    out_path = Path(out_path)
    tasks = _task_list(spec)
    existing_rows, existing_keys = _read_existing(out_path)
    pending = [t for t in tasks if _task_key(t) not in existing_keys]

    new_rows: list[dict] = []
    write_header = not out_path.exists()
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if write_header:
            writer.writeheader()
        if jobs > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for i, row in enumerate(pool.map(run_task, pending, chunksize=1)):
                    writer.writerow(row)
                    fh.flush()
                    new_rows.append(row)
                    if log:
                        log(f"[{i + 1}/{len(pending)}] {row['method']} n={row['n']} "
                            f"A%={row['accuracy_pct']} t={row['wall_time_s']}s")
        else:
            for i, task in enumerate(pending):
                row = run_task(task)
                writer.writerow(row)
                fh.flush()
                new_rows.append(row)
                if log:
                    log(f"[{i + 1}/{len(pending)}] {row['method']} n={row['n']} "
                        f"A%={row['accuracy_pct']} t={row['wall_time_s']}s")

    summary_path = write_summary(existing_rows + new_rows, out_path)
    return len(new_rows), summary_path


SUMMARY_GROUP = ["n", "p", "k_true", "k_used", "rho", "snr_sqrt", "method"]
SUMMARY_STATS = ["accuracy_pct", "false_alarm_pct", "wall_time_s"]


def summarize_rows(rows: list[dict]) -> list[dict]:
    groups: dict[tuple, list[dict]] = {}
    order: list[tuple] = []
    for row in rows:
        key = tuple(row[c] for c in SUMMARY_GROUP)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(row)
    out = []
    for key in order:
        members = groups[key]
        rec = dict(zip(SUMMARY_GROUP, key))
        rec["replications"] = str(len(members))
        for stat in SUMMARY_STATS:
            vals = np.array([float(r[stat]) for r in members])
            rec[f"{stat}_mean"] = repr(float(vals.mean()))
            rec[f"{stat}_std"] = repr(float(vals.std(ddof=0)))
        out.append(rec)
    return out


def write_summary(rows: list[dict], out_path: Path) -> Path:
    summary_path = out_path.with_name(out_path.stem + "_summary.csv")
    recs = summarize_rows(rows)
    cols = SUMMARY_GROUP + ["replications"] + [
        f"{s}_{kind}" for s in SUMMARY_STATS for kind in ("mean", "std")
    ]
    with summary_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        for rec in recs:
            writer.writerow(rec)
    return summary_path
