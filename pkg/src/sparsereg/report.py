"""Render figures from an experiment CSV.

Consumes the runs CSV written by the experiment harness (the CSV stays
the contract; this is just a built-in consumer) and drops per-method
mean curves with one-standard-deviation bars into an output directory,
next to a delimited summary of the plotted numbers.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .datagen import theoretical_thresholds
from .experiment import summarize_rows

PANELS = [
    ("accuracy_pct", "accuracy %"),
    ("false_alarm_pct", "false alarm %"),
    ("wall_time_s", "solve time [s]"),
]

_METHOD_STYLE = {"exact": ("tab:blue", "o"), "lasso": ("tab:orange", "s")}


def _load_rows(runs_csv: str | Path) -> list[dict]:
    with Path(runs_csv).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"no rows in {runs_csv}")
    return rows


def _threshold_lines(rows: list[dict], x_col: str):
    """Vertical threshold markers, only for single-(k, p, snr) n-sweeps."""
    if x_col != "n":
        return None
    try:
        ks = {int(r["k_true"]) for r in rows}
        ps = {int(r["p"]) for r in rows}
        snrs = {float(r["snr_sqrt"]) for r in rows}
    except (KeyError, ValueError):
        return None
    if len(ks) != 1 or len(ps) != 1 or len(snrs) != 1:
        return None
    k, p, snr = ks.pop(), ps.pop(), snrs.pop()
    sigma2 = k / snr**2  # nominal noise variance at unit column scale
    return theoretical_thresholds(k, p, sigma2)


def render_report(
    runs_csv: str | Path,
    out_dir: str | Path,
    x_col: str = "n",
    fmt: str = "png",
) -> list[Path]:
    """Write one figure per metric plus a combined panel and the
    aggregated summary CSV; returns the created paths."""
    rows = _load_rows(runs_csv)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = summarize_rows(rows)
    methods = sorted({rec["method"] for rec in summary})
    thresholds = _threshold_lines(rows, x_col)

    created: list[Path] = []
    summary_path = out_dir / "report_summary.csv"
    cols = list(summary[0].keys())
    with summary_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=cols)
        writer.writeheader()
        writer.writerows(summary)
    created.append(summary_path)

    def series(method: str, stat: str):
        pts = [rec for rec in summary if rec["method"] == method]
        pts.sort(key=lambda rec: float(rec[x_col]))
        x = np.array([float(rec[x_col]) for rec in pts])
        mean = np.array([float(rec[f"{stat}_mean"]) for rec in pts])
        std = np.array([float(rec[f"{stat}_std"]) for rec in pts])
        return x, mean, std

    def draw(ax, stat: str, label: str):
        for method in methods:
            x, mean, std = series(method, stat)
            color, marker = _METHOD_STYLE.get(method, ("tab:gray", "x"))
            ax.errorbar(x, mean, yerr=std, color=color, marker=marker,
                        capsize=2, label=method)
        if thresholds is not None and stat != "wall_time_s":
            ax.axvline(thresholds.n1, color="tab:red", ls=":", lw=1,
                       label="l1 threshold")
            ax.axvline(thresholds.n0, color="tab:green", ls=":", lw=1,
                       label="exact threshold")
        ax.set_xlabel(x_col)
        ax.set_ylabel(label)
        ax.legend(fontsize=8)

    for stat, label in PANELS:
        fig, ax = plt.subplots(figsize=(6, 4))
        draw(ax, stat, label)
        if stat == "wall_time_s":
            ax.set_yscale("log")
        fig.tight_layout()
        path = out_dir / f"{stat}_vs_{x_col}.{fmt}"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        created.append(path)

    fig, axes = plt.subplots(len(PANELS), 1, figsize=(6, 9), sharex=True)
    for ax, (stat, label) in zip(axes, PANELS):
        draw(ax, stat, label)
        if stat == "wall_time_s":
            ax.set_yscale("log")
    fig.tight_layout()
    combined = out_dir / f"overview_vs_{x_col}.{fmt}"
    fig.savefig(combined, dpi=150)
    plt.close(fig)
    created.append(combined)
    return created
