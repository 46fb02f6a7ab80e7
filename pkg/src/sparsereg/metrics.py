"""Support-recovery scores and cross-validation over (k, gamma)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .master import CutPool
from .oracle import Dataset
from .solver import SolveConfig, solve_cardinality


@dataclass(frozen=True)
class RecoveryScore:
    """Percentage of true columns found and of selected columns that
    are spurious. With the budget equal to the true sparsity and fully
    spent, the two add up to 100."""

    accuracy_pct: float
    false_alarm_pct: float


def support_metrics(
    w_star_support: Iterable[int], w_true_support: Iterable[int], k_true: int
) -> RecoveryScore:
    """accuracy = 100 |true ∩ selected| / k_true,
    false alarm = 100 |selected \\ true| / |selected| (0 when nothing
    is selected)."""
    if k_true < 1:
        raise ValueError(f"k_true must be >= 1, got {k_true}")
    sel = set(int(j) for j in w_star_support)
    true = set(int(j) for j in w_true_support)
    acc = 100.0 * len(sel & true) / k_true
    fa = 0.0 if not sel else 100.0 * len(sel - true) / len(sel)
    return RecoveryScore(accuracy_pct=acc, false_alarm_pct=fa)


@dataclass
class CVCell:
    gamma: float
    k: int
    fold_errors: list[float]
    mean_error: float
    timeouts: int  # folds whose solve hit the time limit (incumbent used)


@dataclass
class CVResult:
    k_star: int
    gamma_star: float
    table: list[CVCell]


def fold_blocks(n: int, folds: int, seed: int = 0) -> list[np.ndarray]:
    """Contiguous blocks of a seeded shuffle of [0, n)."""
    if folds < 2 or folds > n:
        raise ValueError(f"folds must be in [2, {n}], got {folds}")
    perm = np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed)]))).permutation(n)
    return np.array_split(perm, folds)


def cross_validate_k(
    dataset: Dataset,
    gamma_grid: Sequence[float] | None,
    k_range: Sequence[int],
    folds: int = 5,
    config: SolveConfig | None = None,
    seed: int = 0,
) -> CVResult:
    """Pick (k, gamma) by mean squared validation error over folds.

    gamma_grid = None uses {0.01, 0.1, 1, 10} / sqrt(n). Ties go to the
    smallest k, then the largest gamma (bias toward sparse models).
    Solver timeouts inside a cell are tolerated: the incumbent is used
    and the cell's timeout counter incremented. The cut pool is shared
    across k within a (fold, gamma) pair since cuts are budget-free.
    """
    if gamma_grid is None:
        gamma_grid = tuple(g / math.sqrt(dataset.n) for g in (0.01, 0.1, 1.0, 10.0))
    gammas = [float(g) for g in gamma_grid]
    ks = sorted(int(k) for k in k_range)
    if not ks:
        raise ValueError("k_range is empty")
    if ks[0] < 1 or ks[-1] > dataset.p:
        raise ValueError(f"k_range must lie within [1, {dataset.p}]")
    config = config or SolveConfig()
    blocks = fold_blocks(dataset.n, folds, seed=seed)

    errors: dict[tuple[float, int], list[float]] = {(g, k): [] for g in gammas for k in ks}
    timeouts: dict[tuple[float, int], int] = {(g, k): 0 for g in gammas for k in ks}
    for val_idx in blocks:
        mask = np.ones(dataset.n, dtype=bool)
        mask[val_idx] = False
        train = Dataset(X=dataset.X[mask], Y=dataset.Y[mask])
        X_val, Y_val = dataset.X[val_idx], dataset.Y[val_idx]
        for g in gammas:
            pool = CutPool(dataset.p)
            for k in ks:
                res = solve_cardinality(train, g, k, config, cut_pool=pool)
                pred_err = float(np.sum((Y_val - X_val @ res.coefficients) ** 2)) / len(val_idx)
                errors[(g, k)].append(pred_err)
                if res.status == "time_limit":
                    timeouts[(g, k)] += 1

    table = [
        CVCell(
            gamma=g,
            k=k,
            fold_errors=errors[(g, k)],
            mean_error=float(np.mean(errors[(g, k)])),
            timeouts=timeouts[(g, k)],
        )
        for g in gammas
        for k in ks
    ]
    best = min(table, key=lambda cell: (cell.mean_error, cell.k, -cell.gamma))
    return CVResult(k_star=best.k, gamma_star=best.gamma, table=table)
