"""Dual relaxation lower bound and warm-start support.

Maximizes the concave relaxation objective

    f(a) = -a.a/2 + Y.a - (gamma/2) * (sum of k largest (X_j . a)^2)

by supergradient ascent. Any iterate gives a valid lower bound on the
binary optimum (weak duality), so the ascent can stop anywhere. The
plain a/sqrt(t) step rule stalls on badly conditioned instances, so the
loop periodically takes an exact maximization step over the currently
active top-k set (a k-by-k solve); the reported bound is always f at
the best iterate seen.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .oracle import Dataset, SupportVector, _check_gamma, subset_loss


@dataclass(frozen=True)
class RelaxationResult:
    alpha: np.ndarray
    lower_bound: float
    iterations: int


def _topk_indices(scores: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest scores, ties toward the lowest index."""
    if k >= scores.shape[0]:
        return np.arange(scores.shape[0])
    order = np.argsort(-scores, kind="stable")
    return order[:k]


def relaxation_objective(dataset: Dataset, gamma: float, k: int, alpha: np.ndarray) -> float:
    """f(alpha) with the top-k term evaluated exactly."""
    scores = (dataset.X.T @ alpha) ** 2
    if k >= dataset.p:
        top = float(scores.sum())
    else:
        top = float(np.sort(scores)[-k:].sum()) if k > 0 else 0.0
    return (
        -0.5 * float(alpha @ alpha)
        + float(dataset.Y @ alpha)
        - 0.5 * gamma * top
    )


def solve_dual_relaxation(
    dataset: Dataset,
    gamma: float,
    k: int,
    iters: int = 500,
    polish_every: int = 25,
    stall_tol: float = 1e-9,
    stall_window: int = 50,
    deadline: float | None = None,
) -> RelaxationResult:
    """Ascend f from alpha = Y and return the best iterate found.

    Supergradient steps of size a/sqrt(t) with a = 1/(1 + gamma *
    max_j ||X_j||^2), interleaved every polish_every iterations with an
    exact maximization over the active top-k set. Stops early once the
    best objective has improved by less than stall_tol for stall_window
    consecutive iterations, or when the deadline passes.
    """
    gamma = _check_gamma(gamma)
    k = int(k)
    if k < 1 or k > dataset.p:
        raise ValueError(f"k must be in [1, {dataset.p}], got {k}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    X, Y = dataset.X, dataset.Y

    col_norms2 = np.einsum("ij,ij->j", X, X)
    base_step = 1.0 / (1.0 + gamma * float(col_norms2.max()))

    alpha = Y.copy()
    best_alpha = alpha.copy()
    best_f = -math.inf
    stall = 0
    t = 0
    for t in range(1, iters + 1):
        if deadline is not None and time.perf_counter() > deadline:
            break
        proj = X.T @ alpha
        scores = proj**2
        top = _topk_indices(scores, k)
        f_val = (
            -0.5 * float(alpha @ alpha)
            + float(Y @ alpha)
            - 0.5 * gamma * float(scores[top].sum())
        )
        if f_val > best_f + stall_tol:
            best_f = f_val
            best_alpha = alpha.copy()
            stall = 0
        else:
            stall += 1
            if stall >= stall_window:
                break

        if polish_every and t % polish_every == 1:
            # exact maximizer of the smooth quadratic restricted to the
            # active set; keep it only if it improves the bound
            _, cand = subset_loss(dataset, gamma, tuple(int(j) for j in np.sort(top)))
            f_cand = relaxation_objective(dataset, gamma, k, cand)
            if f_cand > best_f:
                best_f = f_cand
                best_alpha = cand.copy()
                alpha = cand
                stall = 0
                continue

        grad = Y - alpha - gamma * (X[:, top] @ proj[top])
        alpha = alpha + (base_step / math.sqrt(t)) * grad

    if best_f == -math.inf:
        # deadline hit before the first evaluation
        best_alpha = Y.copy()
        best_f = relaxation_objective(dataset, gamma, k, best_alpha)
    return RelaxationResult(alpha=best_alpha, lower_bound=best_f, iterations=t)


def warm_start_support(alpha: np.ndarray, dataset: Dataset, k: int) -> SupportVector:
    """Support of the k largest squared column scores (X_j . alpha)^2,
    ties toward the lowest index."""
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.shape[0] != dataset.n:
        raise ValueError(f"alpha has length {alpha.shape[0]}, expected {dataset.n}")
    k = int(k)
    if k < 0 or k > dataset.p:
        raise ValueError(f"k must be in [0, {dataset.p}], got {k}")
    scores = (dataset.X.T @ alpha) ** 2
    top = _topk_indices(scores, k)
    return SupportVector(indices=tuple(sorted(int(j) for j in top)), p=dataset.p)
