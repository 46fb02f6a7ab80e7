"""Convex-surrogate baseline: cyclic coordinate descent on the
l1-penalized ridge objective

    ||Y - X w||^2 / 2 + ||w||^2 / (2 gamma) + lambda1 * ||w||_1

plus the path rule that picks the least-regularized solution with
exactly k nonzeros, for head-to-head comparisons against the exact
solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import Dataset


@dataclass(frozen=True)
class PathConfig:
    """Penalty path settings. lambda_grid, when given, must be strictly
    decreasing and positive; otherwise grid_points values are log-spaced
    from ||X^T Y||_inf down to grid_min_ratio times it.

    stop_nnz, when set, abandons the path once a solution carries that
    many nonzeros (supports only grow as the penalty shrinks, so points
    past the cutoff cannot contain the sought cardinality in practice);
    None walks the whole grid."""

    lambda_grid: tuple[float, ...] | None = None
    max_iter: int = 1000
    cd_tol: float = 1e-8
    grid_points: int = 100
    grid_min_ratio: float = 1e-4
    stop_nnz: int | None = None

    def __post_init__(self):
        if self.lambda_grid is not None:
            g = tuple(float(v) for v in self.lambda_grid)
            if not g:
                raise ValueError("lambda_grid must be non-empty")
            if any(v <= 0 for v in g) or any(b >= a for a, b in zip(g, g[1:])):
                raise ValueError("lambda_grid must be positive and strictly decreasing")
            object.__setattr__(self, "lambda_grid", g)
        if not (self.cd_tol > 0):
            raise ValueError("cd_tol must be positive")


@dataclass
class CDSolution:
    coef: np.ndarray
    iterations: int
    converged: bool


@dataclass
class PathSolution:
    coef: np.ndarray
    lambda1: float
    exact_k: bool  # False when the nearest-cardinality fallback fired


def soft_threshold(x: float, thresh: float) -> float:
    return math.copysign(max(abs(x) - thresh, 0.0), x)


def penalized_objective(dataset: Dataset, gamma: float, lambda1: float, w: np.ndarray) -> float:
    resid = dataset.Y - dataset.X @ w
    ridge = 0.0 if math.isinf(gamma) else 0.5 / gamma * float(w @ w)
    return 0.5 * float(resid @ resid) + ridge + lambda1 * float(np.abs(w).sum())


def _fixed_point_residuals(
    X: np.ndarray, Y: np.ndarray, w: np.ndarray, norms2: np.ndarray, ridge: float, lambda1: float
) -> np.ndarray:
    rho = X.T @ (Y - X @ w) + norms2 * w
    target = np.sign(rho) * np.maximum(np.abs(rho) - lambda1, 0.0) / (norms2 + ridge)
    return np.abs(w - target)


def elastic_net_cd(
    dataset: Dataset,
    gamma: float,
    lambda1: float,
    max_iter: int = 1000,
    cd_tol: float = 1e-8,
    w0: np.ndarray | None = None,
) -> CDSolution:
    """Cyclic coordinate descent with soft thresholding.

    gamma = inf drops the ridge term (plain lasso). Sweeps alternate
    between the full coordinate set and the current active set (the
    residual is cached and updated in place). Converged means every
    coordinate satisfies its soft-threshold fixed point within cd_tol;
    hitting max_iter returns the current iterate unconverged.
    """
    if not (lambda1 > 0):
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    if not (gamma > 0):
        raise ValueError(f"gamma must be positive, got {gamma}")
    X, Y = dataset.X, dataset.Y
    n, p = X.shape
    ridge = 0.0 if math.isinf(gamma) else 1.0 / gamma
    norms2 = np.einsum("ij,ij->j", X, X)
    w = np.zeros(p) if w0 is None else np.asarray(w0, dtype=float).copy()
    resid = Y - X @ w
    usable = norms2 > 0.0

    def sweep(idxs) -> float:
        max_delta = 0.0
        for j in idxs:
            wj = w[j]
            if wj != 0.0:
                resid[:] += wj * X[:, j]
            rho = float(X[:, j] @ resid)
            new = soft_threshold(rho, lambda1) / (norms2[j] + ridge)
            if new != 0.0:
                resid[:] -= new * X[:, j]
            w[j] = new
            max_delta = max(max_delta, abs(new - wj))
        return max_delta

    all_idx = np.nonzero(usable)[0]
    it = 0
    while it < max_iter:
        it += 1
        delta_full = sweep(all_idx)
        if delta_full <= cd_tol:
            res = _fixed_point_residuals(X, Y, w, norms2, ridge, lambda1)
            if res[usable].max(initial=0.0) <= cd_tol:
                return CDSolution(coef=w, iterations=it, converged=True)
        while it < max_iter:
            active = np.nonzero(w)[0]
            if active.size == 0 or active.size == all_idx.size:
                break
            it += 1
            if sweep(active) <= cd_tol:
                break
    return CDSolution(coef=w, iterations=max_iter, converged=False)


def default_lambda_grid(dataset: Dataset, points: int = 100, min_ratio: float = 1e-4) -> np.ndarray:
    """Log-spaced penalties from the full-shrinkage level down."""
    lam_max = float(np.abs(dataset.X.T @ dataset.Y).max())
    if lam_max <= 0:
        raise ValueError("X^T Y is zero; no meaningful penalty path")
    return np.geomspace(lam_max, min_ratio * lam_max, points)


def lasso_k_sparse(dataset: Dataset, k: int, path: PathConfig | None = None) -> PathSolution:
    """Least-regularized lasso path point with exactly k nonzeros.

    Walks the decreasing penalty grid with warm starts. When no grid
    point hits cardinality k exactly, falls back to the closest
    cardinality (ties to the larger penalty) and clears exact_k.
    """
    path = path or PathConfig()
    k = int(k)
    if k < 0 or k > dataset.p:
        raise ValueError(f"k must be in [0, {dataset.p}], got {k}")
    if np.abs(dataset.X.T @ dataset.Y).max(initial=0.0) == 0.0:
        # zero response (or orthogonal data): every penalty gives w = 0
        return PathSolution(coef=np.zeros(dataset.p), lambda1=math.inf, exact_k=(k == 0))
    if path.lambda_grid is not None:
        grid = np.asarray(path.lambda_grid, dtype=float)
    else:
        grid = default_lambda_grid(dataset, path.grid_points, path.grid_min_ratio)

    best_exact: PathSolution | None = None
    best_near: tuple[int, PathSolution] | None = None
    w = np.zeros(dataset.p)
    for lam in grid:
        sol = elastic_net_cd(
            dataset, math.inf, float(lam), max_iter=path.max_iter, cd_tol=path.cd_tol, w0=w
        )
        w = sol.coef
        nnz = int(np.count_nonzero(w))
        if nnz == k:
            best_exact = PathSolution(coef=w.copy(), lambda1=float(lam), exact_k=True)
        gap = abs(nnz - k)
        if best_near is None or gap < best_near[0]:
            best_near = (gap, PathSolution(coef=w.copy(), lambda1=float(lam), exact_k=False))
        if path.stop_nnz is not None and nnz >= path.stop_nnz:
            break
    if best_exact is not None:
        return best_exact
    return best_near[1]
