"""Regression loss oracle for subset selection.

Evaluates the regularized regression loss c(s) of a column subset, its
subgradient and the dual vector alpha. The fast path goes through the
k-by-k capacitance matrix (O(k^3 + nk) per call); a dense n-by-n path
serves as reference implementation for tests, and a brute-force
enumeration oracle certifies small instances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve


class OracleError(ValueError):
    """Raised on invalid inputs to the loss oracle."""


@dataclass(frozen=True)
class Dataset:
    """Design matrix X (n rows, p columns) and response Y (length n)."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float).ravel()
        if X.ndim != 2:
            raise OracleError(f"X must be 2-d, got shape {X.shape}")
        if X.shape[0] != Y.shape[0]:
            raise OracleError(
                f"X has {X.shape[0]} rows but Y has {Y.shape[0]} entries"
            )
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise OracleError("need at least one row and one column")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(Y)):
            raise OracleError("non-finite entries in X or Y")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class Hyperparams:
    """Solve hyperparameters: ridge weight gamma plus exactly one of
    a sparsity budget k or an l0 penalty lambda0."""

    gamma: float
    k: int | None = None
    lambda0: float | None = None

    def __post_init__(self):
        if not (self.gamma > 0):
            raise OracleError(f"gamma must be positive, got {self.gamma}")
        if (self.k is None) == (self.lambda0 is None):
            raise OracleError("exactly one of k and lambda0 must be set")
        if self.k is not None and self.k < 1:
            raise OracleError(f"k must be >= 1, got {self.k}")
        if self.lambda0 is not None and self.lambda0 < 0:
            raise OracleError(f"lambda0 must be >= 0, got {self.lambda0}")


@dataclass(frozen=True)
class SupportVector:
    """Binary selection over p columns, stored as sorted 0-based indices."""

    indices: tuple[int, ...]
    p: int

    def __post_init__(self):
        idx = tuple(int(j) for j in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise OracleError("support indices must be strictly increasing")
        if idx and (idx[0] < 0 or idx[-1] >= self.p):
            raise OracleError(f"support indices out of range for p={self.p}")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)

    def to_mask(self) -> np.ndarray:
        mask = np.zeros(self.p, dtype=bool)
        mask[list(self.indices)] = True
        return mask


def as_support(support, p: int) -> tuple[int, ...]:
    """Normalize a SupportVector or index iterable to a sorted tuple."""
    if isinstance(support, SupportVector):
        if support.p != p:
            raise OracleError(f"support is over p={support.p}, expected {p}")
        return support.indices
    idx = tuple(sorted(int(j) for j in support))
    if any(b <= a for a, b in zip(idx, idx[1:])):
        raise OracleError("duplicate support indices")
    if idx and (idx[0] < 0 or idx[-1] >= p):
        raise OracleError(f"support indices out of range for p={p}")
    return idx


@dataclass(frozen=True)
class LossEval:
    """Loss value c, full subgradient (length p, all entries <= 0) and
    dual vector alpha (length n)."""

    c: float
    grad: np.ndarray
    alpha: np.ndarray


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not (gamma > 0) or not math.isfinite(gamma):
        raise OracleError(f"gamma must be positive and finite, got {gamma}")
    return gamma


def subset_loss(dataset: Dataset, gamma: float, indices: Sequence[int]) -> tuple[float, np.ndarray]:
    """Loss and dual alpha for a binary support, via the capacitance matrix.

    alpha = Y - X_s (I/gamma + X_s^T X_s)^-1 X_s^T Y, c = Y.alpha / 2.
    Cost O(k^3 + nk); the gradient is not formed.
    """
    gamma = _check_gamma(gamma)
    Y = dataset.Y
    if len(indices) == 0:
        return 0.5 * float(Y @ Y), Y.copy()
    Xs = dataset.X[:, list(indices)]
    k = Xs.shape[1]
    cap = Xs.T @ Xs + np.eye(k) / gamma
    rhs = Xs.T @ Y
    # positive definite for any gamma > 0, Cholesky never pivots
    t = cho_solve(cho_factor(cap, lower=True), rhs)
    alpha = Y - Xs @ t
    return 0.5 * float(Y @ alpha), alpha


def loss_and_gradient(dataset: Dataset, gamma: float, support) -> LossEval:
    """Loss, subgradient and dual vector at a binary support.

    grad_j = -(gamma/2) (X_j . alpha)^2 for every column j, so the
    whole gradient costs one extra X^T alpha product.
    """
    indices = as_support(support, dataset.p)
    c, alpha = subset_loss(dataset, gamma, indices)
    scores = dataset.X.T @ alpha
    grad = -0.5 * float(gamma) * scores**2
    return LossEval(c=c, grad=grad, alpha=alpha)


def dense_alpha(dataset: Dataset, gamma: float, s) -> np.ndarray:
    """Dual vector (I_n + gamma * X diag(s) X^T)^-1 Y for a relaxed
    selection s in [0,1]^p, by dense Cholesky. Reference path, O(n^3)."""
    gamma = _check_gamma(gamma)
    s = np.asarray(s, dtype=float).ravel()
    if s.shape[0] != dataset.p:
        raise OracleError(f"selection has length {s.shape[0]}, expected {dataset.p}")
    if not np.all(np.isfinite(s)) or s.min(initial=0.0) < 0 or s.max(initial=0.0) > 1:
        raise OracleError("selection entries must be finite and in [0,1]")
    X = dataset.X
    M = np.eye(dataset.n) + gamma * ((X * s) @ X.T)
    return cho_solve(cho_factor(M, lower=True), dataset.Y)


def ridge_loss_dense(dataset: Dataset, gamma: float, s) -> float:
    """Relaxed regression loss (1/2) Y^T (I + gamma sum_j s_j X_j X_j^T)^-1 Y.

    For binary s this equals the ridge loss restricted to the selected
    columns; used as the dense reference evaluator in tests.
    """
    alpha = dense_alpha(dataset, gamma, s)
    return 0.5 * float(dataset.Y @ alpha)


def relaxed_gradient_dense(dataset: Dataset, gamma: float, s) -> np.ndarray:
    """Analytic gradient of ridge_loss_dense at a relaxed selection s."""
    alpha = dense_alpha(dataset, gamma, s)
    scores = dataset.X.T @ alpha
    return -0.5 * float(gamma) * scores**2


def enumeration_count(p: int, k: int) -> int:
    """Number of supports of size at most k over p columns."""
    return sum(math.comb(p, j) for j in range(min(k, p) + 1))


def enumerate_optimal(
    dataset: Dataset, gamma: float, k: int, max_candidates: int = 10**6
) -> tuple[SupportVector, float]:
    """Brute-force minimizer of the loss over all supports of size <= k.

    Ties break toward the lexicographically smallest index tuple.
    Refuses instances whose candidate count exceeds max_candidates.
    """
    gamma = _check_gamma(gamma)
    k = int(k)
    if k < 0 or k > dataset.p:
        raise OracleError(f"k must be in [0, {dataset.p}], got {k}")
    total = enumeration_count(dataset.p, k)
    if total > max_candidates:
        raise OracleError(
            f"enumeration would visit {total} supports, over the "
            f"{max_candidates} guard"
        )
    best_c = math.inf
    best: tuple[int, ...] = ()
    for size in range(k + 1):
        for idx in combinations(range(dataset.p), size):
            c, _ = subset_loss(dataset, gamma, idx)
            if c < best_c or (c == best_c and idx < best):
                best_c = c
                best = idx
    return SupportVector(indices=best, p=dataset.p), best_c


def dual_objective(dataset: Dataset, gamma: float, support, alpha: np.ndarray) -> float:
    """Concave dual value -(gamma/2) a^T K a - a^T a / 2 + Y^T a with
    K the kernel of the selected columns. Equals the loss at the
    maximizing alpha."""
    indices = as_support(support, dataset.p)
    alpha = np.asarray(alpha, dtype=float).ravel()
    quad = 0.0
    if indices:
        proj = dataset.X[:, list(indices)].T @ alpha
        quad = float(proj @ proj)
    return -0.5 * float(gamma) * quad - 0.5 * float(alpha @ alpha) + float(dataset.Y @ alpha)


def ridge_refit(dataset: Dataset, gamma: float, support) -> np.ndarray:
    """Ridge coefficients on the selected columns, zero elsewhere.

    Solves the k-by-k system (I/gamma + X_s^T X_s) w_s = X_s^T Y.
    """
    gamma = _check_gamma(gamma)
    indices = as_support(support, dataset.p)
    w = np.zeros(dataset.p)
    if not indices:
        return w
    Xs = dataset.X[:, list(indices)]
    cap = Xs.T @ Xs + np.eye(len(indices)) / gamma
    w[list(indices)] = cho_solve(cho_factor(cap, lower=True), Xs.T @ dataset.Y)
    return w


def primal_objective(dataset: Dataset, gamma: float, w: np.ndarray) -> float:
    """Primal value ||w||^2 / (2 gamma) + ||Y - X w||^2 / 2."""
    gamma = _check_gamma(gamma)
    w = np.asarray(w, dtype=float).ravel()
    resid = dataset.Y - dataset.X @ w
    return 0.5 / gamma * float(w @ w) + 0.5 * float(resid @ resid)
