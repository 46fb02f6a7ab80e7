"""Synthetic benchmark instances and theoretical recovery thresholds.

Rows of X are zero-mean Gaussian with banded correlation rho^|i-j|,
realized exactly by the stationary AR(1) recursion (no p x p Cholesky).
The ground truth has k nonzero +-1 coefficients at uniformly drawn
positions, and the noise is rescaled so that the realized signal to
noise norm ratio matches snr_sqrt exactly.

Randomness comes from the counter-based Philox generator keyed by
SeedSequence([seed, replication]), so replications have independent
streams and every draw is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import Dataset


@dataclass(frozen=True)
class SyntheticSpec:
    n: int
    p: int
    k: int
    rho: float
    snr_sqrt: float
    seed: int

    def __post_init__(self):
        if not (1 <= self.k <= self.p):
            raise ValueError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if not (0.0 <= self.rho < 1.0):
            raise ValueError(f"rho must be in [0, 1), got {self.rho}")
        if not (self.snr_sqrt > 0):
            raise ValueError(f"snr_sqrt must be positive, got {self.snr_sqrt}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")


@dataclass(frozen=True)
class SyntheticInstance:
    dataset: Dataset
    w_true: np.ndarray
    support_true: tuple[int, ...]
    sigma2_effective: float  # realized noise variance ||E||^2 / n


@dataclass(frozen=True)
class Thresholds:
    n0: float  # exact-recovery curve 2k log(p) / log(2k/sigma^2 + 1)
    n1: float  # l1-heuristic curve (2k + sigma^2) log(p - k)


def rng_for(seed: int, replication: int = 0) -> np.random.Generator:
    """Philox stream for a (seed, replication) pair."""
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([int(seed), int(replication)]))
    )


def correlated_design(rng: np.random.Generator, n: int, p: int, rho: float) -> np.ndarray:
    """n samples of a p-variate normal with covariance rho^|i-j|.

    AR(1) recursion across columns: first column standard normal, then
    X_j = rho X_{j-1} + sqrt(1 - rho^2) Z_j. Exact for this covariance.
    """
    Z = rng.standard_normal((n, p))
    if rho == 0.0:
        return Z
    X = np.empty_like(Z)
    X[:, 0] = Z[:, 0]
    c = math.sqrt(1.0 - rho * rho)
    for j in range(1, p):
        X[:, j] = rho * X[:, j - 1] + c * Z[:, j]
    return X


def generate(spec: SyntheticSpec, replication: int = 0) -> SyntheticInstance:
    """Draw one instance. Deterministic in (spec, replication).

    Draw order is fixed: design, support, signs, noise.
    """
    rng = rng_for(spec.seed, replication)
    X = correlated_design(rng, spec.n, spec.p, spec.rho)
    support = np.sort(rng.choice(spec.p, size=spec.k, replace=False))
    signs = rng.integers(0, 2, size=spec.k) * 2 - 1
    w_true = np.zeros(spec.p)
    w_true[support] = signs
    signal = X @ w_true
    signal_norm = float(np.linalg.norm(signal))
    while True:
        noise = rng.standard_normal(spec.n)
        norm = float(np.linalg.norm(noise))
        if norm > 0.0:
            break
    noise *= signal_norm / (spec.snr_sqrt * norm)
    Y = signal + noise
    sigma2 = signal_norm**2 / (spec.n * spec.snr_sqrt**2)
    return SyntheticInstance(
        dataset=Dataset(X=X, Y=Y),
        w_true=w_true,
        support_true=tuple(int(j) for j in support),
        sigma2_effective=sigma2,
    )


def theoretical_thresholds(k: int, p: int, sigma2: float) -> Thresholds:
    """Recovery-threshold sample sizes for the exact and l1 methods."""
    k, p = int(k), int(p)
    if p <= k:
        raise ValueError(f"need p > k, got p={p}, k={k}")
    if sigma2 < 0:
        raise ValueError(f"sigma2 must be >= 0, got {sigma2}")
    n1 = (2.0 * k + sigma2) * math.log(p - k)
    n0 = 0.0 if sigma2 == 0.0 else 2.0 * k * math.log(p) / math.log(2.0 * k / sigma2 + 1.0)
    return Thresholds(n0=n0, n1=n1)


NONLINEAR_COLUMNS = 20  # raw regressors feeding the lifted benchmark


def generate_nonlinear(
    n: int,
    snr_sqrt: float = 20.0,
    rho: float = 0.0,
    seed: int = 0,
    a: float = 0.0,
    replication: int = 0,
) -> tuple[Dataset, tuple[int, ...]]:
    """Benchmark with a nonlinear ground truth over 20 raw regressors.

    The response mixes a square root, a square, a tanh, an oscillation
    and a linear term of the first four columns (plus an optional
    product term scaled by a, which no single lifted column can match).
    Returns the raw dataset and the lifted-column indices of the terms
    the transformation dictionary can represent; the oscillation has a
    different frequency than the dictionary's cosine, so it is excluded.
    """
    rng = rng_for(seed, replication)
    X = correlated_design(rng, n, NONLINEAR_COLUMNS, rho)
    signal = (
        3.0 * np.sqrt(np.abs(X[:, 3]))
        - 2.0 * X[:, 1] ** 2
        + 4.0 * np.tanh(2.0 * X[:, 2])
        + 3.0 * np.cos(2.0 * math.pi * X[:, 1])
        - 2.0 * X[:, 0]
        + a * X[:, 0] * X[:, 1]
    )
    signal_norm = float(np.linalg.norm(signal))
    while True:
        noise = rng.standard_normal(n)
        norm = float(np.linalg.norm(noise))
        if norm > 0.0:
            break
    noise *= signal_norm / (snr_sqrt * norm)
    # lifted layout is transformation-major per source column (8 each):
    # linear X_1, square of X_2, tanh of X_3, square root of X_4
    representable = (0 * 8 + 0, 1 * 8 + 3, 2 * 8 + 7, 3 * 8 + 1)
    return Dataset(X=X, Y=signal + noise), representable
