"""Nonlinear feature lifting.

Each source column expands into eight fixed transformations; the
solver then runs on the lifted matrix unchanged, which is all sparse
nonlinear regression needs. Lifted columns are grouped by source
column, dictionary order within each group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOG_CLAMP = 1e-12  # |x| = 0 feeds log(LOG_CLAMP) instead of -inf

_DICTIONARY = (
    ("X_{j}", lambda x: x),
    ("sqrt(|X_{j}|)", lambda x: np.sqrt(np.abs(x))),
    ("log(|X_{j}|)", lambda x: np.log(np.where(x == 0.0, LOG_CLAMP, np.abs(x)))),
    ("X_{j}^2", lambda x: x**2),
    ("X_{j}^3", lambda x: x**3),
    ("cos(10*pi*X_{j})", lambda x: np.cos(10.0 * math.pi * x)),
    ("sin(X_{j})", lambda x: np.sin(x)),
    ("tanh(2*X_{j})", lambda x: np.tanh(2.0 * x)),
)

TRANSFORMS_PER_COLUMN = len(_DICTIONARY)


@dataclass(frozen=True)
class FeatureExpansion:
    """Lifted matrix (n x 8p) plus one label per lifted column."""

    psi_x: np.ndarray
    names: tuple[str, ...]

    def column_of(self, name: str) -> int:
        return self.names.index(name)


def feature_name(column: int, transform: int) -> str:
    """Label of a lifted column; source columns are 1-based in labels."""
    return _DICTIONARY[transform][0].format(j=column + 1)


def lifted_index(column: int, transform: int) -> int:
    return column * TRANSFORMS_PER_COLUMN + transform


def expand_features(X: np.ndarray, standardize: bool = False) -> FeatureExpansion:
    """Apply the transformation dictionary column-wise.

    standardize=True rescales every lifted column to unit variance
    (polynomial and log features live on very different scales, which
    changes what the ridge weight means); off by default.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-d, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("X must be finite")
    n, p = X.shape
    psi = np.empty((n, p * TRANSFORMS_PER_COLUMN))
    names = []
    for j in range(p):
        col = X[:, j]
        for t, (_, fn) in enumerate(_DICTIONARY):
            psi[:, lifted_index(j, t)] = fn(col)
            names.append(feature_name(j, t))
    if standardize:
        std = psi.std(axis=0)
        std[std == 0.0] = 1.0
        psi = psi / std
    return FeatureExpansion(psi_x=psi, names=tuple(names))
