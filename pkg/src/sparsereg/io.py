"""File formats: numeric CSV grids, truth/result JSON documents.

All user-facing column indices are 1-based; conversion happens here
and nowhere else.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .oracle import Dataset
from .solver import SolveResult


def to_one_based(indices: Iterable[int]) -> list[int]:
    return [int(j) + 1 for j in indices]


def from_one_based(indices: Iterable[int]) -> list[int]:
    out = [int(j) - 1 for j in indices]
    if any(j < 0 for j in out):
        raise ValueError("1-based indices must be >= 1")
    return out


def read_matrix_csv(path: str | Path) -> np.ndarray:
    """Headerless numeric CSV, one matrix row per line."""
    arr = np.loadtxt(path, delimiter=",", ndmin=2)
    return np.asarray(arr, dtype=float)


def read_vector_csv(path: str | Path) -> np.ndarray:
    arr = np.loadtxt(path, delimiter=",")
    return np.atleast_1d(np.asarray(arr, dtype=float)).ravel()


def write_matrix_csv(path: str | Path, arr: np.ndarray) -> None:
    np.savetxt(path, np.atleast_2d(arr), delimiter=",", fmt="%.17g")


def write_vector_csv(path: str | Path, arr: np.ndarray) -> None:
    np.savetxt(path, np.asarray(arr).ravel(), fmt="%.17g")


def load_dataset(x_path: str | Path, y_path: str | Path) -> Dataset:
    return Dataset(X=read_matrix_csv(x_path), Y=read_vector_csv(y_path))


def write_truth_json(path: str | Path, support: Sequence[int], signs: Sequence[int],
                     sigma2_effective: float | None = None) -> None:
    doc = {
        "support": to_one_based(support),
        "signs": [int(s) for s in signs],
    }
    if sigma2_effective is not None:
        doc["sigma2_effective"] = float(sigma2_effective)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def result_to_json(result: SolveResult, config_echo: dict, feature_names=None) -> dict:
    doc = {
        "objective": result.objective,
        "lower_bound": result.lower_bound,
        "support": to_one_based(result.indices),
        "coefficients": [float(v) for v in result.coefficients],
        "cuts": result.cuts,
        "nodes": result.nodes,
        "wall_time_s": result.wall_time,
        "status": result.status,
        "config": config_echo,
    }
    if feature_names is not None:
        doc["selected_features"] = [feature_names[j] for j in result.indices]
    return doc


def write_result_json(path: str | Path, result: SolveResult, config_echo: dict,
                      feature_names=None) -> None:
    doc = result_to_json(result, config_echo, feature_names)
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
