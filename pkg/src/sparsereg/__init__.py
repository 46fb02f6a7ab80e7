"""Exact sparse linear regression by outer-approximation cutting planes.

The loss of a column subset is evaluated through a small capacitance
system, lower-bounded by affine cuts, and minimized over supports by a
custom branch-and-bound with lazy cut injection. A dual relaxation
supplies warm starts and certified bounds, a coordinate-descent lasso
serves as the heuristic baseline, and synthetic generators plus an
experiment harness reproduce recovery and runtime phase transitions at
desk scale.
"""

from .baselines import CDSolution, PathConfig, PathSolution, elastic_net_cd, lasso_k_sparse
from .datagen import (
    SyntheticInstance,
    SyntheticSpec,
    Thresholds,
    generate,
    generate_nonlinear,
    theoretical_thresholds,
)
from .features import FeatureExpansion, expand_features
from .master import Cut, CutPool, MasterLimits, MasterSolution, Node, add_cut, node_bound, solve_master
from .metrics import CVResult, RecoveryScore, cross_validate_k, support_metrics
from .oracle import (
    Dataset,
    Hyperparams,
    LossEval,
    SupportVector,
    enumerate_optimal,
    loss_and_gradient,
    ridge_loss_dense,
)
from .solver import SolveConfig, SolveResult, solve_cardinality, solve_penalized
from .warmstart import RelaxationResult, solve_dual_relaxation, warm_start_support

__version__ = "0.1.0"

__all__ = [
    "CDSolution",
    "CVResult",
    "Cut",
    "CutPool",
    "Dataset",
    "FeatureExpansion",
    "Hyperparams",
    "LossEval",
    "MasterLimits",
    "MasterSolution",
    "Node",
    "PathConfig",
    "PathSolution",
    "RecoveryScore",
    "RelaxationResult",
    "SolveConfig",
    "SolveResult",
    "SupportVector",
    "SyntheticInstance",
    "SyntheticSpec",
    "Thresholds",
    "add_cut",
    "cross_validate_k",
    "elastic_net_cd",
    "enumerate_optimal",
    "expand_features",
    "generate",
    "generate_nonlinear",
    "lasso_k_sparse",
    "loss_and_gradient",
    "node_bound",
    "ridge_loss_dense",
    "solve_cardinality",
    "solve_dual_relaxation",
    "solve_master",
    "solve_penalized",
    "support_metrics",
    "theoretical_thresholds",
    "warm_start_support",
]
