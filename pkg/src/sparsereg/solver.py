"""End-to-end exact sparse regression solves.

Wires together the warm start, the loss oracle and the branch-and-bound
master into the outer-approximation loop, in either single-tree (lazy
cuts inside one tree, the default) or multi-tree (classic re-solve per
cut) mode, then refits ridge coefficients on the winning support.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .master import CutPool, MasterLimits, solve_master
from .oracle import (
    Dataset,
    LossEval,
    SupportVector,
    as_support,
    loss_and_gradient,
    ridge_refit,
)
from .warmstart import solve_dual_relaxation, warm_start_support


@dataclass(frozen=True)
class SolveConfig:
    """Knobs for one solve.

    tol is the absolute convergence tolerance between the master value
    and the incumbent loss; None picks the scale-aware default
    1e-6 * (1 + ||Y||^2 / 2). warm_start picks the first support:
    dual_relaxation (default), lasso, given (uses given_support), or
    none (empty support).
    """

    tol: float | None = None
    time_limit: float = 600.0
    max_cuts: int | None = None
    mode: str = "single_tree"
    warm_start: str = "dual_relaxation"
    given_support: tuple[int, ...] | None = None
    warm_iters: int = 500
    node_lp_iters: int = 20
    max_bound_cuts: int | None = None
    max_nodes: int | None = None

    def __post_init__(self):
        if self.tol is not None and not (self.tol > 0):
            raise ValueError("tol must be positive")
        if not (self.time_limit > 0):
            raise ValueError("time_limit must be positive")
        if self.mode not in ("single_tree", "multi_tree"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.warm_start not in ("dual_relaxation", "lasso", "given", "none"):
            raise ValueError(f"unknown warm start {self.warm_start!r}")


@dataclass
class SolveResult:
    support: SupportVector
    coefficients: np.ndarray
    objective: float
    lower_bound: float
    cuts: int
    nodes: int
    wall_time: float
    status: str  # "optimal" or "time_limit"

    @property
    def indices(self) -> tuple[int, ...]:
        return self.support.indices


def default_tol(dataset: Dataset) -> float:
    """Scale-aware absolute tolerance 1e-6 * (1 + ||Y||^2 / 2)."""
    return 1e-6 * (1.0 + 0.5 * float(dataset.Y @ dataset.Y))


def _prefer(value, support, best_value, best_support) -> bool:
    if value < best_value:
        return True
    if value == best_value and best_support is not None:
        return (len(support), support) < (len(best_support), best_support)
    return False


def _greedy_fill(dataset, k, support, oracle, deadline):
    """Extend a support to k columns, steepest gradient first."""
    current = tuple(support)
    while len(current) < k and time.perf_counter() < deadline:
        ev = oracle(current)
        order = np.argsort(ev.grad, kind="stable")  # most negative first
        pick = next((int(j) for j in order if j not in current), None)
        if pick is None:
            break
        current = tuple(sorted(current + (pick,)))
    return current


def _swap_polish(dataset, support, oracle, penalty, deadline, tries=8):
    """1-swap local search on the support; every oracle call the caller
    makes afterwards still certifies through the tree, this only drives
    the incumbent toward a good corner."""
    best = tuple(support)
    best_total = oracle(best).c + penalty * len(best)
    improved = True
    while improved and time.perf_counter() < deadline:
        improved = False
        for j in best:
            reduced = tuple(i for i in best if i != j)
            ev_r = oracle(reduced)
            order = np.argsort(ev_r.grad, kind="stable")
            candidates = [int(i) for i in order if i not in reduced][:tries]
            for j2 in candidates:
                cand = tuple(sorted(reduced + (j2,)))
                total = oracle(cand).c + penalty * len(cand)
                if total < best_total - 1e-12:
                    best, best_total = cand, total
                    improved = True
                    break
            if improved or time.perf_counter() > deadline:
                break
    return best, best_total


def _warm_support(
    dataset: Dataset,
    gamma: float,
    k: int,
    lambda0: float | None,
    config: SolveConfig,
    deadline: float,
) -> tuple[tuple[int, ...], float]:
    """Initial support plus a valid lower bound (-inf when none)."""
    if config.warm_start == "given":
        if config.given_support is None:
            raise ValueError("warm_start='given' needs given_support")
        idx = as_support(config.given_support, dataset.p)
        if lambda0 is None and len(idx) > k:
            raise ValueError(f"given support has {len(idx)} > k = {k} columns")
        return idx, -math.inf
    if config.warm_start == "none":
        return (), -math.inf
    if config.warm_start == "lasso":
        if lambda0 is not None:
            return (), -math.inf  # no natural lasso start in penalized mode
        from .baselines import lasso_k_sparse

        sol = lasso_k_sparse(dataset, k)
        nz = np.nonzero(sol.coef)[0]
        if nz.shape[0] > k:
            order = np.argsort(-np.abs(sol.coef[nz]), kind="stable")
            nz = nz[order[:k]]
        return tuple(sorted(int(j) for j in nz)), -math.inf
    # dual relaxation: any iterate gives a valid bound
    k_rel = dataset.p if lambda0 is not None else k
    rr = solve_dual_relaxation(
        dataset, gamma, k_rel, iters=config.warm_iters, deadline=deadline
    )
    if lambda0 is not None:
        gains = 0.5 * gamma * (dataset.X.T @ rr.alpha) ** 2
        idx = tuple(int(j) for j in np.nonzero(gains > lambda0)[0])
    else:
        idx = warm_start_support(rr.alpha, dataset, k).indices
    return idx, rr.lower_bound


def _solve(
    dataset: Dataset,
    gamma: float,
    k: int,
    lambda0: float | None,
    config: SolveConfig,
    cut_pool: CutPool | None,
) -> SolveResult:
    t0 = time.perf_counter()
    deadline = t0 + config.time_limit
    tol = config.tol if config.tol is not None else default_tol(dataset)
    penalty = 0.0 if lambda0 is None else float(lambda0)
    k_eff = dataset.p if lambda0 is not None else int(k)
    linear = np.full(dataset.p, penalty) if lambda0 is not None else None

    cache: dict[tuple[int, ...], LossEval] = {}

    def oracle(support: tuple[int, ...]) -> LossEval:
        ev = cache.get(support)
        if ev is None:
            ev = loss_and_gradient(dataset, gamma, support)
            cache[support] = ev
        return ev

    def total(support: tuple[int, ...], c: float) -> float:
        return c + penalty * len(support)

    # reserve at least half the budget for the tree
    warm_deadline = min(deadline, t0 + 0.5 * config.time_limit)
    s1, relax_bound = _warm_support(dataset, gamma, k_eff, lambda0, config, warm_deadline)
    # drive the first incumbent into a good corner: fill the budget
    # greedily, then 1-swap until locally optimal
    if lambda0 is None and len(s1) < k_eff:
        s1 = _greedy_fill(dataset, k_eff, s1, oracle, warm_deadline)
    ev1 = oracle(s1)
    inc_support, inc_value = s1, total(s1, ev1.c)
    if 0 < len(s1) < dataset.p:
        s_pol, pol_total = _swap_polish(dataset, s1, oracle, penalty, warm_deadline)
        if _prefer(pol_total, s_pol, inc_value, inc_support):
            inc_support, inc_value = s_pol, pol_total

    pool = cut_pool if cut_pool is not None else CutPool(dataset.p)
    if pool.p != dataset.p:
        raise ValueError(f"cut pool is over p={pool.p}, expected {dataset.p}")
    # pooled anchors carry their true loss; a reused pool may already
    # hold a better feasible support than the warm start
    for cut in pool.cuts:
        if len(cut.anchor) <= k_eff:
            v = total(cut.anchor, cut.value)
            if _prefer(v, cut.anchor, inc_value, inc_support):
                inc_support, inc_value = cut.anchor, v
    if not pool.contains(s1):
        pool.add(ev1, s1)
    if inc_support != s1 and not pool.contains(inc_support):
        pool.add(oracle(inc_support), inc_support)

    limits = MasterLimits(
        tol=tol,
        deadline=deadline,
        max_nodes=config.max_nodes,
        node_lp_iters=config.node_lp_iters,
        max_bound_cuts=config.max_bound_cuts,
    )
    lower = relax_bound
    nodes = 0
    if config.mode == "single_tree":
        ms = solve_master(
            pool,
            k_eff,
            incumbent=(inc_support, inc_value),
            oracle_callback=oracle,
            mode="single_tree",
            limits=limits,
            linear=linear,
        )
        inc_support = ms.s.indices
        inc_value = total(inc_support, oracle(inc_support).c)
        lower = max(lower, ms.lower_bound)
        nodes = ms.nodes_explored
        status = ms.status
    else:
        status = "optimal"
        while True:
            if time.perf_counter() > deadline:
                status = "time_limit"
                break
            if config.max_cuts is not None and pool.size >= config.max_cuts:
                status = "time_limit"
                break
            ms = solve_master(
                pool,
                k_eff,
                incumbent=None,
                oracle_callback=None,
                mode="multi_tree",
                limits=replace(limits, tol=0.0),
                linear=linear,
            )
            nodes += ms.nodes_explored
            lower = max(lower, ms.lower_bound)
            if ms.status == "time_limit":
                status = "time_limit"
                break
            s_t = ms.s.indices
            ev = oracle(s_t)
            v = total(s_t, ev.c)
            if _prefer(v, s_t, inc_value, inc_support):
                inc_support, inc_value = s_t, v
            if lower >= inc_value - tol:
                break
            if not pool.add(ev, s_t):
                # anchor already pooled: the master value should have
                # certified convergence; stop rather than cycle
                break

    # ridge refit on the winning support; drop exactly-zero coefficients
    # (degenerate responses can make whole columns irrelevant)
    w = ridge_refit(dataset, gamma, inc_support)
    trimmed = tuple(j for j in inc_support if w[j] != 0.0)
    if trimmed != inc_support:
        inc_support = trimmed
        inc_value = total(inc_support, oracle(inc_support).c)
    objective = inc_value
    lower = min(lower, objective)
    return SolveResult(
        support=SupportVector(indices=inc_support, p=dataset.p),
        coefficients=w,
        objective=objective,
        lower_bound=lower,
        cuts=pool.size,
        nodes=nodes,
        wall_time=time.perf_counter() - t0,
        status=status,
    )


def solve_cardinality(
    dataset: Dataset,
    gamma: float,
    k: int,
    config: SolveConfig | None = None,
    cut_pool: CutPool | None = None,
) -> SolveResult:
    """Globally minimize the ridge loss over supports of size at most k.

    An existing cut pool for the same (dataset, gamma) may be passed in
    and will be extended; cuts do not depend on k, so pools can be
    shared across budgets (useful in cross-validation loops).
    """
    k = int(k)
    if not (1 <= k <= dataset.p):
        raise ValueError(f"k must be in [1, {dataset.p}], got {k}")
    return _solve(dataset, float(gamma), k, None, config or SolveConfig(), cut_pool)


def solve_penalized(
    dataset: Dataset,
    gamma: float,
    lambda0: float,
    config: SolveConfig | None = None,
    cut_pool: CutPool | None = None,
) -> SolveResult:
    """Globally minimize loss(s) + lambda0 * |s| over all binary supports.

    The reported objective includes the lambda0 * |support| term; the
    per-column price rides along as a linear term in the master.
    """
    lambda0 = float(lambda0)
    if lambda0 < 0:
        raise ValueError(f"lambda0 must be >= 0, got {lambda0}")
    return _solve(dataset, float(gamma), dataset.p, lambda0, config or SolveConfig(), cut_pool)
