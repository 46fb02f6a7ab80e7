"""Master problem of the cutting-plane loop.

Minimizes the pointwise max of pooled affine minorants of the loss over
supports with at most k selected columns, by best-first branch and
bound. Node relaxations are solved by a Lagrangian scheme that exploits
the closed form of minimizing a linear function over the budgeted box
(pick the most negative coefficients), so no LP solver is involved. In
single-tree mode an oracle callback is consulted at integer candidates
and new cuts are injected into the shared pool on the fly.

An optional linear term turns the same machinery into the master of the
l0-penalized variant (budget k = p plus a per-column price).
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .oracle import LossEval, SupportVector, as_support


@dataclass(frozen=True)
class Cut:
    """Affine minorant value + grad . (s - anchor) of the loss."""

    anchor: tuple[int, ...]
    value: float
    grad: np.ndarray
    constant: float  # value - grad . anchor, precomputed


class CutPool:
    """Append-only pool of cuts with a dense gradient matrix view.

    Anchors are deduplicated: re-adding an existing anchor is a no-op
    that sets duplicate_warning (cuts are exact, so a duplicate signals
    numerical trouble in the caller's loop).
    """

    def __init__(self, p: int):
        self.p = int(p)
        self._rows: dict[tuple[int, ...], int] = {}
        self._G = np.empty((0, self.p))
        self._b = np.empty(0)
        self.cuts: list[Cut] = []
        self.duplicate_warning = False

    @property
    def size(self) -> int:
        return len(self.cuts)

    @property
    def G(self) -> np.ndarray:
        return self._G[: self.size]

    @property
    def b(self) -> np.ndarray:
        return self._b[: self.size]

    def __len__(self) -> int:
        return self.size

    def add(self, ev: LossEval, anchor) -> bool:
        """Pool a cut anchored at the given support. Returns False (and
        flags) when the anchor is already pooled."""
        idx = as_support(anchor, self.p)
        if idx in self._rows:
            self.duplicate_warning = True
            return False
        grad = np.asarray(ev.grad, dtype=float)
        if grad.shape != (self.p,):
            raise ValueError(f"gradient has shape {grad.shape}, expected ({self.p},)")
        constant = float(ev.c) - float(grad[list(idx)].sum())
        cut = Cut(anchor=idx, value=float(ev.c), grad=grad, constant=constant)
        m = self.size
        if m == self._G.shape[0]:
            grow = max(16, 2 * m)
            G = np.empty((grow, self.p))
            b = np.empty(grow)
            G[:m] = self._G[:m]
            b[:m] = self._b[:m]
            self._G, self._b = G, b
        self._G[m] = grad
        self._b[m] = constant
        self._rows[idx] = m
        self.cuts.append(cut)
        return True

    def contains(self, support) -> bool:
        return as_support(support, self.p) in self._rows

    def evaluate(self, support) -> float:
        """Pointwise max of the pooled cuts at a binary support."""
        if self.size == 0:
            raise ValueError("cut pool is empty")
        idx = as_support(support, self.p)
        vals = self.b.copy()
        if idx:
            vals += self.G[:, list(idx)].sum(axis=1)
        return float(vals.max())


def add_cut(pool: CutPool, ev: LossEval, anchor) -> CutPool:
    """Pool the cut anchored at the given support and return the pool."""
    pool.add(ev, anchor)
    return pool


@dataclass(frozen=True)
class Node:
    """Branch-and-bound state: indices fixed to one / to zero."""

    fixed_one: tuple[int, ...] = ()
    fixed_zero: tuple[int, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.fixed_one) + len(self.fixed_zero)


@dataclass
class MasterSolution:
    s: SupportVector
    eta: float
    nodes_explored: int
    status: str  # "optimal" or "time_limit"
    lower_bound: float


@dataclass
class MasterLimits:
    tol: float = 0.0
    deadline: float | None = None
    max_nodes: int | None = None
    node_lp_iters: int = 20
    # bound nodes against at most this many of the newest cuts (any cut
    # subset still minorizes the loss, so bounds stay valid); None = all
    max_bound_cuts: int | None = None


@dataclass
class _NodeBound:
    bound: float
    lam: np.ndarray
    candidate: tuple[int, ...]
    agg: np.ndarray  # aggregated coefficients at the bounding weights


def _project_simplex(v: np.ndarray) -> np.ndarray:
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u * np.arange(1, v.shape[0] + 1) > css)[0][-1]
    return np.maximum(v - css[rho] / (rho + 1.0), 0.0)


def _inner_min(
    a: np.ndarray,
    fixed_one: list[int],
    free: np.ndarray,
    r: int,
) -> tuple[float, np.ndarray]:
    """Minimize a . s over the node's relaxed selections.

    Fixed-one coordinates contribute unconditionally; among the free
    ones, up to r of the most negative coefficients are taken (zeros
    are never taken). Returns the value and the chosen free indices.
    The minimizer is integral, so it doubles as a feasible candidate.
    """
    val = float(a[fixed_one].sum()) if fixed_one else 0.0
    if r <= 0 or free.size == 0:
        return val, np.empty(0, dtype=np.intp)
    af = a[free]
    if r < af.size:
        part = np.argpartition(af, r - 1)[:r]
    else:
        part = np.arange(af.size)
    chosen = part[af[part] < 0.0]
    val += float(af[chosen].sum())
    return val, free[chosen]


def dual_value(
    pool: CutPool,
    node: Node,
    k: int,
    lam: np.ndarray,
    linear: np.ndarray | None = None,
) -> float:
    """Lower bound from a fixed simplex weight vector over the cuts
    (weak duality: valid for any lam in the simplex)."""
    a = lam @ pool.G
    if linear is not None:
        a = a + linear
    fixed_one = list(node.fixed_one)
    blocked = np.zeros(pool.p, dtype=bool)
    blocked[fixed_one] = True
    blocked[list(node.fixed_zero)] = True
    free = np.nonzero(~blocked)[0]
    val, _ = _inner_min(a, fixed_one, free, k - len(fixed_one))
    return float(lam @ pool.b) + val


def node_bound(
    pool: CutPool,
    node: Node,
    k: int,
    linear: np.ndarray | None = None,
    iters: int = 20,
    first_cut: int = 0,
) -> _NodeBound:
    """Lower bound on the node by projected supergradient ascent over
    simplex weights on the cuts; infeasible nodes get bound +inf.

    Seeds the ascent at the best single cut, which makes the bound
    exact whenever one cut dominates (and always for a single cut).
    first_cut > 0 restricts the bound to the newer pool rows; a cut
    subset still minorizes the loss, so the bound stays valid.
    """
    if pool.size == 0:
        raise ValueError("cut pool is empty")
    first_cut = max(0, min(int(first_cut), pool.size - 1))
    m = pool.size - first_cut
    fixed_one = list(node.fixed_one)
    r = k - len(fixed_one)
    if r < 0:
        return _NodeBound(math.inf, np.empty(0), (), np.empty(0))
    blocked = np.zeros(pool.p, dtype=bool)
    blocked[fixed_one] = True
    blocked[list(node.fixed_zero)] = True
    free = np.nonzero(~blocked)[0]

    G, b = pool.G[first_cut:], pool.b[first_cut:]

    def evaluate(lam: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
        a = lam @ G
        if linear is not None:
            a = a + linear
        val, chosen = _inner_min(a, fixed_one, free, r)
        return float(lam @ b) + val, chosen, a

    # single-cut seeding, vectorized over cuts
    A = G + linear if linear is not None else G
    base = b.copy()
    if fixed_one:
        base = base + A[:, fixed_one].sum(axis=1)
    if r > 0 and free.size:
        Af = np.minimum(A[:, free], 0.0)
        if r < free.size:
            take = np.partition(Af, r - 1, axis=1)[:, :r]
        else:
            take = Af
        base = base + take.sum(axis=1)
    seed = int(np.argmax(base))

    lam = np.zeros(m)
    lam[seed] = 1.0
    best_val, best_chosen, best_a = evaluate(lam)
    best_lam = lam.copy()
    if m > 1 and iters > 0:
        for t in range(1, iters + 1):
            val, chosen, _ = evaluate(lam)
            if val > best_val:
                best_val, best_chosen, best_lam = val, chosen, lam.copy()
            # supergradient: per-cut value at the inner minimizer
            g = b.copy()
            sel = fixed_one + list(chosen)
            if sel:
                g = g + G[:, sel].sum(axis=1)
            norm = float(np.linalg.norm(g))
            if norm == 0.0:
                break
            lam = _project_simplex(lam + (0.5 / math.sqrt(t)) * (g / norm))
        val, chosen, a = evaluate(lam)
        if val > best_val:
            best_val, best_chosen, best_lam = val, chosen, lam.copy()
            best_a = a
        else:
            _, _, best_a = evaluate(best_lam)
    candidate = tuple(sorted(fixed_one + [int(j) for j in best_chosen]))
    return _NodeBound(best_val, best_lam, candidate, best_a)


def _prefer(value: float, support: tuple[int, ...], best_value: float, best_support) -> bool:
    """Strictly better value wins; exact ties prefer fewer columns,
    then the lexicographically smallest index tuple."""
    if value < best_value:
        return True
    if value == best_value and best_support is not None:
        return (len(support), support) < (len(best_support), best_support)
    return False


def solve_master(
    pool: CutPool,
    k: int,
    incumbent: Optional[tuple] = None,
    oracle_callback: Optional[Callable[[tuple[int, ...]], LossEval]] = None,
    mode: str = "single_tree",
    limits: MasterLimits | None = None,
    linear: np.ndarray | None = None,
) -> MasterSolution:
    """Branch-and-bound over supports of size <= k.

    multi_tree: minimizes the current pooled max exactly, no callback.
    single_tree: whenever an integer candidate's pooled value drops
    below the incumbent, the true loss is queried through the callback
    and the fresh cut joins the shared pool before the node is looked
    at again; on return the incumbent's pooled value matches its true
    loss, so the outer cutting-plane loop has converged in one tree.

    Hitting a time or node limit returns the best incumbent plus a
    valid global lower bound, with status "time_limit".
    """
    if pool.size == 0:
        raise ValueError("cut pool is empty; add a warm-start cut first")
    if mode not in ("single_tree", "multi_tree"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "single_tree" and oracle_callback is None:
        raise ValueError("single_tree mode needs an oracle callback")
    limits = limits or MasterLimits()
    p = pool.p
    k = int(k)
    if not (0 <= k <= p):
        raise ValueError(f"k must be in [0, {p}], got {k}")

    lin_at = (lambda s: float(linear[list(s)].sum()) if s else 0.0) if linear is not None else (lambda s: 0.0)

    if incumbent is not None:
        inc_support = as_support(incumbent[0], p)
        inc_value = float(incumbent[1])
    else:
        inc_support, inc_value = None, math.inf

    seq = 0
    # heap entries: (bound key, -depth, seq, node, cached bound, pool size at compute)
    heap: list[tuple[float, int, int, Node, Optional[_NodeBound], int]] = []
    root = Node()
    heapq.heappush(heap, (-math.inf, 0, seq, root, None, -1))
    retired_min = math.inf
    nodes_explored = 0
    status = "optimal"
    stop_bound = None

    while heap:
        key, _, _, node, nb, at_size = heapq.heappop(heap)
        if key >= inc_value - limits.tol:
            # best-first: every remaining node is at least this good
            retired_min = min(retired_min, key)
            stop_bound = key
            break
        if limits.deadline is not None and time.perf_counter() > limits.deadline:
            status = "time_limit"
            retired_min = min(retired_min, key)
            break
        if limits.max_nodes is not None and nodes_explored >= limits.max_nodes:
            status = "time_limit"
            retired_min = min(retired_min, key)
            break

        window = 0
        if limits.max_bound_cuts is not None:
            window = max(0, pool.size - limits.max_bound_cuts)
        if nb is None or at_size != pool.size:
            nb = node_bound(
                pool, node, k, linear=linear, iters=limits.node_lp_iters, first_cut=window
            )
            if nb.bound < math.inf and heap and nb.bound > heap[0][0]:
                # bound rose above the best open node: restore best-first order
                seq += 1
                heapq.heappush(heap, (nb.bound, -node.depth, seq, node, nb, pool.size))
                continue
        if nb.bound == math.inf:  # infeasible fixing
            continue
        nodes_explored += 1
        # re-examination loop: cut injections can lift the bound
        pruned = False
        while True:
            if nb.bound >= inc_value - limits.tol:
                retired_min = min(retired_min, nb.bound)
                pruned = True
                break
            cand = nb.candidate
            cand_pooled = pool.evaluate(cand) + lin_at(cand)
            if oracle_callback is not None and cand_pooled < inc_value - limits.tol:
                ev = oracle_callback(cand)
                true_val = ev.c + lin_at(cand)
                if _prefer(true_val, cand, inc_value, inc_support):
                    inc_support, inc_value = cand, true_val
                if not pool.contains(cand):
                    pool.add(ev, cand)
                    if limits.max_bound_cuts is not None:
                        window = max(0, pool.size - limits.max_bound_cuts)
                    nb = node_bound(
                        pool, node, k, linear=linear,
                        iters=limits.node_lp_iters, first_cut=window,
                    )
                    continue
            elif oracle_callback is None:
                if _prefer(cand_pooled, cand, inc_value, inc_support):
                    inc_support, inc_value = cand, cand_pooled
            break
        if pruned:
            continue

        free_count = p - node.depth
        if free_count == 0 or len(node.fixed_one) >= k:
            retired_min = min(retired_min, nb.bound)  # leaf, candidate covered it
            continue

        blocked = set(node.fixed_one) | set(node.fixed_zero)
        absa = np.abs(nb.agg)
        absa[list(blocked)] = -1.0
        j = int(np.argmax(absa))  # ties resolve to the lowest index
        child_one = Node(
            fixed_one=tuple(sorted(node.fixed_one + (j,))),
            fixed_zero=node.fixed_zero,
        )
        child_zero = Node(
            fixed_one=node.fixed_one,
            fixed_zero=tuple(sorted(node.fixed_zero + (j,))),
        )
        for child in (child_one, child_zero):
            seq += 1
            heapq.heappush(heap, (nb.bound, -child.depth, seq, child, None, -1))

    if inc_support is None:
        raise RuntimeError("master finished without any feasible candidate")

    open_min = min((entry[0] for entry in heap), default=math.inf)
    if stop_bound is not None:
        open_min = min(open_min, stop_bound)
    lower = min(open_min, retired_min, inc_value)
    if lower == -math.inf:  # root never evaluated (immediate limit)
        lower = -math.inf if status == "time_limit" else inc_value
    eta = pool.evaluate(inc_support) + lin_at(inc_support)
    return MasterSolution(
        s=SupportVector(indices=inc_support, p=p),
        eta=eta,
        nodes_explored=nodes_explored,
        status=status,
        lower_bound=lower,
    )
