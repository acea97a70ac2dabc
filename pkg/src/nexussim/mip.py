"""Mixed-integer linear programming by branch and bound.

The tree search, branching and incumbent management are self-contained;
each node's LP relaxation is solved with the dual-simplex method.  Node
selection is best-bound with a depth bias (dive on ties), which keeps the
search deterministic for a fixed problem.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

INT_TOL = 1e-6


class InfeasibleProblem(Exception):
    """The root relaxation (hence the problem) has no feasible point."""


class TimeoutNoIncumbent(Exception):
    """Time limit hit before any integer-feasible solution was found."""


@dataclass
class MipProblem:
    c: np.ndarray
    a_ub: sp.csr_matrix | None
    b_ub: np.ndarray
    a_eq: sp.csr_matrix | None
    b_eq: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    integer: np.ndarray          # boolean mask

    @property
    def n(self) -> int:
        return len(self.c)


@dataclass
class MipResult:
    x: np.ndarray
    objective: float
    gap: float
    nodes: int
    status: str                  # "optimal" | "gap_reached" | "time_limit"

    def __post_init__(self):
        self.x = np.asarray(self.x)


@dataclass(order=True)
class _Node:
    sort_key: tuple = field(compare=True)
    fixes: dict = field(compare=False, default_factory=dict)  # idx -> (lb, ub)


def solve_lp(p: MipProblem, lb: np.ndarray | None = None,
             ub: np.ndarray | None = None):
    """Dual-simplex solve of the relaxation with the given bound overrides."""
    lo = p.lb if lb is None else lb
    hi = p.ub if ub is None else ub
    res = linprog(
        p.c,
        A_ub=p.a_ub, b_ub=p.b_ub if p.a_ub is not None else None,
        A_eq=p.a_eq, b_eq=p.b_eq if p.a_eq is not None else None,
        bounds=np.column_stack([lo, hi]),
        method="highs-ds",
    )
    return res


def _bounds_for(p: MipProblem, fixes: dict) -> tuple[np.ndarray, np.ndarray]:
    lb = p.lb.copy()
    ub = p.ub.copy()
    for idx, (lo, hi) in fixes.items():
        lb[idx] = max(lb[idx], lo)
        ub[idx] = min(ub[idx], hi)
    return lb, ub


def _fractional(x: np.ndarray, integer: np.ndarray) -> np.ndarray:
    frac = np.abs(x - np.round(x))
    frac[~integer] = 0.0
    return frac


def dive_for_incumbent(p: MipProblem, x_start: np.ndarray,
                       lb0: np.ndarray | None = None, ub0: np.ndarray | None = None,
                       solve_budget: int = 12, fix_up: float = 0.9,
                       fix_down: float = 1e-6):
    """Relax-and-fix dive: repeatedly pin near-integral variables and re-solve.

    Thresholds are asymmetric on purpose: pinning a variable up is usually
    mild (it buys unneeded capacity) while pinning one down can strand the
    relaxation far from feasibility, so only variables the LP already left
    at their floor are fixed down; forced progress tries the ceiling first
    and falls back to the floor.  Returns (x, objective) for an
    integer-feasible point, or None when every fixing path goes infeasible.
    """
    lb = (p.lb if lb0 is None else lb0).copy()
    ub = (p.ub if ub0 is None else ub0).copy()
    int_idx = np.flatnonzero(p.integer)
    x = x_start
    res_fun = None
    for _ in range(solve_budget):
        lo = np.ceil(lb[int_idx] - INT_TOL)
        hi = np.floor(ub[int_idx] + INT_TOL)
        if np.any(lo > hi):
            return None
        free = lb[int_idx] != ub[int_idx]
        if not free.any():
            break
        vals = x[int_idx]
        to_hi = free & (vals >= hi - (1.0 - fix_up))
        to_lo = free & ~to_hi & (vals <= lo + fix_down)
        if to_hi.any() or to_lo.any():
            lb[int_idx[to_hi]] = hi[to_hi]
            ub[int_idx[to_hi]] = hi[to_hi]
            lb[int_idx[to_lo]] = lo[to_lo]
            ub[int_idx[to_lo]] = lo[to_lo]
            res = solve_lp(p, lb, ub)
            if res.status != 0:
                return None
        else:
            # Force progress on the most-wanted variable: ceiling, then floor.
            cand = np.flatnonzero(free)
            j = int(cand[np.argmax(vals[cand] - hi[cand])])
            res = None
            for pin in (hi[j], lo[j]):
                lb_try, ub_try = lb.copy(), ub.copy()
                lb_try[int_idx[j]] = pin
                ub_try[int_idx[j]] = pin
                attempt = solve_lp(p, lb_try, ub_try)
                if attempt.status == 0:
                    lb, ub, res = lb_try, ub_try, attempt
                    break
            if res is None:
                return None
        x, res_fun = res.x, float(res.fun)
        if _fractional(x, p.integer).max(initial=0.0) <= INT_TOL:
            return x, res_fun
    # Pin whatever is left (upward beyond 0.3: capacity is cheaper than shed).
    free = lb[int_idx] != ub[int_idx]
    if free.any():
        sel = int_idx[free]
        v = np.where(x[sel] - np.floor(x[sel]) >= 0.3, np.ceil(x[sel]), np.floor(x[sel]))
        v = np.clip(v, np.ceil(lb[sel] - INT_TOL), np.floor(ub[sel] + INT_TOL))
        lb[sel] = v
        ub[sel] = v
        res = solve_lp(p, lb, ub)
        if res.status != 0:
            return None
        return res.x, float(res.fun)
    if res_fun is None:
        res_fun = float(p.c @ x)
    return x, res_fun


def solve_mip(p: MipProblem, gap_target: float = 1e-3,
              time_limit: float | None = None,
              node_limit: int = 100000,
              heuristic=None) -> MipResult:
    """Branch and bound to the requested relative optimality gap.

    `heuristic(x_relaxed) -> x_int or None` may propose integer values for
    the integer variables from a fractional relaxation; proposals are
    completed by an LP over the continuous variables.  A relax-and-fix
    dive supplies a starting incumbent, and reduced costs at the root fix
    provably out-of-reach binaries.  On the (deterministic) node limit the
    best incumbent is returned with its honest remaining gap.  Raises
    InfeasibleProblem if the root relaxation is infeasible and
    TimeoutNoIncumbent if the time limit expires with no incumbent.
    """
    start = time.monotonic()
    int_idx = np.flatnonzero(p.integer)

    root = solve_lp(p)
    if root.status == 2:
        raise InfeasibleProblem("root relaxation infeasible")
    if root.status != 0:
        raise RuntimeError(f"root relaxation failed with status {root.status}")
    root_bound = float(root.fun)

    incumbent: np.ndarray | None = None
    inc_obj = np.inf
    nodes_evaluated = 0

    # Global bounds, tightened by root reduced-cost fixing below.
    glb = p.lb.copy()
    gub = p.ub.copy()

    def try_fixing(x_proposal: np.ndarray) -> None:
        """Pin integers to a proposal and dispatch the continuous rest."""
        nonlocal incumbent, inc_obj
        lb, ub = glb.copy(), gub.copy()
        lo_int = np.ceil(lb[int_idx] - INT_TOL)
        hi_int = np.floor(ub[int_idx] + INT_TOL)
        if np.any(lo_int > hi_int):
            return
        vals = np.clip(np.round(x_proposal[int_idx]), lo_int, hi_int)
        lb[int_idx] = vals
        ub[int_idx] = vals
        res = solve_lp(p, lb, ub)
        if res.status == 0 and res.fun < inc_obj - 1e-12:
            incumbent, inc_obj = res.x.copy(), float(res.fun)

    def rel_gap(bound: float) -> float:
        if incumbent is None:
            return np.inf
        return max(0.0, (inc_obj - bound) / max(1e-9, abs(inc_obj)))

    frac = _fractional(root.x, p.integer)
    if frac.max(initial=0.0) <= INT_TOL:
        return MipResult(root.x, root_bound, 0.0, 1, "optimal")

    # Starting incumbents: relax-and-fix dive plus the caller's heuristic.
    dived = dive_for_incumbent(p, root.x)
    if dived is not None:
        x_div, obj_div = dived
        if obj_div < inc_obj:
            incumbent, inc_obj = x_div.copy(), obj_div
    if heuristic is not None:
        proposal = heuristic(root.x)
        if proposal is not None:
            try_fixing(proposal)
    elif incumbent is None:
        try_fixing(root.x)

    if incumbent is not None and rel_gap(root_bound) <= gap_target:
        return MipResult(incumbent, inc_obj, rel_gap(root_bound), 1, "gap_reached")

    # Reduced-cost fixing: binaries whose root reduced cost already prices
    # them past the incumbent can be pinned at their bound for good.
    if incumbent is not None and hasattr(root, "lower") and root.lower is not None:
        slack = inc_obj - root_bound
        rc_low = np.asarray(root.lower.marginals)
        rc_up = np.asarray(root.upper.marginals)
        for j in int_idx:
            if gub[j] - glb[j] != 1.0:
                continue
            if rc_low[j] > slack + 1e-9:
                gub[j] = glb[j]
            elif rc_up[j] < -(slack + 1e-9):
                glb[j] = gub[j]

    counter = 0
    heap: list[_Node] = []

    def push(bound: float, depth: int, fixes: dict) -> None:
        nonlocal counter
        counter += 1
        heapq.heappush(heap, _Node((bound, -depth, counter), fixes))

    def branch(x: np.ndarray, bound: float, depth: int, fixes: dict) -> None:
        frac = _fractional(x, p.integer)
        j = int(np.argmax(frac))
        floor = np.floor(x[j])
        up = dict(fixes)
        up[j] = (floor + 1.0, np.inf)
        down = dict(fixes)
        down[j] = (-np.inf, floor)
        if x[j] - floor >= 0.5:
            push(bound, depth + 1, up)
            push(bound, depth + 1, down)
        else:
            push(bound, depth + 1, down)
            push(bound, depth + 1, up)

    branch(root.x, root_bound, 0, {})
    status = "optimal"
    best_bound = root_bound

    while heap:
        node = heapq.heappop(heap)
        bound, neg_depth, _ = node.sort_key
        open_bounds = [bound] + [n.sort_key[0] for n in heap]
        best_bound = min(open_bounds + ([inc_obj] if incumbent is not None else []))
        if incumbent is not None and rel_gap(best_bound) <= gap_target:
            return MipResult(incumbent, inc_obj, rel_gap(best_bound), nodes_evaluated,
                             "optimal" if rel_gap(best_bound) <= 1e-12 else "gap_reached")
        if incumbent is not None and bound >= inc_obj - 1e-12 * max(1.0, abs(inc_obj)):
            continue
        if time_limit is not None and time.monotonic() - start > time_limit:
            if incumbent is None:
                raise TimeoutNoIncumbent(
                    f"no integer solution after {nodes_evaluated} nodes"
                )
            return MipResult(incumbent, inc_obj, rel_gap(best_bound),
                             nodes_evaluated, "time_limit")
        if nodes_evaluated >= node_limit:
            status = "node_limit"
            break

        lb, ub = _bounds_for(p, node.fixes)
        np.maximum(lb, glb, out=lb)
        np.minimum(ub, gub, out=ub)
        if np.any(lb > ub):
            continue
        res = solve_lp(p, lb, ub)
        nodes_evaluated += 1
        if res.status == 2:
            continue
        if res.status != 0:
            raise RuntimeError(f"node relaxation failed with status {res.status}")
        if incumbent is not None and res.fun >= inc_obj - 1e-12 * max(1.0, abs(inc_obj)):
            continue
        frac = _fractional(res.x, p.integer)
        if frac.max(initial=0.0) <= INT_TOL:
            if res.fun < inc_obj - 1e-12:
                incumbent, inc_obj = res.x.copy(), float(res.fun)
            continue
        if heuristic is not None and (nodes_evaluated <= 10 or nodes_evaluated % 20 == 0):
            proposal = heuristic(res.x)
            if proposal is not None:
                try_fixing(proposal)
        branch(res.x, float(res.fun), -neg_depth, node.fixes)

    if incumbent is None:
        if status == "node_limit":
            raise TimeoutNoIncumbent(f"no integer solution after {nodes_evaluated} nodes")
        # Every leaf pruned infeasible: no integer point exists.
        raise InfeasibleProblem("no integer-feasible solution")
    final_bound = min([n.sort_key[0] for n in heap] + [inc_obj])
    gap = rel_gap(final_bound)
    if status != "node_limit":
        status = "optimal" if not heap else "gap_reached"
    return MipResult(incumbent, inc_obj, gap, nodes_evaluated, status)
