"""Best-bound branch and bound over binary variables."""
from __future__ import annotations

import heapq
import itertools
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .lp import LpRelaxation
from .simplex import OPTIMAL

INT_TOL = 1e-6
PRUNE_TOL = 1e-9

STATUS_OPTIMAL, STATUS_INFEASIBLE, STATUS_LIMIT = "optimal", "infeasible", "limit"


@dataclass(frozen=True)
class TraceEvent:
    nodes: int
    lb: float
    ub: float
    t_ms: float

    def to_json(self) -> str:
        def num(v):
            return v if math.isfinite(v) else None

        return json.dumps({"nodes": self.nodes, "lb": num(self.lb), "ub": num(self.ub), "t_ms": round(self.t_ms, 3)})


@dataclass
class BnbResult:
    status: str
    x: np.ndarray | None
    objective: float  # incumbent value (upper bound)
    best_bound: float  # lower bound
    root_bound: float
    nodes_to_incumbent: int
    nodes_to_proof: int
    t_find: float = math.nan
    t_prove: float = math.nan
    trace: list = field(default_factory=list)
    root_x: np.ndarray | None = None

    @property
    def gap(self) -> float:
        """Relative gap between incumbent and best bound."""
        if not math.isfinite(self.objective):
            return math.inf
        diff = abs(self.objective - self.best_bound)
        return diff / abs(self.objective) if self.objective != 0 else diff

    def write_trace(self, path) -> None:
        with open(path, "w") as fh:
            for ev in self.trace:
                fh.write(ev.to_json() + "\n")


def branch_and_bound(
    model,
    gap_tol: float = 0.0,
    time_limit: float | None = None,
    node_limit: int | None = None,
    lp_method: str = "simplex",
) -> BnbResult:
    """Minimise ``model`` with binaries enforced by branching.

    Open nodes are explored best bound first (ties in creation order). A
    node branches on the fractional binary closest to 0.5 (ties: lowest
    declared index) into a 0-child and a 1-child; nodes whose LP bound is
    within ``PRUNE_TOL`` of the incumbent are pruned. A node counts as
    explored when its LP is solved.
    """
    t0 = time.perf_counter()
    rel = LpRelaxation(model, lp_method)
    bins = model.binary_indices()
    base_lb, base_ub = rel.lb.copy(), rel.ub.copy()

    seq = itertools.count()
    heap = [(-math.inf, next(seq), ())]
    ub_val, incumbent = math.inf, None
    lb_val = -math.inf
    root_bound, root_x = math.nan, None
    nodes = nodes_inc = 0
    t_find = math.nan
    trace: list[TraceEvent] = []
    status = None

    def elapsed():
        return time.perf_counter() - t0

    def log():
        trace.append(TraceEvent(nodes, lb_val, ub_val, 1000 * elapsed()))

    while heap:
        if node_limit is not None and nodes >= node_limit:
            status = STATUS_LIMIT
            break
        if time_limit is not None and elapsed() >= time_limit:
            status = STATUS_LIMIT
            break
        bound, _, fixes = heapq.heappop(heap)
        if bound >= ub_val - PRUNE_TOL:
            heap.clear()
            break
        lb, ub = base_lb.copy(), base_ub.copy()
        for j, v in fixes:
            lb[j] = ub[j] = v
        sol = rel.solve(lb, ub)
        nodes += 1
        if nodes == 1:
            root_bound = sol.objective if sol.status == OPTIMAL else math.inf
            root_x = sol.x
        if sol.status == OPTIMAL and sol.objective < ub_val - PRUNE_TOL:
            xb = sol.x[bins]
            frac = np.abs(xb - np.round(xb))
            if frac.size == 0 or frac.max() <= INT_TOL:
                ub_val, incumbent = sol.objective, sol.x.copy()
                incumbent[bins] = np.round(incumbent[bins])
                nodes_inc, t_find = nodes, elapsed()
            else:
                cand = np.flatnonzero(frac > INT_TOL)
                k = cand[np.argmin(np.abs(xb[cand] - 0.5))]
                j = int(bins[k])
                heapq.heappush(heap, (sol.objective, next(seq), fixes + ((j, 0.0),)))
                heapq.heappush(heap, (sol.objective, next(seq), fixes + ((j, 1.0),)))
        new_lb = min(heap[0][0], ub_val) if heap else ub_val
        if nodes == 1 and sol.status == OPTIMAL:
            new_lb = min(sol.objective, ub_val)
        new_lb = max(new_lb, lb_val)
        if new_lb != lb_val or (trace and trace[-1].ub != ub_val) or not trace:
            lb_val = new_lb
            log()
        if math.isfinite(ub_val) and ub_val - lb_val <= gap_tol * abs(ub_val):
            heap.clear()
            break

    if status is None:
        status = STATUS_OPTIMAL if incumbent is not None else STATUS_INFEASIBLE
        lb_val = ub_val
        if not trace or trace[-1].lb != lb_val or trace[-1].ub != ub_val:
            log()
    return BnbResult(
        status=status,
        x=incumbent,
        objective=ub_val,
        best_bound=lb_val,
        root_bound=root_bound,
        nodes_to_incumbent=nodes_inc,
        nodes_to_proof=nodes,
        t_find=t_find,
        t_prove=elapsed(),
        trace=trace,
        root_x=root_x,
    )


def compute_root_gap(result: BnbResult, with_flag: bool = False):
    """Relative root gap ``|opt - root| / |opt|`` against the proven optimum.

    When the optimum is zero the absolute gap is returned; ``with_flag``
    returns ``(gap, is_absolute)``.
    """
    if result.status != STATUS_OPTIMAL:
        raise ValueError("root gap needs a proven optimum")
    opt, root = result.objective, result.root_bound
    if opt == 0:
        gap, absolute = abs(opt - root), True
    else:
        gap, absolute = abs(opt - root) / abs(opt), False
    return (gap, absolute) if with_flag else gap
