"""LP relaxation and branch-and-bound engine."""
from .bnb import (
    STATUS_INFEASIBLE,
    STATUS_LIMIT,
    STATUS_OPTIMAL,
    BnbResult,
    TraceEvent,
    branch_and_bound,
    compute_root_gap,
)
from .lp import LpRelaxation, LpSolution, solve_lp
from .simplex import simplex

__all__ = [
    "BnbResult",
    "LpRelaxation",
    "LpSolution",
    "STATUS_INFEASIBLE",
    "STATUS_LIMIT",
    "STATUS_OPTIMAL",
    "TraceEvent",
    "branch_and_bound",
    "compute_root_gap",
    "simplex",
    "solve_lp",
]
