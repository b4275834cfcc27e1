"""LP relaxation front end over the internal simplex or HiGHS."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .simplex import INFEASIBLE, ITERATION_LIMIT, OPTIMAL, UNBOUNDED, simplex

METHODS = ("simplex", "highs")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float
    iterations: int = 0


class LpRelaxation:
    """The model's LP relaxation in array form, re-solvable under new bounds."""

    def __init__(self, model, method: str = "simplex"):
        if method not in METHODS:
            raise ValueError(f"unknown LP method {method!r}; choose from {METHODS}")
        self.model = model
        self.method = method
        arr = model.to_arrays()
        self.c = arr["c"]
        self.A_ub, self.b_ub = arr["A_ub"], arr["b_ub"]
        self.A_eq, self.b_eq = arr["A_eq"], arr["b_eq"]
        self.lb, self.ub = arr["lb"], arr["ub"]

    def solve(self, lb=None, ub=None) -> LpSolution:
        lb = self.lb if lb is None else lb
        ub = self.ub if ub is None else ub
        if self.method == "simplex":
            status, x, obj, it = simplex(
                self.c, self.A_ub, self.b_ub, self.A_eq, self.b_eq, lb, ub
            )
            return LpSolution(status, x, obj, it)
        res = linprog(
            self.c,
            A_ub=self.A_ub if self.A_ub.shape[0] else None,
            b_ub=self.b_ub if self.A_ub.shape[0] else None,
            A_eq=self.A_eq if self.A_eq.shape[0] else None,
            b_eq=self.b_eq if self.A_eq.shape[0] else None,
            bounds=np.column_stack([lb, ub]),
            method="highs-ds",
        )
        status = {0: OPTIMAL, 1: ITERATION_LIMIT, 2: INFEASIBLE, 3: UNBOUNDED}.get(res.status, INFEASIBLE)
        if status != OPTIMAL:
            return LpSolution(status, None, np.nan, int(getattr(res, "nit", 0)))
        return LpSolution(status, np.clip(res.x, lb, ub), float(res.fun), int(res.nit))


def solve_lp(model, method: str = "simplex") -> LpSolution:
    """Solve the LP relaxation of ``model`` (binaries relaxed to [0, 1])."""
    return LpRelaxation(model, method).solve()
