"""Exhaustive reference computations for tiny instances.

Deliberately slow and independent of the encoders' solving path: plans are
enumerated by depth-first search, satisfaction is checked with
:func:`stlflow.formula.evaluate`, and fragment feasibility for fixed
predicate values is decided by HiGHS (via SciPy), not by the internal
solver.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .formula import evaluate
from .logictree import z_name
from .model import MblpModel


class OracleRefusal(RuntimeError):
    """Instance too large for exhaustive enumeration."""


@dataclass(frozen=True)
class JointPlan:
    sequences: dict  # robot -> site per slot (None while in transit)
    paths: dict  # robot -> edge-index path in its graph
    cost: float


def enumerate_plans(graphs: dict, cap: int = 100_000) -> list:
    """All joint plans: every source-to-sink path per robot, crossed."""
    per_robot = {}
    total = 1
    for rid, g in graphs.items():
        try:
            per_robot[rid] = g.paths(cap=cap)
        except OverflowError:
            raise OracleRefusal(f"robot {rid}: more than {cap} paths") from None
        total *= len(per_robot[rid])
        if total > cap:
            raise OracleRefusal(f"{total} joint plans exceed cap {cap}")
    robots = list(graphs)
    costs = {r: graphs[r].costs() for r in robots}
    plans = []
    for combo in itertools.product(*(per_robot[r] for r in robots)):
        paths = dict(zip(robots, combo))
        cost = sum(float(costs[r][p].sum()) for r, p in paths.items())
        seqs = {r: graphs[r].site_sequence(p) for r, p in paths.items()}
        plans.append(JointPlan(seqs, paths, cost))
    return plans


def plan_signal(plan: JointPlan, graphs: dict, bindings: dict, keys) -> dict:
    """Truth of every (predicate, time) key under a plan: the robot's path
    enters vertex (site, time)."""
    occ = {r: graphs[r].occupancy(p) for r, p in plan.paths.items()}
    out = {}
    for pred, t in keys:
        b = bindings[pred]
        out[(pred, t)] = (b.site, t) in occ[b.robot]
    return out


def brute_force_optimum(grounded, graphs: dict, bindings: dict, keys, cap: int = 1_000_000):
    """Cheapest joint plan whose signal satisfies ``grounded``.

    Returns ``(cost, paths)`` with ``paths`` mapping robot to its edge
    path, or ``(math.inf, None)`` when nothing satisfies. ``grounded`` may
    be ``None`` for an empty specification.

    Per robot, paths that induce the same signal on that robot's
    predicates are interchangeable for satisfaction, so only the cheapest
    one of each class is kept before crossing robots; ``cap`` bounds both
    the per-robot path count and the number of crossed classes.
    """
    keys = list(keys)
    robots = list(graphs)
    own = {r: [k for k in keys if bindings[k[0]].robot == r] for r in robots}
    classes = {}
    total = 1
    for r in robots:
        g = graphs[r]
        try:
            paths = g.paths(cap=cap)
        except OverflowError:
            raise OracleRefusal(f"robot {r}: more than {cap} paths") from None
        costs = g.costs()
        best: dict = {}
        for p in paths:
            occ = g.occupancy(p)
            sig = tuple((bindings[k[0]].site, k[1]) in occ for k in own[r])
            c = float(costs[p].sum())
            if sig not in best or c < best[sig][0]:
                best[sig] = (c, p)
        classes[r] = sorted(best.items(), key=lambda kv: kv[1][0])
        total *= len(classes[r])
        if total > cap:
            raise OracleRefusal(f"{total} joint signal classes exceed cap {cap}")
    best_cost, best_paths = math.inf, None
    for combo in itertools.product(*(classes[r] for r in robots)):
        cost = sum(c for _, (c, _) in combo)
        if cost >= best_cost:
            continue
        if grounded is not None:
            sig = {}
            for r, (bits, _) in zip(robots, combo):
                sig.update(zip(own[r], bits))
            if not evaluate(grounded, sig):
                continue
        best_cost = cost
        best_paths = {r: p for r, (_, (_, p)) in zip(robots, combo)}
    return best_cost, best_paths


def brute_force_scenario(scenario, seed: int, cap: int = 1_000_000):
    """:func:`brute_force_optimum` for a bench scenario and cost seed."""
    inst = scenario.instantiate(seed)
    return brute_force_optimum(inst.grounded, inst.graphs, inst.bindings, inst.keys, cap)[0]


class _FixedZChecker:
    """Feasibility of a fragment with the predicate vector fixed."""

    def __init__(self, fragment, keys):
        self.model = MblpModel.from_fragment(fragment)
        arr = self.model.to_arrays()
        self.z_idx = [self.model.index[z_name(k)] for k in keys]
        cons = []
        if arr["A_ub"].shape[0]:
            cons.append(LinearConstraint(arr["A_ub"], -np.inf, arr["b_ub"]))
        if arr["A_eq"].shape[0]:
            cons.append(LinearConstraint(arr["A_eq"], arr["b_eq"], arr["b_eq"]))
        self.cons = cons
        self.lb, self.ub = arr["lb"], arr["ub"]
        self.integrality = np.array([v.binary for v in self.model.variables], dtype=int)
        self.c = np.zeros(self.model.n_vars)

    def feasible(self, z) -> bool:
        lb, ub = self.lb.copy(), self.ub.copy()
        lb[self.z_idx] = ub[self.z_idx] = z
        res = milp(self.c, constraints=self.cons, integrality=self.integrality, bounds=Bounds(lb, ub))
        if res.status not in (0, 2):
            raise RuntimeError(f"oracle MILP failed: {res.message}")
        return res.status == 0


MAX_Z = 12


def feasible_z_set(fragment, keys) -> set:
    """Every binary predicate vector (ordered as ``keys``) for which the
    fragment, with its own binaries kept integral, is feasible."""
    keys = list(keys)
    if len(keys) > MAX_Z:
        raise OracleRefusal(f"{len(keys)} predicates exceed the limit of {MAX_Z}")
    chk = _FixedZChecker(fragment, keys)
    return {z for z in itertools.product((0, 1), repeat=len(keys)) if chk.feasible(np.array(z, float))}


def semantic_z_set(grounded, keys) -> set:
    """Predicate vectors satisfying ``grounded`` by direct evaluation."""
    keys = list(keys)
    return {
        z for z in itertools.product((0, 1), repeat=len(keys))
        if evaluate(grounded, dict(zip(keys, map(bool, z))))
    }
