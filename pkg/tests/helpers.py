"""Shared generators and independent reference semantics for the tests."""
from __future__ import annotations

import numpy as np

from stlflow.dynflow import Arc, SiteGraph
from stlflow.formula import (
    Always,
    And,
    Atom,
    Eventually,
    Not,
    Or,
    TimeInterval,
    Until,
    ground,
    predicate_keys,
)


def sat(f, signal, t) -> bool:
    """Direct recursive satisfaction of an (arbitrary, non-NNF) formula at
    time ``t``, written straight from the validity table; used as the
    reference for grounding and NNF."""
    if isinstance(f, Atom):
        return bool(signal[(f.name, t)])
    if isinstance(f, Not):
        return not sat(f.child, signal, t)
    if isinstance(f, And):
        return all(sat(c, signal, t) for c in f.children)
    if isinstance(f, Or):
        return any(sat(c, signal, t) for c in f.children)
    lo, hi = t + f.interval.lo, t + f.interval.hi
    if isinstance(f, Eventually):
        return any(sat(f.child, signal, k) for k in range(lo, hi + 1))
    if isinstance(f, Always):
        return all(sat(f.child, signal, k) for k in range(lo, hi + 1))
    if isinstance(f, Until):
        return any(
            sat(f.right, signal, tp) and all(sat(f.left, signal, tpp) for tpp in range(lo, tp + 1))
            for tp in range(lo, hi + 1)
        )
    raise TypeError(f)


def random_formula(rng, depth, preds, budget, nnf=True, allow_until=True):
    """Random formula whose reach is at most ``budget``.

    With ``nnf`` negation only wraps atoms; otherwise Not may appear
    above any subformula that contains no Until.
    """
    if depth == 0 or rng.random() < 0.25:
        f = Atom(str(rng.choice(preds)))
        return Not(f) if rng.random() < 0.3 else f
    ops = ["and", "or", "F", "G"] + (["U"] if allow_until else [])
    op = ops[rng.integers(len(ops))]
    if op in ("and", "or"):
        k = int(rng.integers(2, 4))
        kids = tuple(random_formula(rng, depth - 1, preds, budget, nnf, allow_until) for _ in range(k))
        f = And(kids) if op == "and" else Or(kids)
    else:
        hi = int(rng.integers(0, budget + 1))
        lo = int(rng.integers(0, hi + 1))
        iv = TimeInterval(lo, hi)
        if op == "U":
            f = Until(
                iv,
                random_formula(rng, depth - 1, preds, budget - hi, nnf, False),
                random_formula(rng, depth - 1, preds, budget - hi, nnf, False),
            )
            return f
        child = random_formula(rng, depth - 1, preds, budget - hi, nnf, allow_until)
        f = Eventually(iv, child) if op == "F" else Always(iv, child)
    if not nnf and rng.random() < 0.2 and not _has_until(f):
        f = Not(f)
    return f


def _has_until(f) -> bool:
    if isinstance(f, Until):
        return True
    if isinstance(f, (And, Or)):
        return any(_has_until(c) for c in f.children)
    if isinstance(f, (Not, Eventually, Always)):
        return _has_until(f.child)
    return False


def random_grounded(rng, max_keys=8, depth=3, preds=("p", "q", "s"), horizon=6):
    """(formula, grounding, keys) with at most ``max_keys`` distinct timed predicates."""
    while True:
        budget = int(rng.integers(0, horizon + 1))
        f = random_formula(rng, depth, list(preds), budget)
        g = ground(f, 0, horizon)
        keys = predicate_keys(g)
        if 1 <= len(keys) <= max_keys:
            return f, g, keys


def random_site_graph(rng, n_sites):
    sites = [f"s{i}" for i in range(n_sites)]
    arcs = []
    for i in range(n_sites):
        for j in range(n_sites):
            if i != j and rng.random() < 0.6:
                arcs.append(Arc(sites[i], sites[j], int(rng.integers(1, 3))))
    return SiteGraph(sites, arcs)


def lp_range(model, var, fixes):
    """(min, max) of ``var`` over the LP relaxation of ``model`` with the
    named variables fixed, via HiGHS; ``None`` when infeasible."""
    from scipy.optimize import linprog

    arr = model.to_arrays()
    lb, ub = arr["lb"].copy(), arr["ub"].copy()
    for name, val in fixes.items():
        lb[model.index[name]] = ub[model.index[name]] = val
    out = []
    for sign in (1.0, -1.0):
        c = np.zeros(model.n_vars)
        c[model.index[var]] = sign
        res = linprog(
            c,
            A_ub=arr["A_ub"] if arr["A_ub"].shape[0] else None,
            b_ub=arr["b_ub"] if arr["A_ub"].shape[0] else None,
            A_eq=arr["A_eq"] if arr["A_eq"].shape[0] else None,
            b_eq=arr["b_eq"] if arr["A_eq"].shape[0] else None,
            bounds=list(zip(lb, ub)),
            method="highs",
        )
        if res.status == 2:
            return None
        assert res.status == 0, res.message
        out.append(sign * res.fun)
    return tuple(out)


def to_grounded(f, t=0):
    """Atom-level And/Or/Not formula to a grounded tree at time ``t`` with
    no flattening (used to keep a hand-drawn tree shape intact)."""
    from stlflow.formula import TimedLiteral

    if isinstance(f, Atom):
        return TimedLiteral(f.name, t)
    if isinstance(f, Not):
        return TimedLiteral(f.child.name, t, False)
    return type(f)(tuple(to_grounded(c, t) for c in f.children))
