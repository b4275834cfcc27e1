"""Acceptance criteria; each test records one PASS/FAIL line shown in the
terminal summary (run with ``pytest -m acceptance -s`` or as part of the
full suite)."""
import statistics
import time

import numpy as np
import pytest

from helpers import random_formula, random_grounded, random_site_graph
from stlflow.bench import Scenario, compile_instance, run_one
from stlflow.dynflow import build_dnf, encode_dnf
from stlflow.formula import ground, parse_stl, predicate_keys, to_text
from stlflow.logicflow import build_lnf, encode_lnf
from stlflow.logictree import build_logic_tree, encode_tree
from stlflow.model import MblpModel
from stlflow.oracle import brute_force_optimum, feasible_z_set, semantic_z_set
from stlflow.solver import branch_and_bound, solve_lp

pytestmark = pytest.mark.acceptance

N_FORMULAS = 500
N_SCENARIOS = 100
N_DNF = 100
DESK_SEEDS = range(10)


# -- 1: triple agreement ---------------------------------------------------


def test_c1_triple_agreement(acceptance):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    bad = []
    sizes = []
    for _ in range(N_FORMULAS):
        horizon = int(rng.integers(0, 7))
        f, g, keys = random_grounded(rng, max_keys=8, depth=3, horizon=horizon)
        sizes.append(len(keys))
        tree = build_logic_tree(g)
        sem = semantic_z_set(g, keys)
        lt = feasible_z_set(encode_tree(tree), keys)
        lnf = feasible_z_set(encode_lnf(build_lnf(tree)), keys)
        if not (sem == lt == lnf):
            bad.append(to_text(f))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 300
    acceptance(
        "C1 triple agreement",
        ok,
        f"{N_FORMULAS - len(bad)}/{N_FORMULAS} formulas agree (|Pi| 1..{max(sizes)}), {elapsed:.0f}s",
    )
    assert not bad, bad[:3]
    assert elapsed < 300


# -- 2: oracle equivalence on tiny scenarios --------------------------------


def random_tiny_instance(rng):
    n_sites = int(rng.integers(1, 4))
    sg = random_site_graph(rng, n_sites)
    robots = [f"r{i}" for i in range(1, int(rng.integers(1, 3)) + 1)]
    N = int(rng.integers(2, 9))
    atoms = [f"{r}.{s}" for r in robots for s in sg.sites]
    while True:
        f = random_formula(rng, 3, atoms, int(rng.integers(0, N)))
        g = ground(f, 0, N - 1)
        keys = predicate_keys(g)
        if len(keys) <= 8:
            break
    sc = Scenario(
        name="tiny",
        site_graph=sg,
        robots=[{"id": r, "initial_site": str(rng.choice(sg.sites))} for r in robots],
        horizon=N,
        spec=to_text(f),
    )
    return sc, int(rng.integers(0, 2**31))


@pytest.fixture(scope="module")
def tiny_runs():
    rng = np.random.default_rng(77)
    out = []
    for _ in range(N_SCENARIOS):
        sc, seed = random_tiny_instance(rng)
        inst = sc.instantiate(seed)
        want, _ = brute_force_optimum(inst.grounded, inst.graphs, inst.bindings, inst.keys)
        res = {}
        for enc in ("tree", "flow"):
            m, _ = compile_instance(inst, enc)
            res[enc] = branch_and_bound(m)
        out.append((sc, want, res))
    return out


def test_c2_oracle_equivalence(tiny_runs, acceptance):
    bad = []
    infeasible = 0
    for sc, want, res in tiny_runs:
        if want == np.inf:
            infeasible += 1
            if any(r.status != "infeasible" for r in res.values()):
                bad.append(sc.spec)
            continue
        got = [r.objective for r in res.values()]
        if not all(r.status == "optimal" for r in res.values()) or any(abs(g - want) > 1e-6 for g in got):
            bad.append(sc.spec)
        elif abs(got[0] - got[1]) > 1e-6:
            bad.append(sc.spec)
    acceptance(
        "C2 oracle equivalence",
        not bad,
        f"{len(tiny_runs) - len(bad)}/{len(tiny_runs)} scenarios match brute force ({infeasible} infeasible)",
    )
    assert not bad, bad[:3]


# -- 3: structural golden ----------------------------------------------------


def test_c3_structural_golden(acceptance):
    tree = build_logic_tree(ground(parse_stl("F[0,2] G[0,1] p"), 0, 3))
    lt_ok = (len(tree.nodes), len(tree.leaves), len(tree.internals)) == (10, 6, 4)
    lnf = build_lnf(build_logic_tree(ground(parse_stl("((pi1 | pi2) & (pi3 | (pi4 & !pi5)))"))))
    shape_ok = (len(lnf.edges), len(lnf.vertices)) == (4, 3)
    frag = encode_lnf(lnf, negation_guard=False)
    rows_ok = frag.tags == [
        "edge[0][0]", "edge[1][1]", "edge[2][2]", "edge[3][3]", "edge[3][4]",
        "source_y", "source_w", "vertex_y[2]", "vertex_w[2]",
    ]
    ok = lt_ok and shape_ok and rows_ok
    acceptance(
        "C3 structural golden",
        ok,
        f"LT {len(tree.nodes)}/{len(tree.leaves)}/{len(tree.internals)} nodes/leaves/internal; "
        f"LNF {len(lnf.edges)} edges/{len(lnf.vertices)} vertices; {len(frag.tags)} constraint groups",
    )
    assert ok


# -- 4/5: desk-scale tightness and node counts ---------------------------------


@pytest.fixture(scope="module")
def desk_runs():
    sc = Scenario.load("campus_desk.json")
    runs = {}
    for seed in DESK_SEEDS:
        for enc in ("tree", "flow"):
            rec, res, _, _ = run_one(sc, seed, enc)
            runs[(enc, seed)] = (rec, res)
    return sc, runs


def test_c4_root_gap_direction(desk_runs, acceptance):
    sc, runs = desk_runs
    gaps = {enc: [runs[(enc, s)][0].root_gap for s in DESK_SEEDS] for enc in ("tree", "flow")}
    wins = sum(f < t for f, t in zip(gaps["flow"], gaps["tree"]))
    med_t, med_f = statistics.median(gaps["tree"]), statistics.median(gaps["flow"])
    same_opt = all(
        abs(runs[("tree", s)][0].optimum - runs[("flow", s)][0].optimum) <= 1e-6 for s in DESK_SEEDS
    )
    ok = wins >= 8 and med_f < med_t and same_opt
    acceptance(
        "C4 root gap flow < tree",
        ok,
        f"{sc.name}: flow smaller in {wins}/10 seeds; median G_r flow {100 * med_f:.1f}% vs tree {100 * med_t:.1f}%",
    )
    assert same_opt
    assert wins >= 8 and med_f < med_t


def _nodes_to_final_bound(res):
    return next(e.nodes for e in res.trace if e.lb >= res.objective - 1e-9 * max(1.0, abs(res.objective)))


def test_c5_node_count_direction(desk_runs, acceptance):
    sc, runs = desk_runs
    nodes = {enc: [runs[(enc, s)][0].nodes_prove_opt for s in DESK_SEEDS] for enc in ("tree", "flow")}
    med_t, med_f = statistics.median(nodes["tree"]), statistics.median(nodes["flow"])
    bound_nodes = {
        enc: statistics.median(_nodes_to_final_bound(runs[(enc, s)][1]) for s in DESK_SEEDS)
        for enc in ("tree", "flow")
    }
    ok = med_f < med_t and bound_nodes["flow"] < bound_nodes["tree"]
    acceptance(
        "C5 nodes to prove flow < tree",
        ok,
        f"median nodes_prove_opt flow {med_f:g} vs tree {med_t:g}; "
        f"median nodes to reach final bound flow {bound_nodes['flow']:g} vs tree {bound_nodes['tree']:g}",
    )
    assert ok


# -- 6: DNF integrality ----------------------------------------------------------


def test_c6_dnf_integrality(acceptance):
    rng = np.random.default_rng(6)
    worst = 0.0
    fails = 0
    for _ in range(N_DNF):
        sg = random_site_graph(rng, int(rng.integers(1, 6)))
        g = build_dnf(sg, int(rng.integers(2, 9)), str(rng.choice(sg.sites)), rng=rng)
        sol = solve_lp(MblpModel.from_fragment(encode_dnf(g)))
        if sol.status != "optimal":
            fails += 1
            continue
        worst = max(worst, float(np.max(np.minimum(np.abs(sol.x), np.abs(1 - sol.x)))))
    ok = fails == 0 and worst <= 1e-6
    acceptance("C6 DNF integrality", ok, f"{N_DNF} models, max distance to integer {worst:.1e}")
    assert ok


# -- 7: trace invariants ----------------------------------------------------------


def _trace_ok(res, gap_tol=0.0):
    lbs = [e.lb for e in res.trace]
    ubs = [e.ub for e in res.trace]
    mono = all(a <= b for a, b in zip(lbs, lbs[1:])) and all(a >= b for a, b in zip(ubs, ubs[1:]))
    ordered = all(e.lb <= e.ub + 1e-9 for e in res.trace)
    if res.status == "optimal":
        final = (ubs[-1] - lbs[-1]) <= gap_tol * abs(ubs[-1]) + 1e-12
    else:
        final = res.status == "infeasible"
    return mono and ordered and final


def test_c7_trace_invariants(tiny_runs, desk_runs, acceptance):
    results = [r for _, _, res in tiny_runs for r in res.values()]
    results += [res for _, res in desk_runs[1].values()]
    bad = sum(not _trace_ok(r) for r in results)
    acceptance("C7 trace invariants", bad == 0, f"{len(results) - bad}/{len(results)} traces valid")
    assert bad == 0
