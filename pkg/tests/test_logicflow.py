import itertools
import json

import numpy as np
import pytest

from helpers import lp_range, random_grounded
from stlflow.formula import TimedLiteral, ground, literals, parse_stl
from stlflow.logicflow import SOURCE, TARGET, build_lnf, encode_lnf
from stlflow.logictree import build_logic_tree, encode_tree, z_name
from stlflow.model import EQ, GE, LE, MblpModel
from stlflow.oracle import feasible_z_set, semantic_z_set

FIG3 = "((pi1 | pi2) & (pi3 | (pi4 & !pi5)))"
FIG3_KEYS = [(f"pi{i}", 0) for i in range(1, 6)]


def fig3_lnf():
    return build_lnf(build_logic_tree(ground(parse_stl(FIG3))))


def example1_lnf(**kw):
    return build_lnf(build_logic_tree(ground(parse_stl("F[0,2] G[0,1] p"), 0, 3)), **kw)


def lits(e):
    return [str(l) for l in e.literals]


def test_fig3_topology():
    f = fig3_lnf()
    assert f.vertices == [SOURCE, TARGET, 2]
    assert [(e.tail, e.head, lits(e)) for e in f.edges] == [
        (0, 2, ["pi1@0"]),
        (0, 2, ["pi2@0"]),
        (2, 1, ["pi3@0"]),
        (2, 1, ["pi4@0", "!pi5@0"]),
    ]
    assert f.predicates == FIG3_KEYS


def test_fig3_constraints_without_guard():
    frag = encode_lnf(fig3_lnf(), negation_guard=False)
    assert frag.tags == [
        "edge[0][0]", "edge[1][1]", "edge[2][2]", "edge[3][3]", "edge[3][4]",
        "source_y", "source_w", "vertex_y[2]", "vertex_w[2]",
    ]
    rows = {c.tag: [] for c in frag.constraints}
    for c in frag.constraints:
        rows[c.tag].append((c.coeffs, c.sense, c.rhs))
    assert rows["edge[0][0]"] == [({"lnf.w0.0": 1.0, "lnf.y0": -1.0}, GE, 0.0)]
    assert rows["edge[3][3]"] == [({"lnf.w3.3": 1.0, "lnf.y3": -1.0}, GE, 0.0)]
    assert rows["edge[3][4]"] == [({"lnf.w3.4": -1.0, "lnf.y3": -1.0}, GE, -1.0)]
    assert rows["source_y"] == [({"lnf.y0": 1.0, "lnf.y1": 1.0}, EQ, 1.0)]
    assert rows["vertex_y[2]"] == [({"lnf.y0": 1.0, "lnf.y1": 1.0, "lnf.y2": -1.0, "lnf.y3": -1.0}, EQ, 0.0)]
    assert len(rows["source_w"]) == 5 and len(rows["vertex_w[2]"]) == 5
    assert rows["source_w"][4] == ({"lnf.w0.4": 1.0, "lnf.w1.4": 1.0, "z.pi5@0": -1.0}, EQ, 0.0)
    assert len(frag.constraints) == 17


def test_guard_rows_only_for_negated_predicates():
    frag = encode_lnf(fig3_lnf())
    guard = [c for c in frag.constraints if c.tag == "guard"]
    assert len(guard) == 4
    assert all(c.sense == LE and c.rhs == 0.0 for c in guard)
    assert {v for c in guard for v in c.coeffs if ".w" in v} == {f"lnf.w{k}.4" for k in range(4)}
    pos_only = build_lnf(build_logic_tree(ground(parse_stl("(a | (b & c))"))))
    assert "guard" not in encode_lnf(pos_only).tags


def test_example1_expanded_shape():
    f = example1_lnf(contract_terminal=False)
    assert len(f.vertices) == 3
    assert [(e.tail, e.head, lits(e)) for e in f.edges] == [
        (0, 2, ["p@0", "p@1"]),
        (0, 2, ["p@1", "p@2"]),
        (0, 2, ["p@2", "p@3"]),
        (2, 1, []),
    ]


def test_example1_contracted_shape():
    f = example1_lnf()
    assert f.vertices == [SOURCE, TARGET]
    assert [(e.tail, e.head) for e in f.edges] == [(0, 1)] * 3


@pytest.mark.parametrize("contract", [True, False])
def test_example1_forced_first_edge(contract):
    f = example1_lnf(contract_terminal=contract)
    model = MblpModel.from_fragment(encode_lnf(f))
    z = {z_name(("p", t)): v for t, v in enumerate((1, 1, 0, 0))}
    assert lp_range(model, "lnf.y0", z) == pytest.approx((1.0, 1.0))
    assert lp_range(model, "lnf.y1", z) == pytest.approx((0.0, 0.0))


def test_pure_conjunction_is_single_edge():
    f = build_lnf(build_logic_tree(ground(parse_stl("(a & b & !c)"))))
    assert f.vertices == [SOURCE, TARGET]
    assert len(f.edges) == 1 and lits(f.edges[0]) == ["a@0", "b@0", "!c@0"]


def test_single_literal():
    f = build_lnf(build_logic_tree(TimedLiteral("p", 0)))
    assert len(f.edges) == 1
    assert feasible_z_set(encode_lnf(f), [("p", 0)]) == {(1,)}


def test_nested_disjunction_after_conjunction():
    # an OR below an AND spawns parallel copies of the partial edge
    f = build_lnf(build_logic_tree(ground(parse_stl("(a & (b | c) & d)"))))
    assert [(e.tail, e.head, lits(e)) for e in f.edges] == [
        (0, 2, ["a@0", "b@0"]),
        (0, 2, ["a@0", "c@0"]),
        (2, 1, ["d@0"]),
    ]


def test_acyclic_and_connected():
    rng = np.random.default_rng(21)
    for _ in range(50):
        _, g, _ = random_grounded(rng)
        f = build_lnf(build_logic_tree(g))
        order = f.topological_order()
        pos = {v: i for i, v in enumerate(order)}
        assert all(pos[e.tail] < pos[e.head] for e in f.edges)
        assert order[0] == SOURCE and order[-1] == TARGET
        assert sorted(f.vertices) == list(range(len(f.vertices)))
        assert all(f.in_edges(v) and f.out_edges(v) for v in f.vertices if v not in (SOURCE, TARGET))


def test_paths_are_dnf_terms():
    # each source-target path corresponds to one satisfying conjunction
    f = fig3_lnf()
    terms = sorted(sorted(str(l) for k in p for l in f.edges[k].literals) for p in f.paths())
    assert terms == [
        ["!pi5@0", "pi1@0", "pi4@0"],
        ["!pi5@0", "pi2@0", "pi4@0"],
        ["pi1@0", "pi3@0"],
        ["pi2@0", "pi3@0"],
    ]


def test_fig3_z_set():
    zs = feasible_z_set(encode_lnf(fig3_lnf()), FIG3_KEYS)
    assert (1, 0, 0, 1, 0) in zs
    assert (1, 0, 0, 1, 1) not in zs
    # without pi1 or pi2 the first disjunction fails whatever edge 4 carries
    assert (0, 0, 0, 1, 0) not in zs
    g = ground(parse_stl(FIG3))
    assert zs == semantic_z_set(g, FIG3_KEYS)
    assert zs == feasible_z_set(encode_tree(build_logic_tree(g)), FIG3_KEYS)


def test_negation_bypass_without_guard():
    zs = feasible_z_set(encode_lnf(fig3_lnf(), negation_guard=False), FIG3_KEYS)
    assert (1, 0, 0, 1, 1) in zs  # routes w[5] through the unselected edge 3
    bypass = {(1, 0, 0, 1, 1), (0, 1, 0, 1, 1), (1, 1, 0, 1, 1)}
    assert zs - bypass == semantic_z_set(ground(parse_stl(FIG3)), FIG3_KEYS)


def test_positive_formulas_need_no_guard():
    rng = np.random.default_rng(22)
    n = 0
    while n < 15:
        _, g, keys = random_grounded(rng, max_keys=6)
        if any(not l.polarity for l in literals(g)):
            continue
        f = build_lnf(build_logic_tree(g))
        want = semantic_z_set(g, keys)
        assert feasible_z_set(encode_lnf(f, negation_guard=False), keys) == want
        # continuous y is still exact when every literal is positive
        assert feasible_z_set(encode_lnf(f, relax_y_always=True), keys) == want
        n += 1


def test_semantic_equivalence_random():
    rng = np.random.default_rng(23)
    for _ in range(25):
        _, g, keys = random_grounded(rng, max_keys=6)
        f = build_lnf(build_logic_tree(g))
        assert feasible_z_set(encode_lnf(f), keys) == semantic_z_set(g, keys)


def test_flow_cap_preserves_semantics():
    rng = np.random.default_rng(24)
    for _ in range(10):
        _, g, keys = random_grounded(rng, max_keys=6)
        f = build_lnf(build_logic_tree(g))
        assert feasible_z_set(encode_lnf(f, in_flow_cap=True), keys) == semantic_z_set(g, keys)


def test_continuous_y_is_a_relaxation_under_negation():
    # three parallel edges !q@3 | !q@4 | !q@5 with y = 1/3 each admit q = (1,1,1)
    g = ground(parse_stl("F[3,5] !q"), 0, 5)
    f = build_lnf(build_logic_tree(g))
    keys = [("q", 3), ("q", 4), ("q", 5)]
    exact = semantic_z_set(g, keys)
    relaxed = feasible_z_set(encode_lnf(f, relax_y_always=True), keys)
    assert relaxed == exact | {(1, 1, 1)}


def test_relax_y_declares_continuous():
    frag = encode_lnf(fig3_lnf(), relax_y_always=True)
    assert [v.name for v in frag.variables if v.binary] == [z_name(k) for k in FIG3_KEYS]


def test_relaxation_containment_rate(record_property):
    """Fraction of random fractional z accepted by the flow relaxation that
    the tree relaxation also accepts. Recorded, not asserted."""
    rng = np.random.default_rng(25)
    inside = total = 0
    for _ in range(15):
        _, g, keys = random_grounded(rng, max_keys=6)
        t = build_logic_tree(g)
        lt = MblpModel.from_fragment(encode_tree(t))
        lnf = MblpModel.from_fragment(encode_lnf(build_lnf(t)))
        probe_lt, probe_lnf = lt.variables[0].name, lnf.variables[0].name
        for _ in range(10):
            z = {z_name(k): float(v) for k, v in zip(keys, rng.random(len(keys)))}
            if lp_range(lnf, probe_lnf, z) is not None:
                total += 1
                inside += lp_range(lt, probe_lt, z) is not None
    rate = inside / total if total else float("nan")
    record_property("lnf_in_lt_rate", rate)
    assert 0.0 <= rate <= 1.0 or total == 0


def test_unknown_literal_rejected():
    f = fig3_lnf()
    f.predicates = f.predicates[:4]
    with pytest.raises(IndexError):
        encode_lnf(f)


def test_graph_dump_golden():
    d = json.loads(fig3_lnf().dumps())
    assert d["vertices"] == [0, 1, 2]
    assert d["source"] == 0 and d["target"] == 1
    assert d["predicates"] == ["pi1@0", "pi2@0", "pi3@0", "pi4@0", "pi5@0"]
    assert d["edges"][3] == {
        "id": 3,
        "tail": 2,
        "head": 1,
        "literals": [
            {"predicate": "pi4", "time": 0, "polarity": True},
            {"predicate": "pi5", "time": 0, "polarity": False},
        ],
    }
