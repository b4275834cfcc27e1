"""Logic Network Flow: a source-target DAG whose edges carry literal sets.

A unit flow ``y`` must travel from the source to the target along edges
whose literals hold; a vector flow ``w`` (one component per predicate
variable) is injected at the source equal to the predicate vector ``z``
and conserved at every inner vertex.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from graphlib import TopologicalSorter

from .logictree import AND, Leaf, LogicTree, z_name
from .model import EQ, GE, LE, ConstraintFragment

SOURCE, TARGET = 0, 1


@dataclass
class LnfEdge:
    tail: int
    head: int | None
    literals: list = field(default_factory=list)

    def add(self, lit):
        if lit not in self.literals:
            self.literals.append(lit)


@dataclass
class Lnf:
    vertices: list
    edges: list
    predicates: list  # ordered (predicate, time) keys; index i <-> component i
    source: int = SOURCE
    target: int = TARGET

    def in_edges(self, v) -> list:
        return [k for k, e in enumerate(self.edges) if e.head == v]

    def out_edges(self, v) -> list:
        return [k for k, e in enumerate(self.edges) if e.tail == v]

    def topological_order(self) -> list:
        ts = TopologicalSorter({v: set() for v in self.vertices})
        for e in self.edges:
            ts.add(e.head, e.tail)
        return list(ts.static_order())

    def paths(self) -> list:
        """All source-to-target edge paths (exponential; for small graphs)."""
        out_map = {v: self.out_edges(v) for v in self.vertices}
        found = []

        def walk(v, acc):
            if v == self.target:
                found.append(list(acc))
                return
            for k in out_map[v]:
                acc.append(k)
                walk(self.edges[k].head, acc)
                acc.pop()

        walk(self.source, [])
        return found

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "vertices": list(self.vertices),
            "predicates": [f"{p}@{t}" for p, t in self.predicates],
            "edges": [
                {
                    "id": k,
                    "tail": e.tail,
                    "head": e.head,
                    "literals": [
                        {"predicate": l.predicate, "time": l.time, "polarity": l.polarity}
                        for l in e.literals
                    ],
                }
                for k, e in enumerate(self.edges)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def build_lnf(t: LogicTree, contract_terminal: bool = True) -> Lnf:
    """Translate a Logic Tree into a Logic Network Flow.

    Follows the recursive BuildNode procedure: a leaf adds its literal to
    the dangling edge, a conjunction threads the dangling edge through its
    children in order, and a disjunction copies the dangling edge once per
    child and joins the copies at a fresh merge vertex whose new, empty
    outgoing edge becomes the dangling edge.

    With ``contract_terminal`` the final dangling edge, when empty and
    leaving a merge vertex, is removed and that merge vertex becomes the
    target; this is the compact drawing (e.g. 4 edges / 3 vertices for a
    conjunction of two disjunctions).
    """
    vertices = [SOURCE, TARGET]
    edges: list[LnfEdge] = []

    def new_edge(tail, lits=()):
        edges.append(LnfEdge(tail, None, list(lits)))
        return len(edges) - 1

    def build(i, e):
        n = t.nodes[i]
        if isinstance(n, Leaf):
            edges[e].add(n.literal)
            return e
        if n.combo == AND:
            for c in n.children:
                e = build(c, e)
            return e
        copies = [e] + [new_edge(edges[e].tail, edges[e].literals) for _ in n.children[1:]]
        outs = [build(c, cp) for c, cp in zip(n.children, copies)]
        v = len(vertices)
        vertices.append(v)
        for o in outs:
            edges[o].head = v
        return new_edge(v)

    last = build(t.root, new_edge(SOURCE))
    tail = edges[last].tail
    if contract_terminal and not edges[last].literals and tail != SOURCE:
        edges.pop(last)
        for e in edges:
            if e.head == tail:
                e.head = TARGET
        vertices.remove(tail)
        # keep vertex ids dense: renumber merge vertices above the removed one
        remap = {v: (v if v < tail else v - 1) for v in vertices}
        vertices = [remap[v] for v in vertices]
        for e in edges:
            e.tail, e.head = remap[e.tail], remap[e.head]
    else:
        edges[last].head = TARGET
    return Lnf(vertices, edges, t.predicate_keys())


def omega_name(e: int, i: int, prefix="lnf") -> str:
    return f"{prefix}.w{e}.{i}"


def y_name(e: int, prefix="lnf") -> str:
    return f"{prefix}.y{e}"


def encode_lnf(
    f: Lnf,
    *,
    relax_y_always: bool = False,
    negation_guard: bool = True,
    in_flow_cap: bool = False,
    prefix: str = "lnf",
) -> ConstraintFragment:
    """Flow constraints of a Logic Network Flow.

    Per edge ``e`` and literal on predicate ``i``: ``w_e[i] >= y_e``
    (positive) or ``1 - w_e[i] >= y_e`` (negative). Inner vertices conserve
    ``y`` and every component of ``w``; the source emits one unit of ``y``
    and ``w = z``.

    ``negation_guard`` adds ``w_e[i] <= y_e`` on every edge for each
    predicate that appears negated; without it a negative literal can be
    bypassed by routing ``w[i]`` around the selected path. Formulas with no
    negation are unaffected. ``in_flow_cap`` emits ``sum_in y <= 1`` per
    vertex (redundant on a DAG). ``relax_y_always`` declares ``y``
    continuous; that is exact for formulas without negation but lets a
    split flow satisfy negative literals fractionally.
    """
    frag = ConstraintFragment()
    index = {key: i for i, key in enumerate(f.predicates)}
    npred = len(f.predicates)
    for key in f.predicates:
        frag.add_var(z_name(key), binary=True)
    for k, e in enumerate(f.edges):
        frag.add_var(y_name(k, prefix), binary=not relax_y_always)
        for i in range(npred):
            frag.add_var(omega_name(k, i, prefix))

    negated = set()
    for k, e in enumerate(f.edges):
        for lit in e.literals:
            try:
                i = index[lit.key()]
            except KeyError:
                raise IndexError(f"literal {lit} not in the predicate list") from None
            y, w = y_name(k, prefix), omega_name(k, i, prefix)
            if lit.polarity:
                frag.add([(w, 1.0), (y, -1.0)], GE, 0.0, f"edge[{k}][{i}]")
            else:
                negated.add(i)
                frag.add([(w, -1.0), (y, -1.0)], GE, -1.0, f"edge[{k}][{i}]")

    for v in f.vertices:
        if v == f.target:
            continue
        ins, outs = f.in_edges(v), f.out_edges(v)
        if v == f.source:
            frag.add([(y_name(k, prefix), 1.0) for k in outs], EQ, 1.0, "source_y")
            for i, key in enumerate(f.predicates):
                frag.add(
                    [(omega_name(k, i, prefix), 1.0) for k in outs] + [(z_name(key), -1.0)],
                    EQ, 0.0, "source_w",
                )
            continue
        frag.add(
            [(y_name(k, prefix), 1.0) for k in ins] + [(y_name(k, prefix), -1.0) for k in outs],
            EQ, 0.0, f"vertex_y[{v}]",
        )
        for i in range(npred):
            frag.add(
                [(omega_name(k, i, prefix), 1.0) for k in ins]
                + [(omega_name(k, i, prefix), -1.0) for k in outs],
                EQ, 0.0, f"vertex_w[{v}]",
            )

    if in_flow_cap:
        for v in f.vertices:
            ins = f.in_edges(v)
            if ins:
                frag.add([(y_name(k, prefix), 1.0) for k in ins], LE, 1.0, f"cap[{v}]")
    if negation_guard:
        for i in sorted(negated):
            for k in range(len(f.edges)):
                frag.add([(omega_name(k, i, prefix), 1.0), (y_name(k, prefix), -1.0)], LE, 0.0, "guard")
    return frag
