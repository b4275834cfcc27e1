"""Logic Tree encoding: AND/OR tree over timed predicate leaves.

Leaves carry binary predicate variables (one per distinct predicate/time
pair, shared between repeated occurrences); internal nodes carry
continuous [0, 1] variables tied to their children by the usual
conjunction/disjunction inequalities, and the root is pinned to 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .formula import And, Or, TimedLiteral, flatten
from .model import EQ, GE, LE, ConstraintFragment

AND, OR = "and", "or"


def z_name(key) -> str:
    """Shared name of the binary variable for a (predicate, time) pair."""
    pred, t = key
    return f"z.{pred}@{t}"


@dataclass(frozen=True)
class Internal:
    id: int
    combo: str
    children: tuple


@dataclass(frozen=True)
class Leaf:
    id: int
    literal: TimedLiteral


@dataclass
class LogicTree:
    nodes: list
    root: int

    def node(self, i):
        return self.nodes[i]

    @property
    def leaves(self) -> list:
        return [n for n in self.nodes if isinstance(n, Leaf)]

    @property
    def internals(self) -> list:
        return [n for n in self.nodes if isinstance(n, Internal)]

    def predicate_keys(self) -> list:
        """Unique (predicate, time) pairs in depth-first leaf order."""
        out = {}
        stack = [self.root]
        while stack:
            n = self.nodes[stack.pop()]
            if isinstance(n, Leaf):
                out.setdefault(n.literal.key(), None)
            else:
                stack.extend(reversed(n.children))
        return list(out)

    def var(self, i) -> str:
        n = self.nodes[i]
        if isinstance(n, Leaf):
            return z_name(n.literal.key())
        return f"lt.{n.id}"

    def to_dict(self) -> dict:
        out = []
        for n in self.nodes:
            if isinstance(n, Leaf):
                lit = n.literal
                out.append(
                    {
                        "id": n.id,
                        "type": "leaf",
                        "literal": {"predicate": lit.predicate, "time": lit.time, "polarity": lit.polarity},
                    }
                )
            else:
                out.append({"id": n.id, "type": "internal", "combo": n.combo, "children": list(n.children)})
        return {"root": self.root, "nodes": out}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def build_logic_tree(g, flatten_first: bool = True) -> LogicTree:
    """Mirror a grounded AND/OR formula as a :class:`LogicTree`.

    Node ids are assigned in pre-order. A bare literal root is wrapped in a
    one-child AND so that the root is always internal.
    """
    if flatten_first:
        g = flatten(g)
    if isinstance(g, TimedLiteral):
        g = And((g,))
    nodes: list = []

    def visit(f) -> int:
        i = len(nodes)
        if isinstance(f, TimedLiteral):
            nodes.append(Leaf(i, f))
            return i
        nodes.append(None)
        kids = tuple(visit(c) for c in f.children)
        nodes[i] = Internal(i, AND if isinstance(f, And) else OR, kids)
        return i

    root = visit(g)
    return LogicTree(nodes, root)


def encode_tree(t: LogicTree, prefix: str = "lt") -> ConstraintFragment:
    """Constraint fragment of a Logic Tree (see module docstring).

    A negative-polarity child contributes ``1 - z`` in place of ``z``.
    """
    frag = ConstraintFragment()
    for key in t.predicate_keys():
        frag.add_var(z_name(key), binary=True)
    for n in t.internals:
        frag.add_var(f"{prefix}.{n.id}", 0.0, 1.0)

    def term(i):
        # returns (coeff map, constant) of the child's truth value
        n = t.nodes[i]
        if isinstance(n, Leaf):
            v = z_name(n.literal.key())
            return ({v: 1.0}, 0.0) if n.literal.polarity else ({v: -1.0}, 1.0)
        return {f"{prefix}.{n.id}": 1.0}, 0.0

    for n in t.internals:
        z = f"{prefix}.{n.id}"
        tag = f"{n.combo}[{n.id}]"
        kids = [term(c) for c in n.children]
        # z <= child (AND) / z >= child (OR)
        rel = LE if n.combo == AND else GE
        for coeffs, const in kids:
            frag.add([(z, 1.0)] + [(v, -a) for v, a in coeffs.items()], rel, const, tag)
        total = [(v, -a) for coeffs, _ in kids for v, a in coeffs.items()]
        const = sum(c for _, c in kids)
        if n.combo == AND:
            # z >= 1 - p + sum(children)
            frag.add([(z, 1.0)] + total, GE, 1 - len(kids) + const, tag)
        else:
            # z <= sum(children)
            frag.add([(z, 1.0)] + total, LE, const, tag)
    frag.add({f"{prefix}.{t.root}": 1.0}, EQ, 1.0, "root")
    return frag
