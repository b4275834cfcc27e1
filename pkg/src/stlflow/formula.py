"""Bounded-time STL: syntax tree, text parser, negation normal form,
grounding over a finite horizon and boolean evaluation.

Time is integer-indexed. A grounded formula is a pure AND/OR tree whose
leaves are :class:`TimedLiteral` objects; it is what both MILP encodings
consume and what :func:`evaluate` checks directly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np


class STLSyntaxError(ValueError):
    """Raised by :func:`parse_stl` with the offending character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class HorizonError(ValueError):
    pass


@dataclass(frozen=True)
class TimeInterval:
    lo: int
    hi: int

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"malformed interval [{self.lo},{self.hi}]")

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __str__(self):
        return f"[{self.lo},{self.hi}]"


@dataclass(frozen=True)
class PredicateDef:
    """Linear predicate ``a @ x + b >= 0`` over a state vector."""

    name: str
    a: tuple
    b: float

    def holds(self, x) -> bool:
        return float(np.dot(self.a, x)) + self.b >= 0.0


def signal_from_states(preds: Sequence[PredicateDef], states) -> dict:
    """Boolean signal ``{(name, t): bool}`` for a state trajectory of shape (T, n)."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    return {(p.name, t): p.holds(x) for p in preds for t, x in enumerate(states)}


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    child: "Formula"


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("And needs at least one operand")


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        if not self.children:
            raise ValueError("Or needs at least one operand")


@dataclass(frozen=True)
class Eventually:
    interval: TimeInterval
    child: "Formula"


@dataclass(frozen=True)
class Always:
    interval: TimeInterval
    child: "Formula"


@dataclass(frozen=True)
class Until:
    interval: TimeInterval
    left: "Formula"
    right: "Formula"


Formula = Union[Atom, Not, And, Or, Eventually, Always, Until]


@dataclass(frozen=True, order=True)
class TimedLiteral:
    predicate: str
    time: int
    polarity: bool = True

    def key(self) -> tuple:
        """The (predicate, time) pair that owns the shared binary variable."""
        return (self.predicate, self.time)

    def negate(self) -> "TimedLiteral":
        return TimedLiteral(self.predicate, self.time, not self.polarity)

    def __str__(self):
        s = f"{self.predicate}@{self.time}"
        return s if self.polarity else "!" + s


# A grounded formula is an And/Or tree over TimedLiteral leaves.
GroundedFormula = Union[TimedLiteral, And, Or]


def to_text(f) -> str:
    """Print a formula in the grammar accepted by :func:`parse_stl`."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, TimedLiteral):
        return str(f)
    if isinstance(f, Not):
        return "!" + to_text(f.child)
    if isinstance(f, (And, Or)):
        op = " & " if isinstance(f, And) else " | "
        return "(" + op.join(to_text(c) for c in f.children) + ")"
    if isinstance(f, Eventually):
        return f"F{f.interval} {to_text(f.child)}"
    if isinstance(f, Always):
        return f"G{f.interval} {to_text(f.child)}"
    if isinstance(f, Until):
        return f"({to_text(f.left)} U{f.interval} {to_text(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Parser

_TOKEN = re.compile(
    r"\s*(?:(?P<temporal>[FGU])\s*\[\s*(?P<lo>-?\d+)\s*,\s*(?P<hi>-?\d+)\s*\]"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_.]*)"
    r"|(?P<sym>[()!&|]))"
)


def _tokenize(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise STLSyntaxError(f"unexpected character {text[start]!r}", start)
        start = m.start() + len(m.group(0)) - len(m.group(0).lstrip())
        if m.group("temporal"):
            lo, hi = int(m.group("lo")), int(m.group("hi"))
            if lo < 0 or lo > hi:
                raise STLSyntaxError(f"malformed interval [{lo},{hi}]", start)
            tokens.append((m.group("temporal"), TimeInterval(lo, hi), start))
        elif m.group("name"):
            name = m.group("name")
            # a bare F/G/U identifier is an atom only when not followed by '['
            tokens.append(("name", name, start))
        else:
            tokens.append((m.group("sym"), None, start))
        pos = m.end()
    tokens.append(("eof", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, predicate_table):
        self.tokens = _tokenize(text)
        self.i = 0
        self.table = None if predicate_table is None else set(predicate_table)

    def peek(self):
        return self.tokens[self.i]

    def take(self, kind=None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            want = "end of input" if kind == "eof" else repr(kind)
            raise STLSyntaxError(f"expected {want}, got {tok[0]!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "name":
            self.take()
            if self.table is not None and val not in self.table:
                raise STLSyntaxError(f"unknown predicate {val!r}", pos)
            return Atom(val)
        if kind == "!":
            self.take()
            return Not(self.formula())
        if kind in ("F", "G"):
            self.take()
            child = self.formula()
            return Eventually(val, child) if kind == "F" else Always(val, child)
        if kind == "(":
            self.take()
            first = self.formula()
            kind, val, pos = self.peek()
            if kind == ")":
                self.take()
                return first
            if kind == "U":
                self.take()
                right = self.formula()
                self.take(")")
                return Until(val, first, right)
            if kind not in ("&", "|"):
                raise STLSyntaxError(f"expected operator, got {kind!r}", pos)
            op = kind
            items = [first]
            while self.peek()[0] == op:
                self.take()
                items.append(self.formula())
            kind, _, pos = self.peek()
            if kind in ("&", "|", "U"):
                raise STLSyntaxError("mixed operators need explicit parentheses", pos)
            self.take(")")
            return And(tuple(items)) if op == "&" else Or(tuple(items))
        raise STLSyntaxError(f"unexpected token {kind!r}", pos)


def parse_stl(text: str, predicate_table: Iterable[str] | None = None) -> Formula:
    """Parse STL text.

    Grammar::

        formula := atom | "!" formula | "(" formula (op formula)+ ")"
                 | "F[" int "," int "]" formula | "G[" int "," int "]" formula
                 | "(" formula "U[" int "," int "]" formula ")"
        op      := "&" | "|"

    ``predicate_table`` (when given) restricts the accepted atom names.

    >>> parse_stl("F[0,2](G[0,1] p)")
    Eventually(interval=TimeInterval(lo=0, hi=2), child=Always(interval=TimeInterval(lo=0, hi=1), child=Atom(name='p')))
    """
    p = _Parser(text, predicate_table)
    f = p.formula()
    p.take("eof")
    return f


# ---------------------------------------------------------------------------
# Transformations


def atoms(f) -> set:
    if isinstance(f, Atom):
        return {f.name}
    if isinstance(f, TimedLiteral):
        return {f.predicate}
    if isinstance(f, Not):
        return atoms(f.child)
    if isinstance(f, (And, Or)):
        return set().union(*(atoms(c) for c in f.children))
    if isinstance(f, (Eventually, Always)):
        return atoms(f.child)
    if isinstance(f, Until):
        return atoms(f.left) | atoms(f.right)
    raise TypeError(f"not a formula: {f!r}")


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms (De Morgan plus the F/G duality).

    Negated Until has no dual here and raises ``ValueError``.
    """
    return _nnf(f, False)


def _nnf(f, neg: bool):
    if isinstance(f, Atom):
        return Not(f) if neg else f
    if isinstance(f, Not):
        return _nnf(f.child, not neg)
    if isinstance(f, And):
        kids = tuple(_nnf(c, neg) for c in f.children)
        return Or(kids) if neg else And(kids)
    if isinstance(f, Or):
        kids = tuple(_nnf(c, neg) for c in f.children)
        return And(kids) if neg else Or(kids)
    if isinstance(f, Eventually):
        child = _nnf(f.child, neg)
        return Always(f.interval, child) if neg else Eventually(f.interval, child)
    if isinstance(f, Always):
        child = _nnf(f.child, neg)
        return Eventually(f.interval, child) if neg else Always(f.interval, child)
    if isinstance(f, Until):
        if neg:
            raise ValueError(f"negation over Until is not supported: !{to_text(f)}")
        return Until(f.interval, _nnf(f.left, False), _nnf(f.right, False))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f) -> bool:
    if isinstance(f, (Atom, TimedLiteral)):
        return True
    if isinstance(f, Not):
        return isinstance(f.child, Atom)
    if isinstance(f, (And, Or)):
        return all(is_nnf(c) for c in f.children)
    if isinstance(f, (Eventually, Always)):
        return is_nnf(f.child)
    if isinstance(f, Until):
        return is_nnf(f.left) and is_nnf(f.right)
    raise TypeError(f"not a formula: {f!r}")


def reach(f: Formula) -> int:
    """Largest time offset (relative to the start time) that ``f`` reads."""
    if isinstance(f, Atom):
        return 0
    if isinstance(f, Not):
        return reach(f.child)
    if isinstance(f, (And, Or)):
        return max(reach(c) for c in f.children)
    if isinstance(f, (Eventually, Always)):
        return f.interval.hi + reach(f.child)
    if isinstance(f, Until):
        return f.interval.hi + max(reach(f.left), reach(f.right))
    raise TypeError(f"not a formula: {f!r}")


def flatten(g):
    """Merge nested same-type And/Or nodes and collapse single-child nodes."""
    if isinstance(g, TimedLiteral):
        return g
    cls = type(g)
    kids = []
    for c in g.children:
        c = flatten(c)
        if type(c) is cls:
            kids.extend(c.children)
        else:
            kids.append(c)
    if len(kids) == 1:
        return kids[0]
    return cls(tuple(kids))


def ground(f: Formula, t0: int = 0, horizon: int | None = None) -> GroundedFormula:
    """Expand temporal operators of an NNF formula into an AND/OR tree of
    timed literals starting at ``t0``.

    Shared subformulas are duplicated (tree, not DAG) and the result is
    associatively flattened.
    """
    if not is_nnf(f):
        raise ValueError("ground() expects a formula in negation normal form")
    if horizon is not None:
        _check_horizon(f, t0, horizon)
    return flatten(_ground(f, t0))


def _check_horizon(f, t, horizon):
    if isinstance(f, Atom) or isinstance(f, Not):
        if t > horizon:
            raise HorizonError(f"atom read at t={t} beyond horizon {horizon}")
        return
    if isinstance(f, (And, Or)):
        for c in f.children:
            _check_horizon(c, t, horizon)
        return
    need = t + reach(f)
    if need > horizon:
        raise HorizonError(
            f"operator {to_text(f)!r} started at t={t} needs horizon {need} > {horizon}"
        )


def _ground(f, t):
    if isinstance(f, Atom):
        return TimedLiteral(f.name, t, True)
    if isinstance(f, Not):
        return TimedLiteral(f.child.name, t, False)
    if isinstance(f, And):
        return And(tuple(_ground(c, t) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_ground(c, t) for c in f.children))
    if isinstance(f, Eventually):
        return Or(tuple(_ground(f.child, t + k) for k in f.interval))
    if isinstance(f, Always):
        return And(tuple(_ground(f.child, t + k) for k in f.interval))
    if isinstance(f, Until):
        lo = t + f.interval.lo
        terms = []
        for tp in range(lo, t + f.interval.hi + 1):
            holds_before = [_ground(f.left, tpp) for tpp in range(lo, tp + 1)]
            terms.append(And((_ground(f.right, tp), *holds_before)))
        return Or(tuple(terms))
    raise TypeError(f"not a formula: {f!r}")


def literals(g) -> Iterator[TimedLiteral]:
    """Leaves of a grounded formula in depth-first order (with repeats)."""
    if isinstance(g, TimedLiteral):
        yield g
    else:
        for c in g.children:
            yield from literals(c)


def predicate_keys(g) -> list:
    """Unique (predicate, time) pairs in first-appearance order."""
    seen = {}
    for lit in literals(g):
        seen.setdefault(lit.key(), None)
    return list(seen)


def evaluate(g, signal: Mapping) -> bool:
    """Boolean value of a grounded formula.

    ``signal`` maps ``(predicate, time)`` to a truth value; a negative
    literal reads the complement.
    """
    if isinstance(g, TimedLiteral):
        try:
            v = bool(signal[g.key()])
        except KeyError:
            raise KeyError(f"signal has no entry for {g.predicate}@{g.time}") from None
        return v if g.polarity else not v
    if isinstance(g, And):
        return all(evaluate(c, signal) for c in g.children)
    if isinstance(g, Or):
        return any(evaluate(c, signal) for c in g.children)
    raise TypeError(f"not a grounded formula: {g!r}")
