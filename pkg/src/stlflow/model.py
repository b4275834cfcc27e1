"""Mixed-binary LP data model, constraint fragments, assembly and LP export.

Variables are referenced by name everywhere; :meth:`MblpModel.to_arrays`
produces the sparse matrix form the solvers consume.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from scipy import sparse

LE, EQ, GE = "<=", "=", ">="


@dataclass(frozen=True)
class Variable:
    name: str
    lb: float = 0.0
    ub: float = 1.0
    binary: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.lb) and np.isfinite(self.ub)):
            raise ValueError(f"variable {self.name!r} needs finite bounds")
        if self.lb > self.ub:
            raise ValueError(f"variable {self.name!r} has lb > ub")


@dataclass(frozen=True)
class Constraint:
    coeffs: Mapping[str, float]
    sense: str
    rhs: float
    tag: str = ""

    def __post_init__(self):
        if self.sense not in (LE, EQ, GE):
            raise ValueError(f"bad relation {self.sense!r}")

    def activity(self, values: Mapping[str, float]) -> float:
        return sum(a * values[v] for v, a in self.coeffs.items())

    def violation(self, values: Mapping[str, float]) -> float:
        lhs = self.activity(values)
        if self.sense == LE:
            return max(0.0, lhs - self.rhs)
        if self.sense == GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)


def linear(terms: Iterable[tuple[str, float]]) -> dict:
    """Sum repeated variables in a term list and drop zero coefficients."""
    out: dict = {}
    for v, a in terms:
        out[v] = out.get(v, 0.0) + a
    return {v: a for v, a in out.items() if a != 0.0}


@dataclass
class ConstraintFragment:
    """Variables, constraints and objective terms produced by one encoder.

    ``imports`` lists variable names used here but declared by another
    fragment (the shared predicate vector, typically).
    """

    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)
    imports: set = field(default_factory=set)

    def add_var(self, name, lb=0.0, ub=1.0, binary=False) -> str:
        self.variables.append(Variable(name, lb, ub, binary))
        return name

    def add(self, coeffs, sense, rhs, tag=""):
        if isinstance(coeffs, Mapping):
            coeffs = linear(coeffs.items())
        else:
            coeffs = linear(coeffs)
        self.constraints.append(Constraint(coeffs, sense, float(rhs), tag))

    def check(self) -> None:
        declared = {v.name for v in self.variables}
        known = declared | set(self.imports)
        for c in self.constraints:
            missing = set(c.coeffs) - known
            if missing:
                raise ValueError(f"constraint {c.tag!r} references undeclared {sorted(missing)}")
        missing = set(self.objective) - known
        if missing:
            raise ValueError(f"objective references undeclared {sorted(missing)}")

    @property
    def tags(self) -> list:
        """Distinct constraint tags in emission order."""
        return list(dict.fromkeys(c.tag for c in self.constraints))


@dataclass
class MblpModel:
    variables: list
    constraints: list
    objective: dict
    name: str = "model"

    def __post_init__(self):
        self.index = {v.name: i for i, v in enumerate(self.variables)}
        if len(self.index) != len(self.variables):
            raise ValueError("duplicate variable names in model")
        for c in self.constraints:
            for v in c.coeffs:
                if v not in self.index:
                    raise ValueError(f"constraint {c.tag!r} references undeclared {v!r}")
        for v in self.objective:
            if v not in self.index:
                raise ValueError(f"objective references undeclared {v!r}")

    @classmethod
    def from_fragment(cls, frag: ConstraintFragment, name="model") -> "MblpModel":
        if frag.imports - {v.name for v in frag.variables}:
            raise ValueError(f"unresolved imports: {sorted(frag.imports)}")
        return cls(list(frag.variables), list(frag.constraints), dict(frag.objective), name)

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def stats(self) -> dict:
        nb = sum(v.binary for v in self.variables)
        return {
            "n_binary": nb,
            "n_continuous": len(self.variables) - nb,
            "n_constraints": len(self.constraints),
        }

    def stats_json(self, **extra) -> str:
        return json.dumps({**self.stats(), **extra}, sort_keys=True)

    def binary_indices(self) -> np.ndarray:
        return np.array([i for i, v in enumerate(self.variables) if v.binary], dtype=int)

    def bounds(self) -> tuple:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def cost_vector(self) -> np.ndarray:
        c = np.zeros(self.n_vars)
        for v, a in self.objective.items():
            c[self.index[v]] = a
        return c

    def to_arrays(self) -> dict:
        """Sparse form: ``A_ub x <= b_ub``, ``A_eq x = b_eq`` plus bounds."""
        rows = {LE: ([], [], [], []), EQ: ([], [], [], [])}
        for c in self.constraints:
            sign = -1.0 if c.sense == GE else 1.0
            r, cols, vals, rhs = rows[EQ if c.sense == EQ else LE]
            k = len(rhs)
            for v, a in c.coeffs.items():
                r.append(k)
                cols.append(self.index[v])
                vals.append(sign * a)
            rhs.append(sign * c.rhs)
        out = {"c": self.cost_vector()}
        for sense, key in ((LE, "ub"), (EQ, "eq")):
            r, cols, vals, rhs = rows[sense]
            out[f"A_{key}"] = sparse.csr_matrix(
                (vals, (r, cols)), shape=(len(rhs), self.n_vars), dtype=float
            )
            out[f"b_{key}"] = np.asarray(rhs, dtype=float)
        out["lb"], out["ub"] = self.bounds()
        return out

    def values(self, x) -> dict:
        return {v.name: float(x[i]) for i, v in enumerate(self.variables)}

    def max_violation(self, x) -> float:
        vals = self.values(x)
        lb, ub = self.bounds()
        worst = float(np.max(np.maximum(lb - x, x - ub), initial=0.0))
        for c in self.constraints:
            worst = max(worst, c.violation(vals))
        return worst

    def objective_value(self, x) -> float:
        return float(self.cost_vector() @ np.asarray(x, dtype=float))

    def relaxed(self) -> "MblpModel":
        vs = [Variable(v.name, v.lb, v.ub, False) for v in self.variables]
        return MblpModel(vs, self.constraints, self.objective, self.name + "_lp")

    def with_bounds(self, fixes: Mapping[str, tuple]) -> "MblpModel":
        vs = [
            Variable(v.name, *fixes[v.name], v.binary) if v.name in fixes else v
            for v in self.variables
        ]
        return MblpModel(vs, self.constraints, self.objective, self.name)


def assemble(
    spec_fragment: ConstraintFragment | None,
    dyn_fragments: list,
    coupling: ConstraintFragment | None = None,
    name: str = "model",
) -> MblpModel:
    """Fuse encoder fragments into one model.

    Fragments must declare disjoint variable names; the objective is the
    sum of fragment objectives (the dynamics edge costs).
    """
    frags = [f for f in (spec_fragment, *dyn_fragments, coupling) if f is not None]
    variables, constraints, objective = [], [], {}
    owner = {}
    for k, f in enumerate(frags):
        f.check()
        for v in f.variables:
            if v.name in owner:
                raise ValueError(f"variable {v.name!r} declared by two fragments")
            owner[v.name] = k
            variables.append(v)
        constraints.extend(f.constraints)
        for v, a in f.objective.items():
            objective[v] = objective.get(v, 0.0) + a
    unresolved = set().union(*(f.imports for f in frags)) - set(owner) if frags else set()
    if unresolved:
        raise ValueError(f"unresolved imports: {sorted(unresolved)[:5]}")
    return MblpModel(variables, constraints, objective, name)


# ---------------------------------------------------------------------------
# LP text export (CPLEX LP format)


def _fmt(a: float) -> str:
    return repr(float(a)) if not float(a).is_integer() else str(int(a))


def _expr(coeffs: Mapping[str, float]) -> str:
    parts = []
    for k, (v, a) in enumerate(coeffs.items()):
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        term = v if mag == 1 else f"{_fmt(mag)} {v}"
        if k == 0:
            parts.append(term if sign == "+" else f"- {term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts) if parts else "0"


def export_lp(m: MblpModel) -> str:
    """CPLEX-LP text with variables in declaration order; empty sections omitted."""
    order = m.index
    lines = ["Minimize"]
    obj = {v: m.objective[v] for v in sorted(m.objective, key=order.get)}
    lines.append(f" obj: {_expr(obj)}")
    if m.constraints:
        lines.append("Subject To")
        for k, c in enumerate(m.constraints):
            coeffs = {v: c.coeffs[v] for v in sorted(c.coeffs, key=order.get)}
            lines.append(f" c{k}: {_expr(coeffs)} {c.sense} {_fmt(c.rhs)}")
    lines.append("Bounds")
    for v in m.variables:
        if v.lb == v.ub:
            lines.append(f" {v.name} = {_fmt(v.lb)}")
        else:
            lines.append(f" {_fmt(v.lb)} <= {v.name} <= {_fmt(v.ub)}")
    binaries = [v.name for v in m.variables if v.binary]
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {b}" for b in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Predicate coupling


@dataclass(frozen=True)
class PredicateBinding:
    """Ties predicate ``name`` to robot ``robot`` occupying ``site``."""

    name: str
    robot: str
    site: str


def default_bindings(names: Iterable[str], robots: Iterable[str], sites: Iterable[str]) -> dict:
    """Bind atoms spelled ``<robot>.<site>``."""
    robots, sites = set(robots), set(sites)
    out = {}
    for n in names:
        robot, _, site = n.partition(".")
        if robot not in robots or site not in sites:
            raise ValueError(f"atom {n!r} does not name an existing <robot>.<site> pair")
        out[n] = PredicateBinding(n, robot, site)
    return out


def couple_predicates(bindings: Mapping, keys: Iterable[tuple], graphs: Mapping) -> ConstraintFragment:
    """Equality ``z[pred@t] = sum of flows into vertex (site, t)``.

    ``keys`` are the (predicate, time) pairs used by the spec fragment and
    ``graphs`` maps robot id to its time-expanded graph. Per-robot in-flow
    at a vertex never exceeds one, so the equality is an exact
    linearisation of "some in-edge is used iff the predicate holds".
    """
    from .logictree import z_name

    frag = ConstraintFragment()
    for pred, t in keys:
        try:
            b = bindings[pred]
        except KeyError:
            raise ValueError(f"predicate {pred!r} has no binding") from None
        if b.robot not in graphs:
            raise ValueError(f"binding {pred!r}: unknown robot {b.robot!r}")
        g = graphs[b.robot]
        if b.site not in g.sites or not (0 <= t < g.horizon):
            raise ValueError(f"binding {pred!r}@{t}: no vertex ({b.site}, {t})")
        z = z_name((pred, t))
        frag.imports.add(z)
        frag.imports.update(g.r_name(k) for k in g.in_edges((b.site, t)))
        frag.add([(z, 1.0)] + [(g.r_name(k), -1.0) for k in g.in_edges((b.site, t))], EQ, 0.0, "couple")
    return frag
