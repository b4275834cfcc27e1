"""Time-expanded site graphs (dynamic network flows) for robot motion."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import EQ, ConstraintFragment


@dataclass(frozen=True)
class Arc:
    src: str
    dst: str
    k: int = 1
    cost: float | None = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"arc {self.src}->{self.dst}: travel slots must be >= 1")


@dataclass
class SiteGraph:
    """Sites and directed arcs with travel times (in slots).

    ``stay_cost`` applies to stay edges when costs are fixed rather than
    drawn at random.
    """

    sites: list
    arcs: list
    coords: dict = field(default_factory=dict)
    stay_cost: float = 0.0

    def __post_init__(self):
        if len(set(self.sites)) != len(self.sites):
            raise ValueError("site names must be unique")
        known = set(self.sites)
        for a in self.arcs:
            if a.src not in known or a.dst not in known:
                raise ValueError(f"arc {a.src}->{a.dst} references an unknown site")

    @classmethod
    def from_dict(cls, d: dict) -> "SiteGraph":
        sites, coords = [], {}
        for s in d["sites"]:
            if isinstance(s, str):
                sites.append(s)
            else:
                sites.append(s["name"])
                if "coords" in s:
                    coords[s["name"]] = tuple(s["coords"])
        arcs = []
        for a in d.get("arcs", []):
            arc = Arc(a["from"], a["to"], int(a.get("k", 1)), a.get("cost"))
            arcs.append(arc)
            if a.get("bidirectional", d.get("bidirectional", True)):
                arcs.append(Arc(arc.dst, arc.src, arc.k, arc.cost))
        return cls(sites, arcs, coords, float(d.get("stay_cost", 0.0)))

    @classmethod
    def load(cls, path) -> "SiteGraph":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "sites": [
                {"name": s, **({"coords": list(self.coords[s])} if s in self.coords else {})}
                for s in self.sites
            ],
            "arcs": [
                {"from": a.src, "to": a.dst, "k": a.k, **({"cost": a.cost} if a.cost is not None else {})}
                for a in self.arcs
            ],
            "bidirectional": False,
            "stay_cost": self.stay_cost,
        }


SOURCE, SINK = "source", "sink"
STAY, MOVE, START, END = "stay", "move", "start", "end"


@dataclass(frozen=True)
class DnfEdge:
    tail: object  # (site, t) or SOURCE
    head: object  # (site, t) or SINK
    kind: str
    cost: float


@dataclass
class TimeExpandedGraph:
    sites: list
    horizon: int
    initial_site: str
    edges: list
    robot: str = "r"

    def __post_init__(self):
        self._in: dict = {}
        self._out: dict = {}
        for k, e in enumerate(self.edges):
            self._in.setdefault(e.head, []).append(k)
            self._out.setdefault(e.tail, []).append(k)

    @property
    def base_vertices(self) -> list:
        return [(s, t) for t in range(self.horizon) for s in self.sites]

    def in_edges(self, v) -> list:
        return list(self._in.get(v, []))

    def out_edges(self, v) -> list:
        return list(self._out.get(v, []))

    def count(self, kind) -> int:
        return sum(e.kind == kind for e in self.edges)

    def r_name(self, k) -> str:
        return f"r.{self.robot}.{k}"

    def costs(self) -> np.ndarray:
        return np.array([e.cost for e in self.edges])

    def paths(self, cap: int | None = None) -> list:
        """All source-to-sink edge paths, depth first in edge order."""
        found = []

        def walk(v, acc):
            if v == SINK:
                found.append(list(acc))
                if cap is not None and len(found) > cap:
                    raise OverflowError(f"more than {cap} paths")
                return
            for k in self._out.get(v, []):
                acc.append(k)
                walk(self.edges[k].head, acc)
                acc.pop()

        walk(SOURCE, [])
        return found

    def site_sequence(self, path) -> list:
        """Site occupied at each slot by a source-to-sink path.

        During a multi-slot move the robot is reported at the departure
        site until it arrives.
        """
        seq = [None] * self.horizon
        for k in path:
            e = self.edges[k]
            if e.kind == START:
                seq[0] = e.head[0]
            elif e.kind in (STAY, MOVE):
                (s0, t0), (s1, t1) = e.tail, e.head
                for t in range(t0 + 1, t1):
                    seq[t] = s0 if seq[t] is None else seq[t]
                seq[t1] = s1
        return seq

    def occupancy(self, path) -> set:
        """Base vertices the path enters (the vertex-occupancy signal)."""
        return {self.edges[k].head for k in path if self.edges[k].head != SINK}


def build_dnf(
    site_graph: SiteGraph,
    N: int,
    initial_site: str,
    seed: int | None = None,
    robot: str = "r",
    rng: np.random.Generator | None = None,
) -> TimeExpandedGraph:
    """Time-expanded graph with slots ``0..N-1``.

    Edges, in order: one start edge from the super-source into the initial
    site at slot 0; then for each slot ``t`` the stay edges and the
    movement edges leaving slot ``t`` (moves that would arrive after slot
    ``N-1`` are dropped); finally one zero-cost edge from every last-slot
    vertex into the super-sink. With a seed (or generator) every stay and
    movement edge draws an independent uniform [0, 1] cost in that order;
    otherwise fixed arc costs / ``stay_cost`` are used.
    """
    if N < 1:
        raise ValueError("horizon N must be >= 1")
    if initial_site not in site_graph.sites:
        raise ValueError(f"unknown initial site {initial_site!r}")
    if rng is None and seed is not None:
        rng = np.random.default_rng(seed)

    def cost(fixed):
        if rng is not None:
            return float(rng.uniform(0.0, 1.0))
        return 0.0 if fixed is None else float(fixed)

    edges = [DnfEdge(SOURCE, (initial_site, 0), START, 0.0)]
    for t in range(N - 1):
        for s in site_graph.sites:
            edges.append(DnfEdge((s, t), (s, t + 1), STAY, cost(site_graph.stay_cost)))
        for a in site_graph.arcs:
            if t + a.k <= N - 1:
                edges.append(DnfEdge((a.src, t), (a.dst, t + a.k), MOVE, cost(a.cost)))
    for s in site_graph.sites:
        edges.append(DnfEdge((s, N - 1), SINK, END, 0.0))
    return TimeExpandedGraph(list(site_graph.sites), N, initial_site, edges, robot)


def encode_dnf(g: TimeExpandedGraph) -> ConstraintFragment:
    """Unit-flow constraints and edge-cost objective of one robot graph."""
    frag = ConstraintFragment()
    for k, e in enumerate(g.edges):
        frag.add_var(g.r_name(k), 0.0, 1.0)
        if e.cost:
            frag.objective[g.r_name(k)] = e.cost
    frag.add([(g.r_name(k), 1.0) for k in g.out_edges(SOURCE)], EQ, 1.0, f"dnf_source[{g.robot}]")
    for v in g.base_vertices:
        terms = [(g.r_name(k), 1.0) for k in g.in_edges(v)]
        terms += [(g.r_name(k), -1.0) for k in g.out_edges(v)]
        if terms:
            frag.add(terms, EQ, 0.0, f"dnf_vertex[{g.robot}]")
    return frag
