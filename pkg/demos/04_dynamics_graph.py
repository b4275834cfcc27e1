"""
Time-expanded robot graphs
==========================

A site graph (sites plus arcs that take one or more slots) is unrolled
over the horizon. One unit of flow per robot travels from a super source
to a super sink; every edge has a random cost.
"""
import numpy as np

from stlflow.bench import SCENARIO_DIR
from stlflow.dynflow import SiteGraph, build_dnf, encode_dnf
from stlflow.model import MblpModel
from stlflow.solver import solve_lp

sg = SiteGraph.load(SCENARIO_DIR / "tiny4_map.json")
g = build_dnf(sg, N=6, initial_site="p1", seed=0)
print(len(g.base_vertices), "base vertices,", len(g.edges), "edges")
print({k: g.count(k) for k in ("start", "stay", "move", "end")})

# the flow polytope is totally unimodular: the LP optimum is a path
sol = solve_lp(MblpModel.from_fragment(encode_dnf(g)))
path = [k for k in range(len(g.edges)) if sol.x[k] > 0.5]
print("LP optimum", round(sol.objective, 4), "integral:", bool(np.all(np.isin(np.round(sol.x, 9), (0, 1)))))
print("route", g.site_sequence(path))

cheapest = min(g.costs()[p].sum() for p in g.paths())
print("cheapest of", len(g.paths()), "paths:", round(cheapest, 4))

campus = build_dnf(SiteGraph.load(SCENARIO_DIR / "campus_map.json"), 30, "p1", seed=0)
print("campus map at N=30:", len(campus.base_vertices), "vertices,", len(campus.edges), "edges")
