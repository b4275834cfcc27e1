"""Scenarios, task templates and the benchmark runner.

A scenario names a site map, robots with initial sites, a horizon, and a
specification (STL text over ``<robot>.<site>`` atoms, or a list of task
templates that are conjoined). Each seed draws fresh uniform edge costs;
the same seed gives the same costs for both encodings.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import statistics
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .dynflow import SiteGraph, build_dnf, encode_dnf
from .formula import ground, parse_stl, predicate_keys, reach, to_nnf
from .logicflow import build_lnf, encode_lnf
from .logictree import build_logic_tree, encode_tree
from .model import assemble, couple_predicates, default_bindings, PredicateBinding
from .solver import STATUS_OPTIMAL, branch_and_bound, compute_root_gap

log = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent / "scenarios"
ENCODINGS = ("tree", "flow")


# ---------------------------------------------------------------------------
# Templates


def _join(op: str, parts: list) -> str:
    return parts[0] if len(parts) == 1 else "(" + f" {op} ".join(parts) + ")"


def _check_window(lo, hi, horizon, what):
    if not (0 <= lo <= hi):
        raise ValueError(f"{what}: malformed window [{lo},{hi}]")
    if horizon is not None and hi > horizon:
        raise ValueError(f"{what}: window end {hi} exceeds horizon {horizon}")


def expand_template(kind: str, horizon: int | None = None, **args) -> str:
    """STL text for one task template.

    ``deliver``: some robot holds ``pickup`` for 3 slots starting inside
    ``window`` and ``dropoff`` for 3 slots starting ``delay`` later.
    ``charge``: every robot holds ``site`` for ``hold+1`` slots starting
    inside ``window`` (default [10, 20]).
    ``team``: inside ``window`` two distinct robots both hold ``site`` for
    ``duration+1`` slots.
    ``search``: each of ``sites`` is held for 2 slots by some robot,
    starting inside its own window.

    ``horizon`` (last slot index), when given, bounds the total reach.
    """
    robots = list(args["robots"])
    if kind == "deliver":
        t1, t2 = args["window"]
        t = args["delay"]
        a, b = args["pickup"], args["dropoff"]
        _check_window(t1, t2 + t + 2, horizon, "deliver")
        parts = [f"F[{t1},{t2}] (G[0,2] {r}.{a} & G[{t},{t + 2}] {r}.{b})" for r in robots]
        return _join("|", parts)
    if kind == "charge":
        lo, hi = args.get("window", (10, 20))
        hold = args.get("hold", 1)
        _check_window(lo, hi + hold, horizon, "charge")
        parts = [f"F[{lo},{hi}] G[0,{hold}] {r}.{args['site']}" for r in robots]
        return _join("&", parts)
    if kind == "team":
        if len(robots) < 2:
            raise ValueError("team task needs at least two robots")
        t1, t2 = args["window"]
        d = args["duration"]
        p = args["site"]
        _check_window(t1, t2 + d, horizon, "team")
        parts = [
            f"(G[0,{d}] {i}.{p} & G[0,{d}] {j}.{p})"
            for i in robots for j in robots if i != j
        ]
        return f"F[{t1},{t2}] {_join('|', parts)}"
    if kind == "search":
        hold = args.get("hold", 1)
        parts = []
        for site, (lo, hi) in zip(args["sites"], args["windows"]):
            _check_window(lo, hi + hold, horizon, "search")
            inner = _join("|", [f"G[0,{hold}] {r}.{site}" for r in robots])
            parts.append(f"F[{lo},{hi}] {inner}")
        return _join("&", parts)
    raise ValueError(f"unknown template kind {kind!r}")


# ---------------------------------------------------------------------------
# Scenarios


@dataclass
class Instance:
    graphs: dict
    bindings: dict
    formula: object
    grounded: object
    keys: list
    initial_sites: dict


@dataclass
class Scenario:
    name: str
    site_graph: SiteGraph
    robots: list  # [{"id": ..., "initial_site": ...}]
    horizon: int
    spec: str | None
    seeds: list = field(default_factory=lambda: [0])
    dT: float = 1.0
    random_initial: bool = False
    cost: str = "uniform"
    solver: dict = field(default_factory=dict)
    encoding_options: dict = field(default_factory=dict)
    bindings: dict | None = None

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        self.formula = None
        if self.spec:
            table = set(self.bindings) if self.bindings else None
            self.formula = to_nnf(parse_stl(self.spec, table))
            if reach(self.formula) > self.horizon - 1:
                raise ValueError(
                    f"spec reaches slot {reach(self.formula)} but the horizon has slots 0..{self.horizon - 1}"
                )

    @property
    def robot_ids(self) -> list:
        return [r["id"] for r in self.robots]

    @classmethod
    def from_dict(cls, d: dict, base: Path | None = None) -> "Scenario":
        m = d["map"]
        if isinstance(m, str):
            path = Path(m)
            if not path.is_absolute():
                path = (base or SCENARIO_DIR) / path
            site_graph = SiteGraph.load(path)
        else:
            site_graph = SiteGraph.from_dict(m)
        robots = [r if isinstance(r, dict) else {"id": r} for r in d["robots"]]
        horizon = int(d["horizon"])
        spec = d.get("spec")
        if spec is None and d.get("tasks"):
            ids = [r["id"] for r in robots]
            parts = []
            for task in d["tasks"]:
                task = dict(task)
                kind = task.pop("kind")
                task.setdefault("robots", ids)
                parts.append(expand_template(kind, horizon=horizon - 1, **task))
            spec = parts[0] if len(parts) == 1 else "(" + " & ".join(parts) + ")"
        bindings = None
        if "predicates" in d:
            bindings = {
                name: PredicateBinding(name, b["robot"], b["site"]) for name, b in d["predicates"].items()
            }
        return cls(
            name=d.get("name", "scenario"),
            site_graph=site_graph,
            robots=robots,
            horizon=horizon,
            spec=spec,
            seeds=list(d.get("seeds", [0])),
            dT=float(d.get("dT", 1.0)),
            random_initial=bool(d.get("random_initial", False)),
            cost=d.get("cost", "uniform"),
            solver=dict(d.get("solver", {})),
            encoding_options=dict(d.get("encoding_options", {})),
            bindings=bindings,
        )

    @classmethod
    def load(cls, path) -> "Scenario":
        path = Path(path)
        if not path.exists() and (SCENARIO_DIR / path).exists():
            path = SCENARIO_DIR / path
        return cls.from_dict(json.loads(path.read_text()), base=path.parent)

    def instantiate(self, seed: int) -> Instance:
        """Graphs with this seed's costs (and initial sites, if random)."""
        sites = self.site_graph.sites
        init = {}
        if self.random_initial:
            rng = np.random.default_rng([seed, 1])
            picks = rng.choice(len(sites), size=len(self.robots), replace=len(self.robots) > len(sites))
            init = {r["id"]: sites[int(k)] for r, k in zip(self.robots, picks)}
        else:
            init = {r["id"]: r["initial_site"] for r in self.robots}
        graphs = {}
        for idx, r in enumerate(self.robots):
            rng = np.random.default_rng([seed, 0, idx]) if self.cost == "uniform" else None
            graphs[r["id"]] = build_dnf(self.site_graph, self.horizon, init[r["id"]], robot=r["id"], rng=rng)
        grounded, keys, bindings = None, [], {}
        if self.formula is not None:
            grounded = ground(self.formula, 0, self.horizon - 1)
            keys = predicate_keys(grounded)
            names = sorted({p for p, _ in keys})
            if self.bindings:
                bindings = {n: self.bindings[n] for n in names}
            else:
                bindings = default_bindings(names, self.robot_ids, sites)
        return Instance(graphs, bindings, self.formula, grounded, keys, init)


def compile_instance(inst: Instance, encoding: str, **options):
    """Assemble the full model for one encoding; returns ``(model, extra)``.

    ``extra`` holds the encoder structure (tree or flow graph).
    """
    if encoding not in ENCODINGS:
        raise ValueError(f"encoding must be one of {ENCODINGS}")
    dyn = [encode_dnf(g) for g in inst.graphs.values()]
    if inst.grounded is None:
        return assemble(None, dyn, None, name="dnf"), {}
    tree = build_logic_tree(inst.grounded)
    if encoding == "tree":
        spec_frag, extra = encode_tree(tree), {"tree": tree}
    else:
        lnf = build_lnf(tree, contract_terminal=options.get("contract_terminal", True))
        spec_frag = encode_lnf(
            lnf,
            relax_y_always=options.get("relax_y_always", False),
            negation_guard=options.get("negation_guard", True),
            in_flow_cap=options.get("in_flow_cap", False),
        )
        extra = {"tree": tree, "lnf": lnf}
    coupling = couple_predicates(inst.bindings, inst.keys, inst.graphs)
    return assemble(spec_frag, dyn, coupling, name=encoding), extra


def model_stats(model, extra) -> dict:
    st = model.stats()
    if "lnf" in extra:
        n_y = sum(1 for v in model.variables if v.name.startswith("lnf.y") and v.binary)
        st["n_binary_without_edge_flags"] = st["n_binary"] - n_y
    return st


def decode_plan(inst: Instance, model, x) -> dict:
    """Site sequence per robot read off the edge flows of a solution."""
    vals = model.values(x)
    plans = {}
    for rid, g in inst.graphs.items():
        path = [k for k in range(len(g.edges)) if vals[g.r_name(k)] > 0.5]
        plans[rid] = g.site_sequence(path)
    return plans


# ---------------------------------------------------------------------------
# Benchmark


@dataclass
class RunRecord:
    encoding: str
    seed: int
    n_binary: int
    n_continuous: int
    n_constraints: int
    root_gap: float
    t_find_opt: float
    nodes_find_opt: int
    t_prove_opt: float
    nodes_prove_opt: int
    optimum: float
    status: str = field(default=STATUS_OPTIMAL, compare=False)


CSV_FIELDS = [f.name for f in fields(RunRecord) if f.name != "status"]


def solver_params(scenario: Scenario, **override) -> dict:
    params = {"gap_tol": 0.0, "time_limit": None, "node_limit": None, "lp_method": "simplex"}
    params.update({k: v for k, v in scenario.solver.items() if k in params})
    params.update({k: v for k, v in override.items() if v is not None})
    return params


def run_one(scenario: Scenario, seed: int, encoding: str, trace_path=None, **override):
    inst = scenario.instantiate(seed)
    model, extra = compile_instance(inst, encoding, **scenario.encoding_options)
    res = branch_and_bound(model, **solver_params(scenario, **override))
    if trace_path is not None:
        res.write_trace(trace_path)
    st = model.stats()
    gap = compute_root_gap(res) if res.status == STATUS_OPTIMAL else math.nan
    rec = RunRecord(
        encoding=encoding,
        seed=seed,
        n_binary=st["n_binary"],
        n_continuous=st["n_continuous"],
        n_constraints=st["n_constraints"],
        root_gap=gap,
        t_find_opt=res.t_find,
        nodes_find_opt=res.nodes_to_incumbent,
        t_prove_opt=res.t_prove,
        nodes_prove_opt=res.nodes_to_proof,
        optimum=res.objective,
        status=res.status,
    )
    return rec, res, inst, model


def run_benchmark(scenario: Scenario, seeds=None, encodings=ENCODINGS, out_dir=None, **override) -> list:
    """Run every (seed, encoding) pair; write ``runs.csv`` and traces to ``out_dir``.

    A failing run is logged and recorded with empty metrics; the batch goes on.
    """
    seeds = scenario.seeds if seeds is None else list(seeds)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    records = []
    for seed in seeds:
        for enc in encodings:
            trace = out / f"trace_{enc}_seed{seed}.jsonl" if out is not None else None
            try:
                rec = run_one(scenario, seed, enc, trace, **override)[0]
            except Exception as exc:  # noqa: BLE001 - batch must continue
                log.exception("run %s seed=%s failed", enc, seed)
                rec = RunRecord(enc, seed, 0, 0, 0, math.nan, math.nan, 0, math.nan, 0, math.nan, f"error: {exc}")
            log.info("%s seed=%s status=%s nodes=%s gap=%.4f", enc, seed, rec.status, rec.nodes_prove_opt, rec.root_gap)
            records.append(rec)
    if out is not None:
        write_csv(records, out / "runs.csv")
        (out / "summary.txt").write_text(format_summary(records))
    return records


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in records:
            row = asdict(r)
            failed = r.status.startswith("error")
            w.writerow(["" if failed and k not in ("encoding", "seed") else row[k] for k in CSV_FIELDS])


def median_mad(values) -> tuple:
    vals = [v for v in values if v is not None and not (isinstance(v, float) and math.isnan(v))]
    if not vals:
        return math.nan, math.nan
    med = statistics.median(vals)
    return med, statistics.median(abs(v - med) for v in vals)


SUMMARY_METRICS = (
    "n_binary", "n_continuous", "n_constraints", "root_gap",
    "t_find_opt", "nodes_find_opt", "t_prove_opt", "nodes_prove_opt",
)


def summarize(records) -> dict:
    out = {}
    for enc in dict.fromkeys(r.encoding for r in records):
        rows = [r for r in records if r.encoding == enc]
        out[enc] = {m: median_mad([getattr(r, m) for r in rows]) for m in SUMMARY_METRICS}
    return out


def format_summary(records) -> str:
    summ = summarize(records)
    encs = list(summ)
    lines = ["metric".ljust(18) + "".join(e.rjust(24) for e in encs)]
    for m in SUMMARY_METRICS:
        cells = []
        for e in encs:
            med, mad = summ[e][m]
            scale = 100.0 if m == "root_gap" else 1.0
            cells.append(f"{med * scale:.4g} +/- {mad * scale:.3g}".rjust(24))
        lines.append(m.ljust(18) + "".join(cells))
    lines.append("(median +/- median absolute deviation; root_gap in %)")
    return "\n".join(lines) + "\n"
