"""
Relaxation tightness at desk scale
==================================

Runs both encodings on the campus-map team + charge scenario over a few
seeds and prints the root relaxation gap and node counts. Pass a seed
count (default 3); the full ten-seed sweep takes several minutes.

    python demos/06_desk_benchmark.py 10 /tmp/desk
"""
import sys

from stlflow.bench import Scenario, format_summary, run_benchmark

n = int(sys.argv[1]) if len(sys.argv) > 1 else 3
out = sys.argv[2] if len(sys.argv) > 2 else None

sc = Scenario.load("campus_desk.json")
print(sc.spec, "\n")
records = run_benchmark(sc, range(n), out_dir=out)
for r in records:
    print(f"{r.encoding:5s} seed {r.seed}: gap {100 * r.root_gap:5.1f}%  nodes {r.nodes_prove_opt:5d}  opt {r.optimum:.4f}")
print()
print(format_summary(records))
if out:
    print("traces and runs.csv written to", out)
