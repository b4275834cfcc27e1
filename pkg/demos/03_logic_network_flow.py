"""
Logic Network Flow encoding
===========================

The same formula tree becomes a small source-to-target graph. Each edge
carries a set of literals; a unit flow has to find a path whose literals
all hold, while a vector flow seeded with the predicate values carries
their truth along.
"""
from stlflow.formula import ground, parse_stl
from stlflow.logicflow import build_lnf, encode_lnf
from stlflow.logictree import build_logic_tree
from stlflow.oracle import feasible_z_set, semantic_z_set

g = ground(parse_stl("((pi1 | pi2) & (pi3 | (pi4 & !pi5)))"))
lnf = build_lnf(build_logic_tree(g))
print("vertices", lnf.vertices)
for k, e in enumerate(lnf.edges):
    print(f"  edge {k}: {e.tail} -> {e.head}  {[str(l) for l in e.literals]}")

frag = encode_lnf(lnf, negation_guard=False)
print(len(frag.constraints), "rows in", len(frag.tags), "groups:", frag.tags)

# with only the signed edge rows the negated literal can be dodged: w[5]
# may travel on an edge the unit flow does not use
keys = lnf.predicates
loose = feasible_z_set(frag, keys)
exact = semantic_z_set(g, keys)
print("spurious without guard:", sorted(loose - exact))

# the guard rows w_e[i] <= y_e close that gap
print("guarded == semantics:", feasible_z_set(encode_lnf(lnf), keys) == exact)
print(lnf.dumps())
