"""
Logic Tree encoding
===================

The baseline encoding keeps one continuous variable per AND/OR node and
ties it to its children with the usual inequalities. Leaves are the
binary predicate variables.
"""
from stlflow.formula import ground, parse_stl, predicate_keys
from stlflow.logictree import build_logic_tree, encode_tree
from stlflow.oracle import feasible_z_set, semantic_z_set

g = ground(parse_stl("F[0,2] G[0,1] p"), 0, 3)
tree = build_logic_tree(g)
print(f"{len(tree.nodes)} nodes: {len(tree.internals)} internal, {len(tree.leaves)} leaves")

frag = encode_tree(tree)
for c in frag.constraints:
    print(f"  [{c.tag}] {c.coeffs} {c.sense} {c.rhs:g}")

# the predicate vectors for which the fragment is feasible are exactly the
# satisfying assignments
keys = predicate_keys(g)
lt = feasible_z_set(frag, keys)
print(sorted(lt))
print("matches direct evaluation:", lt == semantic_z_set(g, keys))
