"""
Bounded STL formulas: parse, normalise, ground, evaluate
=======================================================

Formulas are written in a small text grammar, pushed into negation normal
form, and then expanded over a finite horizon into a plain AND/OR tree of
timed literals.
"""
from stlflow.formula import evaluate, ground, literals, parse_stl, predicate_keys, to_nnf, to_text

# "eventually within 0..2, hold p for two consecutive slots"
f = parse_stl("F[0,2] G[0,1] p")
print(f)

# grounding turns the temporal operators into an OR of ANDs
g = ground(f, t0=0, horizon=3)


def show(node):
    return " | ".join("(" + " & ".join(map(str, c.children)) + ")" for c in node.children)


print(show(g))

# the distinct (predicate, time) pairs become the shared binary variables
print(predicate_keys(g))

# evaluation on a boolean signal
for bits in ([1, 1, 0, 0], [0, 1, 0, 1], [0, 0, 1, 1]):
    sig = {("p", t): bool(b) for t, b in enumerate(bits)}
    print(bits, evaluate(g, sig))

# negations are pushed to the atoms; F and G swap under negation
h = to_nnf(parse_stl("!(F[0,1] (a & !b))"))
print(to_text(h))
print([str(l) for l in literals(ground(h))])

# until: q must arrive within [1,2] with p holding from slot 1 up to then
print(show(ground(parse_stl("(p U[1,2] q)"))))
