"""Compile bounded-time STL specifications into mixed-binary LPs (Logic Tree
and Logic Network Flow encodings) coupled with time-expanded robot graphs,
and solve them with a built-in simplex / branch-and-bound engine."""

__version__ = "0.1.0"
