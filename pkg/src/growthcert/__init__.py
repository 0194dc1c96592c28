"""Exact-arithmetic growth certificates for rational matrix groups.

The package enumerates Cayley balls of subgroups of SL_n(Q) in exact
arithmetic, hunts for short word pairs that generate a free semigroup via a
certified ping-pong argument, and converts such certificates into proven
exponential lower bounds on the word-growth rate.
"""

__version__ = "0.1.0"
