"""Exact-arithmetic lab for ideals on omega, sequence-space norms, and
biorthogonal basis constructions.

Everything is computed in exact rational arithmetic (fractions.Fraction).
Membership in an ideal is answered by a three-valued Verdict: certified
answers require a certificate, a structural rule, or an exact closed form;
horizon-bounded heuristics only ever produce Undetermined.
"""

__version__ = "0.1.0"
