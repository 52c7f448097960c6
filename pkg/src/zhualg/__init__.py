"""Exact symbolic computation in higher level Zhu algebras.

The package computes in the quotient algebras of a strongly generated vertex
operator algebra (rank-one Heisenberg or Virasoro) by the level-n ideal
spanned by circle products and by images of L(-1) + L(0), entirely over
exact rational-function scalars, and verifies algebra presentations with
explicit, recheckable membership certificates.
"""

__version__ = "0.1.0"
