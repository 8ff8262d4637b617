"""Exact computation of local representation densities of quadratic lattices.

The package computes, in exact arithmetic, solution counts of quadratic
congruences mod p^j, local representation densities and their interpolations
as polynomials in X = p^(-s), discriminant-kernel volumes, orbit censuses,
normalized local zeta functions of binary lattices, archimedean gamma-factor
volumes, and genus-level Euler-product expansions with symbolic derivative
ledgers.  Every closed form has a counting-based oracle next to it, and the
identity suites (orbit equations, product recursions, trace identities,
worked global expansions) are verified mechanically by exact equality.
"""

from .exact import QS, LaurentRat
from .ledger import ConstLedger
from .lattice import Coset, DiagLattice, GramLattice

__all__ = [
    "QS",
    "LaurentRat",
    "ConstLedger",
    "Coset",
    "DiagLattice",
    "GramLattice",
]

__version__ = "0.1.0"
