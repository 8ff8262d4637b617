"""Symbolic constant ledgers for derivative expansions.

A ledger is a finite Q-linear combination over the symbol basis

    ONE, GAMMA (Euler-Mascheroni), LOG2, LOGPI, LOGP:p (one per prime),
    DZETA:k  = zeta'(-k)/zeta(-k),
    DL:D0:k  = L'(chi_D0, -k)/L(chi_D0, -k)  (chi_D0 the Kronecker character
               of a fundamental discriminant D0),
    C        = the undetermined constant appearing in the worked global
               expansions; it is carried opaquely and never evaluated.

Ledgers add componentwise and admit exact equality; everything except C can
be evaluated numerically to high precision for shadow checks.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

Symbol = tuple

ONE: Symbol = ("ONE",)
GAMMA: Symbol = ("GAMMA",)
LOG2: Symbol = ("LOG2",)
LOGPI: Symbol = ("LOGPI",)
C_PAPER: Symbol = ("C",)


def LOGP(p: int) -> Symbol:
    return ("LOGP", int(p))


def DZETA(k: int) -> Symbol:
    """zeta'(-k)/zeta(-k)."""
    return ("DZETA", int(k))


def DL(d0: int, k: int) -> Symbol:
    """L'(chi_d0, -k)/L(chi_d0, -k) for the fundamental discriminant d0."""
    return ("DL", int(d0), int(k))


def _name(sym: Symbol) -> str:
    return ":".join(str(x) for x in sym) if len(sym) > 1 else sym[0]


def _parse(name: str) -> Symbol:
    parts = name.split(":")
    return (parts[0],) + tuple(int(x) for x in parts[1:])


class ConstLedger:
    """Finitely supported map Symbol -> Fraction, with componentwise arithmetic."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[Symbol, Fraction] | None = None):
        self.coeffs: dict[Symbol, Fraction] = {}
        if coeffs:
            for sym, c in coeffs.items():
                c = Fraction(c)
                if c:
                    self.coeffs[sym] = c

    @staticmethod
    def single(sym: Symbol, c=1) -> "ConstLedger":
        return ConstLedger({sym: Fraction(c)})

    @staticmethod
    def rational(c) -> "ConstLedger":
        return ConstLedger({ONE: Fraction(c)})

    def __add__(self, other: "ConstLedger") -> "ConstLedger":
        out = dict(self.coeffs)
        for sym, c in other.coeffs.items():
            s = out.get(sym, Fraction(0)) + c
            if s:
                out[sym] = s
            else:
                out.pop(sym, None)
        return ConstLedger(out)

    def __sub__(self, other: "ConstLedger") -> "ConstLedger":
        return self + (-other)

    def __neg__(self) -> "ConstLedger":
        return ConstLedger({s: -c for s, c in self.coeffs.items()})

    def __mul__(self, scalar) -> "ConstLedger":
        scalar = Fraction(scalar)
        return ConstLedger({s: c * scalar for s, c in self.coeffs.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, ConstLedger):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(frozenset(self.coeffs.items()))

    def __bool__(self):
        return bool(self.coeffs)

    def get(self, sym: Symbol) -> Fraction:
        return self.coeffs.get(sym, Fraction(0))

    def drop(self, *syms: Symbol) -> "ConstLedger":
        return ConstLedger({s: c for s, c in self.coeffs.items() if s not in syms})

    def drop_logp(self, primes) -> "ConstLedger":
        """Delete LOGP(p) entries for p in primes (the R_N quotient)."""
        primes = set(int(p) for p in primes)
        return ConstLedger({s: c for s, c in self.coeffs.items()
                            if not (s[0] == "LOGP" and s[1] in primes)})

    def logp_part(self) -> "ConstLedger":
        return ConstLedger({s: c for s, c in self.coeffs.items() if s[0] == "LOGP"})

    def to_json(self) -> dict:
        return {_name(s): f"{c.numerator}/{c.denominator}"
                for s, c in sorted(self.coeffs.items(), key=lambda t: _name(t[0]))}

    @staticmethod
    def from_json(data: Mapping[str, str]) -> "ConstLedger":
        return ConstLedger({_parse(k): Fraction(v) for k, v in data.items()})

    def __repr__(self):
        if not self.coeffs:
            return "0"
        parts = [f"{c} {_name(s)}" for s, c in sorted(self.coeffs.items(),
                                                      key=lambda t: _name(t[0]))]
        return " + ".join(parts).replace("+ -", "- ")

    # -- numeric shadow -------------------------------------------------------

    def numeric(self, dps: int = 50):
        """mpf value at the given precision; C must not be present."""
        import mpmath as mp

        with mp.workdps(dps + 10):
            total = mp.mpf(0)
            for sym, c in self.coeffs.items():
                total += mp.mpf(c.numerator) / mp.mpf(c.denominator) * _numeric_symbol(sym, mp)
            return +total


def _numeric_symbol(sym: Symbol, mp):
    kind = sym[0]
    if kind == "ONE":
        return mp.mpf(1)
    if kind == "GAMMA":
        return +mp.euler
    if kind == "LOG2":
        return mp.log(2)
    if kind == "LOGPI":
        return mp.log(mp.pi)
    if kind == "LOGP":
        return mp.log(sym[1])
    if kind == "DZETA":
        k = sym[1]
        return mp.zeta(-k, derivative=1) / mp.zeta(-k)
    if kind == "DL":
        d0, k = sym[1], sym[2]
        return _numeric_dirichlet_dlog(d0, -k, mp)
    if kind == "C":
        raise ValueError("the opaque constant C has no numeric value")
    raise ValueError(f"unknown symbol {sym}")


def _numeric_dirichlet_dlog(d0: int, s0: int, mp):
    """L'(chi_d0, s0)/L(chi_d0, s0) via the Hurwitz zeta decomposition."""
    from .lseries import kronecker

    f = abs(d0)
    chi = [kronecker(d0, r) for r in range(f)]

    def big_l(s):
        return mp.power(f, -s) * mp.fsum(
            chi[r] * mp.zeta(s, mp.mpf(r) / f) for r in range(1, f) if chi[r])

    val = big_l(mp.mpf(s0))
    der = mp.diff(big_l, mp.mpf(s0))
    return der / val
