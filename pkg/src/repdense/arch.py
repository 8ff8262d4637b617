"""Archimedean gamma-factor volumes, exact in Q * pi^(half-integer).

    Gamma_{n,m}(s) = prod_{k=m-n+1}^{m} 2 pi^((s+k)/2) / Gamma((s+k)/2)

evaluated at integers s, where Gamma at positive integers and half-integers
is exact: Gamma(j) = (j-1)!, Gamma(j+1/2) = (2j)!/(4^j j!) sqrt(pi).  The
logarithmic derivative expands over {1, gamma, log2, logpi} through

    psi(j)       = -gamma + H_{j-1}
    psi(j + 1/2) = -gamma - 2 log 2 + 2 sum_{i<=j} 1/(2i-1)

and is returned as a ConstLedger.  The archimedean volume factors are
lambda_inf(L; s) = Gamma_{m-1,m}(s) and mu_inf(L, M; s) = Gamma_{n,m}(s);
their orbit equation Gamma_{n,m}/Gamma_{m-1,m} = 1/Gamma_{m-n-1,m-n} is an
index-set cancellation and is verified exactly in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial

from .ledger import GAMMA, LOG2, LOGPI, ONE, ConstLedger


@dataclass(frozen=True)
class PiPower:
    """coeff * pi^(half/2) with exact rational coeff."""

    coeff: Fraction
    half: int  # doubled exponent of pi

    def __mul__(self, other):
        if isinstance(other, PiPower):
            return PiPower(self.coeff * other.coeff, self.half + other.half)
        return PiPower(self.coeff * Fraction(other), self.half)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PiPower):
            return PiPower(self.coeff / other.coeff, self.half - other.half)
        return PiPower(self.coeff / Fraction(other), self.half)

    def __rtruediv__(self, other):
        return PiPower(Fraction(other) / self.coeff, -self.half)

    def inverse(self):
        return PiPower(1 / self.coeff, -self.half)

    def __eq__(self, other):
        if isinstance(other, PiPower):
            return self.coeff == other.coeff and (self.half == other.half or not self.coeff)
        return self.half == 0 and self.coeff == Fraction(other)

    def __hash__(self):
        return hash((self.coeff, self.half))

    def as_fraction(self) -> Fraction:
        if self.half != 0 and self.coeff:
            raise ValueError(f"{self} is not rational")
        return self.coeff

    def numeric(self, dps: int = 50):
        import mpmath as mp

        with mp.workdps(dps + 10):
            return (mp.mpf(self.coeff.numerator) / self.coeff.denominator
                    * mp.power(mp.pi, mp.mpf(self.half) / 2))

    def __repr__(self):
        if self.half == 0:
            return str(self.coeff)
        e = Fraction(self.half, 2)
        return f"{self.coeff}*pi^{e}" if self.coeff != 1 else f"pi^{e}"


def gamma_exact(two_x: int) -> PiPower:
    """Gamma(two_x/2) for positive two_x: exact rational or rational*sqrt(pi)."""
    if two_x <= 0:
        raise ValueError("Gamma pole or nonpositive argument")
    if two_x % 2 == 0:
        return PiPower(Fraction(factorial(two_x // 2 - 1)), 0)
    j = (two_x - 1) // 2  # Gamma(j + 1/2)
    return PiPower(Fraction(factorial(2 * j), 4**j * factorial(j)), 1)


def psi_ledger(two_x: int) -> ConstLedger:
    """psi(two_x/2) over {ONE, GAMMA, LOG2} for positive arguments."""
    if two_x <= 0:
        raise ValueError("psi pole or nonpositive argument")
    if two_x % 2 == 0:
        n = two_x // 2
        h = sum(Fraction(1, i) for i in range(1, n))
        return ConstLedger({GAMMA: Fraction(-1), ONE: h})
    j = (two_x - 1) // 2
    odd = 2 * sum(Fraction(1, 2 * i - 1) for i in range(1, j + 1))
    return ConstLedger({GAMMA: Fraction(-1), LOG2: Fraction(-2), ONE: odd})


def psi_any_half_integer(two_x: int) -> ConstLedger:
    """psi at any half-integer that is not a pole, via psi(x+1) = psi(x) + 1/x.

    Negative half-integers (two_x odd, two_x < 0) reduce to psi(1/2) with
    rational corrections; negative integers are poles.
    """
    if two_x % 2 == 0 and two_x <= 0:
        raise ValueError("psi pole at a nonpositive integer")
    extra = Fraction(0)
    while two_x <= 0:
        extra -= Fraction(2, two_x)  # psi(x+1) = psi(x) + 1/x
        two_x += 2
    return psi_ledger(two_x) + ConstLedger({ONE: extra})


@dataclass(frozen=True)
class GammaFactor:
    """Gamma_{n,m} at an integer s: exact value and d/ds log ledger."""

    n: int
    m: int
    s: int
    value: PiPower
    dlog: ConstLedger


def gamma_nm(n: int, m: int, s: int) -> GammaFactor:
    """Gamma_{n,m}(s) with exact value and logarithmic derivative at s."""
    if not 0 <= n <= m:
        raise ValueError("need 0 <= n <= m")
    value = PiPower(Fraction(1), 0)
    dlog = ConstLedger()
    for k in range(m - n + 1, m + 1):
        two_arg = s + k  # doubled argument of Gamma((s+k)/2)
        value = value * PiPower(Fraction(2), s + k) / gamma_exact(two_arg)
        dlog = dlog + ConstLedger({LOGPI: Fraction(1, 2)}) - Fraction(1, 2) * psi_ledger(two_arg)
    return GammaFactor(n, m, s, value, dlog)


def arch_factors(m: int, n: int, s: int) -> dict:
    """lambda_inf = Gamma_{m-1,m}(s) and mu_inf = Gamma_{n,m}(s)."""
    return {"lambda_inf": gamma_nm(m - 1, m, s), "mu_inf": gamma_nm(n, m, s)}


def arch_orbit_equation_holds(n: int, m: int, s: int = 0) -> bool:
    """Gamma_{n,m}(s)/Gamma_{m-1,m}(s) = 1/Gamma_{m-n-1,m-n}(s), 1 <= n <= m-2."""
    lhs = gamma_nm(n, m, s)
    big = gamma_nm(m - 1, m, s)
    perp = gamma_nm(m - n - 1, m - n, s)
    value_ok = lhs.value / big.value == perp.value.inverse()
    dlog_ok = lhs.dlog - big.dlog == ConstLedger() - perp.dlog
    return value_ok and dlog_ok
