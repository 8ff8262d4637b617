"""Quadratic characters and exact special values of their L-functions.

chi_D0 is the Kronecker symbol of a fundamental discriminant D0; its
L-values at nonpositive integers are exact rationals through generalized
Bernoulli numbers:

    L(chi, 1-k) = -B_{k,chi}/k,
    B_{k,chi}   = f^(k-1) sum_{a=1}^{f} chi(a) B_k(a/f),

with f = |D0| the conductor and B_k(x) the Bernoulli polynomials.  The
trivial character gives the Riemann zeta values zeta(1-k) = -B_k/k.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
import sympy


def kronecker(a: int, n: int) -> int:
    return int(gmpy2.kronecker(a, n))


def squarefree_kernel(x: Fraction) -> int:
    """The squarefree integer in the square class of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no square class")
    n = x.numerator * x.denominator
    sign = -1 if n < 0 else 1
    n = abs(n)
    out = 1
    for p, e in sympy.factorint(n).items():
        if e % 2:
            out *= p
    return sign * out


def fundamental_discriminant(x) -> int:
    """Fundamental discriminant of Q(sqrt(x)); 1 for square classes of 1."""
    d = squarefree_kernel(Fraction(x))
    return d if d % 4 == 1 else 4 * d


def chi_quadratic(d0: int, n: int) -> int:
    """chi_{d0}(n) for a fundamental discriminant d0 (Kronecker symbol)."""
    return kronecker(d0, n)


def character_parity(d0: int) -> int:
    """0 for even characters (d0 > 0), 1 for odd (d0 < 0)."""
    return 0 if d0 > 0 else 1


def bernoulli_number(k: int) -> Fraction:
    b = sympy.bernoulli(k)
    return Fraction(int(b.p), int(b.q))


def bernoulli_poly_at(k: int, x: Fraction) -> Fraction:
    v = sympy.bernoulli(k, sympy.Rational(x.numerator, x.denominator))
    v = sympy.nsimplify(v, rational=True)
    return Fraction(int(v.p), int(v.q))


def generalized_bernoulli(k: int, d0: int) -> Fraction:
    """B_{k,chi} for chi = chi_{d0}."""
    f = abs(d0)
    if f == 1:
        # trivial character: B_{k,1} = B_k except B_{1,1} = +1/2
        b = bernoulli_number(k)
        return -b if k == 1 else b
    total = Fraction(0)
    for a in range(1, f + 1):
        c = chi_quadratic(d0, a)
        if c:
            total += c * bernoulli_poly_at(k, Fraction(a, f))
    return Fraction(f) ** (k - 1) * total


def l_chi_special(d0: int, n: int) -> Fraction:
    """L(chi_{d0}, -n) for n >= 0, exact; d0 = 1 gives zeta(-n)."""
    if n < 0:
        raise ValueError("special values at nonpositive integers only")
    k = n + 1
    if abs(d0) == 1:
        if n == 0:
            return Fraction(-1, 2)  # zeta(0)
        return -bernoulli_number(k) / k
    return -generalized_bernoulli(k, d0) / k


def zeta_special(n: int) -> Fraction:
    """zeta(-n) for n >= 0, exact."""
    return l_chi_special(1, n)
