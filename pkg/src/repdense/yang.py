"""Closed-form n=1 representation densities (p != 2, trivial coset).

For L = <eps_1 p^(l_1), ..., eps_m p^(l_m)> with l_1 = 0 the density of
q = alpha p^a is 1 + R(alpha p^a; X) with

    R = (1 - 1/p) sum_{0 < k <= a, l(k,1) even} v(k) p^d(k) X^k
        + v(a+1) p^d(a+1) X^(a+1) * ( -1/p            if l(a+1,1) even,
                                      (alpha/p)/sqrt(p) if l(a+1,1) odd ),

where L(k,1) = {i : l_i - k < 0 odd}, l(k,1) its size,
d(k) = k + (1/2) sum_{l_i < k} (l_i - k), and
v(k) = (-1/p)^floor(l(k,1)/2) prod_{i in L(k,1)} (eps_i/p).

d(k) is a half-integer exactly when l(k,1) is odd, so the two sqrt(p)'s in
the odd branch cancel; the result is asserted to be rational.  For q = 0 the
sum over k is infinite and only a stated truncation is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .counting import half_power
from .exact import QS, LaurentRat
from .lattice import DiagLattice, legendre, vp


@dataclass(frozen=True)
class YangData:
    """The index sets and invariants L(k,1), l(k,1), d(k), v(k) for k = 1..k_max."""

    lattice: DiagLattice
    k_max: int
    index_sets: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...]
    d: tuple[Fraction, ...]        # half-integers
    v: tuple[int, ...]             # signs

    def row(self, k: int) -> dict:
        i = k - 1
        return {"k": k, "L": self.index_sets[i], "l": self.sizes[i],
                "d": self.d[i], "v": self.v[i]}


def _check_normalized(lat: DiagLattice):
    lat.require_odd_p("Yang's formula")
    if lat.dim == 0:
        return
    if lat.exps[0] != 0:
        raise ValueError("minimal exponent must be 0 (p^-1 Q not integral); "
                         "rescale the lattice first")


def yang_invariants(lat: DiagLattice, k_max: int) -> YangData:
    """The tables entering the closed form, for k = 1..k_max."""
    _check_normalized(lat)
    p = lat.p
    idx, sizes, dd, vv = [], [], [], []
    for k in range(1, k_max + 1):
        members = tuple(i for i, (u, e) in enumerate(lat.entries)
                        if e < k and (e - k) % 2 != 0)
        size = len(members)
        d_k = Fraction(k) + Fraction(sum(e - k for u, e in lat.entries if e < k), 2)
        v_k = legendre(-1, p) ** (size // 2)
        for i in members:
            v_k *= legendre(lat.entries[i][0], p)
        idx.append(members)
        sizes.append(size)
        dd.append(d_k)
        vv.append(v_k)
    return YangData(lat, k_max, tuple(idx), tuple(sizes), tuple(dd), tuple(vv))


def yang_beta(lat: DiagLattice, q, k_max: int | None = None) -> LaurentRat:
    """beta_p(L, <q>, L; s) = 1 + R(q; X) as an exact polynomial in X.

    q = alpha p^a (alpha a p-unit) or 0.  For q = 0 the infinite series
    R(0; X) is truncated at k_max (required); use yang_beta_zero_tail for
    the leading exponent of the dropped tail.

    All sqrt(p) contributions cancel by the parity of d(k); the output is
    asserted to have rational coefficients.
    """
    _check_normalized(lat)
    p = lat.p
    q = Fraction(q)
    if q == 0:
        if k_max is None:
            raise ValueError("q = 0 needs an explicit truncation k_max")
        data = yang_invariants(lat, k_max)
        terms: dict[int, Fraction] = {0: Fraction(1)}
        pref = 1 - Fraction(1, p)
        for k in range(1, k_max + 1):
            if data.sizes[k - 1] % 2 == 0:
                c = pref * data.v[k - 1] * Fraction(p) ** int(data.d[k - 1])
                terms[k] = terms.get(k, Fraction(0)) + c
        return LaurentRat(terms, prime_hint=p)

    a = vp(q, p)
    if a < 0:
        raise ValueError("q must be a p-adic integer")
    alpha = q / Fraction(p) ** a
    if alpha.denominator % p == 0 or alpha.numerator % p == 0:
        raise ValueError("unit part of q is not a p-unit")
    alpha_int = alpha.numerator * alpha.denominator

    data = yang_invariants(lat, a + 1)
    coeffs: dict[int, QS] = {0: QS(1)}

    def p_pow(d: Fraction) -> QS:
        return half_power(p, int(2 * d))

    pref = 1 - Fraction(1, p)
    for k in range(1, a + 1):
        if data.sizes[k - 1] % 2 == 0:
            c = QS(pref * data.v[k - 1]) * p_pow(data.d[k - 1])
            coeffs[k] = coeffs.get(k, QS(0)) + c
    boundary = QS(data.v[a]) * p_pow(data.d[a])
    if data.sizes[a] % 2 == 0:
        boundary = boundary * QS(Fraction(-1, p))
    else:
        boundary = boundary * QS(legendre(alpha_int, p)) * half_power(p, -1)
    coeffs[a + 1] = coeffs.get(a + 1, QS(0)) + boundary

    for e, c in coeffs.items():
        if not c.is_rational:
            raise AssertionError(f"irrational residue {c} at X^{e}; "
                                 "the half powers of p failed to cancel")
    return LaurentRat(coeffs, prime_hint=p)


def yang_beta_zero_tail(lat: DiagLattice, k_max: int) -> Fraction | None:
    """Exponent of the first dropped term of R(0; X) beyond k_max, or None.

    The dropped tail of the q = 0 series starts at the smallest k > k_max
    with l(k,1) even; its coefficient has size p^d(k).
    """
    _check_normalized(lat)
    top = max(lat.exps, default=0)
    data = yang_invariants(lat, max(k_max + 2, top + 2) + 2)
    for k in range(k_max + 1, data.k_max + 1):
        if data.sizes[k - 1] % 2 == 0:
            return Fraction(k)
    return None


def yang_mu(lat: DiagLattice, q) -> LaurentRat:
    """mu_p(L, <q>, L; s) from the closed form (see mu_from_beta)."""
    from .counting import mu_from_beta

    return mu_from_beta(lat, 2 * Fraction(q), 1, yang_beta(lat, q))
