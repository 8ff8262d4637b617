"""p-adic quadratic lattices: diagonal models, Jordan data, cosets.

A lattice is presented either by a diagonal quadratic form

    Q(x) = sum_i unit_i * p^(exp_i) * x_i^2        (DiagLattice)

or by the Gram matrix of the associated bilinear form <v,w> =
Q(v+w)-Q(v)-Q(w) (GramLattice).  For p != 2 every nondegenerate form
diagonalizes over Z_p; the multiset of (square class, exponent) pairs is a
complete isometry invariant.  Lattices over Z_2 can be represented but only
the operations that explicitly support p = 2 accept them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import gmpy2


def is_prime(p: int) -> bool:
    return p >= 2 and gmpy2.is_prime(p)


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for odd p, a coprime to p."""
    if p == 2:
        raise ValueError("Legendre symbol needs an odd prime")
    s = int(gmpy2.legendre(a % p, p))
    if s == 0:
        raise ValueError(f"{a} is divisible by {p}")
    return s


def vp(x, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x, p: int) -> Fraction:
    return Fraction(x) / Fraction(p) ** vp(x, p)


@dataclass(frozen=True)
class DiagLattice:
    """<unit_1 p^exp_1, ..., unit_m p^exp_m> over Z_p, exponents ascending."""

    p: int
    entries: tuple[tuple[int, int], ...]  # (unit, exp), exps sorted ascending

    def __init__(self, p: int, entries):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        norm = []
        for unit, exp in entries:
            unit, exp = int(unit), int(exp)
            if unit % p == 0:
                raise ValueError(f"unit {unit} not coprime to {p}")
            if exp < 0:
                raise ValueError("exponents must be >= 0")
            norm.append((unit, exp))
        norm.sort(key=lambda t: t[1])
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "entries", tuple(norm))

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def units(self) -> tuple[int, ...]:
        return tuple(u for u, _ in self.entries)

    @property
    def exps(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.entries)

    def disc_valuation(self) -> int:
        return sum(self.exps)

    def unit_product(self) -> int:
        out = 1
        for u in self.units:
            out *= u
        return out

    def disc(self) -> int:
        """d(L) = det of the bilinear Gram matrix = 2^m * prod(unit_i p^exp_i)."""
        out = 2 ** self.dim
        for u, e in self.entries:
            out *= u * self.p ** e
        return out

    def scaled_by_unit(self, u: int) -> "DiagLattice":
        return DiagLattice(self.p, [(unit * u, e) for unit, e in self.entries])

    def require_odd_p(self, what: str = "this operation"):
        if self.p == 2:
            raise ValueError(f"{what} supports p != 2 only; "
                             "p=2 is covered just by the stated closed-form families")

    def __repr__(self):
        body = ", ".join(f"{u}" if e == 0 else f"{u}*{self.p}^{e}"
                         for u, e in self.entries)
        return f"<{body}>_p={self.p}"


@dataclass(frozen=True)
class GramLattice:
    """Lattice given by the (symmetric, nondegenerate) bilinear Gram matrix."""

    p: int
    gram: tuple[tuple[Fraction, ...], ...]

    def __init__(self, p: int, gram):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        g = tuple(tuple(Fraction(x) for x in row) for row in gram)
        m = len(g)
        if any(len(row) != m for row in g):
            raise ValueError("gram matrix must be square")
        for i in range(m):
            for j in range(m):
                if g[i][j] != g[j][i]:
                    raise ValueError("gram matrix must be symmetric")
        if _det(g) == 0:
            raise ValueError("singular form")
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "gram", g)

    @property
    def dim(self) -> int:
        return len(self.gram)

    def disc(self) -> Fraction:
        return _det(self.gram)

    def quad(self, v) -> Fraction:
        """Q(v) = <v,v>/2."""
        return self.pair(v, v) / 2

    def pair(self, v, w) -> Fraction:
        g = self.gram
        return sum(Fraction(v[i]) * g[i][j] * Fraction(w[j])
                   for i in range(self.dim) for j in range(self.dim))

    @staticmethod
    def hyperbolic(p: int, copies: int = 1) -> "GramLattice":
        m = 2 * copies
        g = [[Fraction(0)] * m for _ in range(m)]
        for k in range(copies):
            g[2 * k][2 * k + 1] = g[2 * k + 1][2 * k] = Fraction(1)
        return GramLattice(p, g)

    @staticmethod
    def from_diag(lat: DiagLattice) -> "GramLattice":
        m = lat.dim
        g = [[Fraction(0)] * m for _ in range(m)]
        for i, (u, e) in enumerate(lat.entries):
            g[i][i] = Fraction(2 * u * lat.p ** e)
        return GramLattice(lat.p, g)


def _det(g) -> Fraction:
    m = len(g)
    a = [list(row) for row in g]
    det = Fraction(1)
    for col in range(m):
        piv = next((r for r in range(col, m) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        det *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, m):
            f = a[r][col] * inv
            if f:
                for c in range(col, m):
                    a[r][c] -= f * a[col][c]
    return det


def diagonalize(g: GramLattice) -> DiagLattice:
    """Diagonal model isometric to g over Z_p (p != 2).

    Gram entries may be rational with denominators prime to p.  The returned
    units are integers in the correct square classes; exponents and the
    discriminant valuation are preserved exactly.
    """
    if g.p == 2:
        raise ValueError("p=2 Jordan splitting (even/odd types) is out of scope; "
                         "only the stated p=2 closed-form families are supported")
    p = g.p
    a = [list(row) for row in g.gram]
    m = len(a)
    diag: list[Fraction] = []
    idx = list(range(m))
    while idx:
        # entry of minimal valuation; prefer a diagonal position
        best, best_v, on_diag = None, None, False
        for i in idx:
            for j in idx:
                if a[i][j] == 0:
                    continue
                v = vp(a[i][j], p)
                if best_v is None or v < best_v or (v == best_v and i == j and not on_diag):
                    best, best_v, on_diag = (i, j), v, i == j
        i, j = best
        if i != j:
            # e_i += e_j makes the diagonal entry attain the minimal valuation
            for k in idx:
                a[i][k] = a[i][k] + a[j][k]
            for k in idx:
                a[k][i] = a[k][i] + a[k][j]
        piv = a[i][i]
        for r in idx:
            if r == i:
                continue
            f = a[r][i] / piv
            if f:
                for c in idx:
                    a[r][c] -= f * a[i][c]
                for c in idx:
                    a[c][r] = a[r][c]
        diag.append(piv)
        idx.remove(i)
    entries = []
    for d in diag:
        q = d / 2
        e = vp(q, p)
        if e < 0:
            raise ValueError("form is not integral as a quadratic form over Z_p")
        u = unit_part(q, p)
        entries.append((int(u.numerator * u.denominator), e))
    return DiagLattice(p, entries)


def add_hyperbolic(lat: DiagLattice, s: int) -> DiagLattice:
    """L -> L perp H^s with H re-diagonalized to <1,-1> (valid for p != 2)."""
    if s < 0:
        raise ValueError("s must be >= 0")
    if s == 0:
        return lat
    lat.require_odd_p("add_hyperbolic")
    return DiagLattice(lat.p, list(lat.entries) + [(1, 0), (-1, 0)] * s)


def hyperbolic_rank(lat: DiagLattice) -> int:
    """Maximal r with L = H^r perp L0, L0 splitting no hyperbolic plane.

    Only the exponent-0 Jordan block can contribute; odd-dimensional
    unimodular blocks always leave a 1-dimensional anisotropic kernel, and
    the even case is decided by the Legendre symbol of (-1)^(k/2) times the
    unit product.
    """
    lat.require_odd_p("hyperbolic_rank")
    units = [u for u, e in lat.entries if e == 0]
    k = len(units)
    if k == 0:
        return 0
    if k % 2 == 1:
        return (k - 1) // 2
    prod = 1
    for u in units:
        prod *= u
    return k // 2 if legendre((-1) ** (k // 2) * prod, lat.p) == 1 else k // 2 - 1


def smallest_nonresidue(p: int) -> int:
    for r in range(2, p):
        if legendre(r, p) == -1:
            return r
    raise AssertionError(f"no nonresidue below {p}")


def canonical_units(lat: DiagLattice) -> DiagLattice:
    """Isometric model with units in {1, smallest nonresidue} (p != 2)."""
    lat.require_odd_p("canonical_units")
    nr = smallest_nonresidue(lat.p)
    return DiagLattice(lat.p, [(1 if legendre(u, lat.p) == 1 else nr, e)
                               for u, e in lat.entries])


def invariants(lat: DiagLattice) -> dict:
    """Jordan-type invariants of a diagonal lattice."""
    out = {
        "disc_valuation": lat.disc_valuation(),
        "is_unimodular": all(e == 0 for e in lat.exps),
        "disc_group": [lat.p ** e for e in lat.exps if e > 0],
    }
    if lat.p != 2:
        out["disc_unit_class"] = legendre(lat.unit_product(), lat.p)
        out["hyperbolic_rank"] = hyperbolic_rank(lat)
    return out


@dataclass(frozen=True)
class Coset:
    """An element kappa of L*/L, stored as residues c_i mod p^exp_i.

    Coordinate i represents kappa_i = c_i / p^exp_i.  The trivial coset is
    all zeros.  ``order`` is the order of kappa in the discriminant group.
    """

    lattice: DiagLattice
    components: tuple[int, ...]

    def __init__(self, lattice: DiagLattice, components):
        comps = []
        for (u, e), c in zip(lattice.entries, components):
            comps.append(int(c) % lattice.p ** e)
        if len(comps) != lattice.dim:
            raise ValueError("component count must match the dimension")
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "components", tuple(comps))

    @staticmethod
    def trivial(lattice: DiagLattice) -> "Coset":
        return Coset(lattice, [0] * lattice.dim)

    @property
    def is_trivial(self) -> bool:
        return all(c == 0 for c in self.components)

    def order(self) -> int:
        p = self.lattice.p
        out = 1
        for (u, e), c in zip(self.lattice.entries, self.components):
            q = p ** e
            out = max(out, q // gcd(c, q))
        return out

    def fractions(self) -> tuple[Fraction, ...]:
        p = self.lattice.p
        return tuple(Fraction(c, p ** e)
                     for (u, e), c in zip(self.lattice.entries, self.components))

    def denominator_exp(self) -> int:
        """nu with p^nu = order of kappa: the scale needed to clear denominators."""
        return vp(self.order(), self.lattice.p)

    def __repr__(self):
        return "kappa(" + ",".join(str(f) for f in self.fractions()) + ")"


# -- file format --------------------------------------------------------------


def lattice_to_json(lat: DiagLattice) -> dict:
    return {"p": lat.p, "diag": [{"unit": u, "exp": e} for u, e in lat.entries]}


def lattice_from_json(data) -> DiagLattice:
    """Accepts {"p":.., "diag":[{"unit":..,"exp":..},..]} or {"p":.., "gram":[[..]]}."""
    if isinstance(data, str):
        data = json.loads(data)
    p = data["p"]
    if "diag" in data:
        return DiagLattice(p, [(d["unit"], d["exp"]) for d in data["diag"]])
    if "gram" in data:
        return diagonalize(GramLattice(p, data["gram"]))
    raise ValueError("lattice spec needs a 'diag' or 'gram' field")


def coset_from_json(lat: DiagLattice, data) -> Coset:
    """Coset from a list of residues or a comma-separated string of fractions.

    String components are read as fractions c/p^e in lowest terms, e.g.
    "0,1/3" for the coset (0, 1/3) of <1, 3>.
    """
    if isinstance(data, str):
        parts = [s.strip() for s in data.split(",")]
        comps = []
        for (u, e), s in zip(lat.entries, parts):
            x = Fraction(s) * lat.p ** e
            if x.denominator != 1:
                raise ValueError(f"component {s} is not in (1/p^{e}) Z")
            comps.append(int(x))
        return Coset(lat, comps)
    return Coset(lat, list(data))
