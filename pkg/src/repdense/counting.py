"""Counting oracle: solution counts mod p^j and classical densities.

Everything here is brute force on purpose: these counts are the independent
ground truth against which every closed form in the package is tested.

The central quantity is

    Omega_{kappa,q}(j) = #{ v in (Z/p^j)^m : Q(v + kappa) = q  in p^(-nu)Z/p^j Z }

computed by convolving the per-coordinate value distributions of the diagonal
form.  All arithmetic is kept integral by scaling with p^nu, where p^nu is
the order of the coset.  Convolutions are exact: distributions are packed
into fixed-width slots of one big integer and multiplied with gmpy2, which
makes desk-scale moduli (p^j up to ~10^6) fast.

From the Omega table one obtains the n=1 representation density

    beta(s) = Omega(w) p^(w(1-m-s)) + (1 - p^(-s)) sum_{j<w} Omega(j) p^(j(1-m-s)),

a polynomial in X = p^(-s) that is independent of w once
w >= 1 + 2 nu_p(2 q ord(kappa)).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np

from .exact import QS, LaurentRat
from .lattice import Coset, DiagLattice, GramLattice, vp

SIZE_GUARD_DEFAULT = 10**7


def size_guard() -> int:
    return int(os.environ.get("REPDENSE_SIZE_GUARD", SIZE_GUARD_DEFAULT))


class SizeGuardError(RuntimeError):
    """Raised when an enumeration would exceed the residue-operation budget."""


# ---------------------------------------------------------------------------
# packed exact convolution
# ---------------------------------------------------------------------------


class _PackedDist:
    """Distribution on Z/P as one big integer with fixed-width slots."""

    __slots__ = ("packed", "period", "slot_bytes")

    def __init__(self, packed: gmpy2.mpz, period: int, slot_bytes: int):
        self.packed = packed
        self.period = period
        self.slot_bytes = slot_bytes

    @staticmethod
    def from_counts(counts, period: int, slot_bytes: int) -> "_PackedDist":
        buf = bytearray(period * slot_bytes)
        for i, c in enumerate(counts):
            if c:
                buf[i * slot_bytes:i * slot_bytes + (c.bit_length() + 7) // 8] = \
                    int(c).to_bytes((c.bit_length() + 7) // 8, "little")
        return _PackedDist(gmpy2.mpz(int.from_bytes(bytes(buf), "little")),
                           period, slot_bytes)

    def convolve(self, other: "_PackedDist") -> "_PackedDist":
        assert self.period == other.period and self.slot_bytes == other.slot_bytes
        prod = self.packed * other.packed
        shift = 8 * self.slot_bytes * self.period
        mask = (gmpy2.mpz(1) << shift) - 1
        out = gmpy2.mpz(0)
        while prod:
            out += prod & mask
            prod >>= shift
        return _PackedDist(out, self.period, self.slot_bytes)

    def slot(self, index: int) -> int:
        index %= self.period
        return int((self.packed >> (8 * self.slot_bytes * index))
                   & ((gmpy2.mpz(1) << (8 * self.slot_bytes)) - 1))


# ---------------------------------------------------------------------------
# per-coordinate value distributions
# ---------------------------------------------------------------------------


def _coord_counts(p: int, j: int, nu: int, unit: int, exp: int, c: int) -> list[int]:
    """Counts of p^nu * unit * p^exp * (v + c/p^exp)^2 mod p^(j+nu), v mod p^j.

    Integral because p^nu clears the coset denominators.  Exactness over an
    intermediate modulus P*p^max(exp-nu,0) makes the division by p^exp exact.
    """
    P = p ** (j + nu)
    extra = max(exp - nu, 0)
    M = P * p**extra
    pe, pn = p**exp, p**nu
    counts = [0] * P
    um = unit % M
    for v in range(p**j):
        t = (v * pe + c) % M
        t = (t * t) % M
        t = (t * um) % M
        t *= pn
        if t % pe:
            raise ValueError("coset scale p^nu does not clear the denominators")
        counts[(t // pe) % P] += 1
    return counts


def _xy_plane_counts(p: int, j: int, nu: int) -> list[int]:
    """Value distribution of Q(x,y) = x*y on (Z/p^j)^2, scaled by p^nu."""
    P = p ** (j + nu)
    n = p**j
    if n * n > size_guard():
        raise SizeGuardError("xy-plane distribution too large")
    counts = [0] * P
    pn = p**nu
    for x in range(n):
        base = (x * pn) % P
        for y in range(n):
            counts[(base * y) % P] += 1
    return counts


_DIST_CACHE: dict = {}
_DIST_BYTES = [0]
_DIST_LIMIT = 256 * 10**6


def _cache_put(key, value: _PackedDist):
    size = value.period * value.slot_bytes
    while _DIST_CACHE and _DIST_BYTES[0] + size > _DIST_LIMIT:
        k = next(iter(_DIST_CACHE))
        _DIST_BYTES[0] -= _DIST_CACHE[k].period * _DIST_CACHE[k].slot_bytes
        del _DIST_CACHE[k]
    _DIST_CACHE[key] = value
    _DIST_BYTES[0] += size


def _omega_dist(lat: DiagLattice, coset: Coset, j: int, nu: int,
                xy_planes: int) -> _PackedDist:
    p = lat.p
    P = p ** (j + nu)
    m = lat.dim + 2 * xy_planes
    if P > size_guard():
        raise SizeGuardError(f"modulus p^{j + nu} exceeds the size guard")
    mass_bits = max(m, 1) * (j * p.bit_length() + 1) + nu * p.bit_length() + 8
    slot_bytes = max(2, mass_bits // 8 + 2)

    key = (p, j, nu, lat.entries, coset.components, xy_planes)
    hit = _DIST_CACHE.get(key)
    if hit is not None and hit.slot_bytes >= slot_bytes:
        return hit

    multiplicity: dict[tuple, int] = {}
    for (unit, exp), c in zip(lat.entries, coset.components):
        k = ("d", unit % P, exp, c)
        multiplicity[k] = multiplicity.get(k, 0) + 1
    if xy_planes:
        multiplicity[("xy",)] = xy_planes

    def base(k) -> _PackedDist:
        if k[0] == "d":
            counts = _coord_counts(p, j, nu, k[1], k[2], k[3])
        else:
            counts = _xy_plane_counts(p, j, nu)
        return _PackedDist.from_counts(counts, P, slot_bytes)

    total: _PackedDist | None = None
    for k, mult in sorted(multiplicity.items()):
        d = base(k)
        acc = None
        while mult:
            if mult & 1:
                acc = d if acc is None else acc.convolve(d)
            mult >>= 1
            if mult:
                d = d.convolve(d)
        total = acc if total is None else total.convolve(acc)
    if total is None:
        total = _PackedDist.from_counts([1], P, slot_bytes) if P == 1 else \
            _PackedDist.from_counts([1] + [0] * (P - 1), P, slot_bytes)
    _cache_put(key, total)
    return total


# ---------------------------------------------------------------------------
# Omega and beta (n = 1)
# ---------------------------------------------------------------------------


def count_omega(lat: DiagLattice, coset: Coset | None, q, j: int, *,
                xy_planes: int = 0) -> int:
    """#{v in (Z/p^j)^m : Q(v+kappa) = q in p^(-nu) Z / p^j Z}.

    q may be rational with denominator dividing p^nu, nu the order exponent
    of kappa.  xy_planes appends hyperbolic planes in the x*y model (needed
    at p = 2, where <1,-1> is not a hyperbolic plane).
    """
    if coset is None:
        coset = Coset.trivial(lat)
    p = lat.p
    nu = coset.denominator_exp()
    scaled_q = Fraction(q) * p**nu
    if scaled_q.denominator != 1:
        raise ValueError(f"target {q} has denominator beyond the coset scale p^{nu}")
    dist = _omega_dist(lat, coset, j, nu, xy_planes)
    return dist.slot(int(scaled_q) % (p ** (j + nu)))


@dataclass
class OmegaTable:
    """Counts Omega(j) for j = 0..w, plus the data that produced them."""

    lattice: DiagLattice
    coset: Coset
    q: Fraction
    w: int
    counts: list[int]
    xy_planes: int = 0
    truncated: bool = False       # q = 0 with caller-supplied w: the series is cut
    w_below_bound: bool = False   # caller forced w below the proven bound

    def omega(self, j: int) -> int:
        return self.counts[j]

    @property
    def dim(self) -> int:
        return self.lattice.dim + 2 * self.xy_planes


def default_w(lat: DiagLattice, coset: Coset | None, q) -> int:
    """The proven sufficient truncation w = 1 + 2 nu_p(2 q ord(kappa))."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("q = 0 has no finite truncation bound; pass w explicitly")
    order = coset.order() if coset is not None else 1
    return 1 + 2 * vp(2 * q * order, lat.p)


def omega_table(lat: DiagLattice, coset: Coset | None, q, w: int | None = None,
                *, xy_planes: int = 0) -> OmegaTable:
    if coset is None:
        coset = Coset.trivial(lat)
    q = Fraction(q)
    below = truncated = False
    if w is None:
        w = default_w(lat, coset, q)
    elif q == 0:
        truncated = True
    else:
        below = w < default_w(lat, coset, q)
    counts = [count_omega(lat, coset, q, j, xy_planes=xy_planes)
              for j in range(w + 1)]
    return OmegaTable(lat, coset, q, w, counts, xy_planes, truncated, below)


def beta_from_table(tab: OmegaTable, s: int) -> Fraction:
    """Representation density at integer s >= 0 from an Omega table."""
    p, m, w = tab.lattice.p, tab.dim, tab.w
    x = Fraction(1, p) ** s
    total = Fraction(tab.counts[w]) * Fraction(1, p) ** (w * (m - 1)) * x**w
    total += (1 - x) * sum(
        Fraction(tab.counts[j]) * Fraction(1, p) ** (j * (m - 1)) * x**j
        for j in range(w))
    return total


def beta_poly_from_table(tab: OmegaTable) -> LaurentRat:
    """The same density as an exact polynomial in X = p^(-s)."""
    p, m, w = tab.lattice.p, tab.dim, tab.w
    terms: dict[int, Fraction] = {w: Fraction(tab.counts[w], p ** (w * (m - 1)))}
    for j in range(w):
        c = Fraction(tab.counts[j], p ** (j * (m - 1)))
        terms[j] = terms.get(j, Fraction(0)) + c
        terms[j + 1] = terms.get(j + 1, Fraction(0)) - c
    return LaurentRat(terms, prime_hint=p)


def beta_n1(lat: DiagLattice, coset: Coset | None, q, s: int,
            w: int | None = None, *, xy_planes: int = 0) -> Fraction:
    """beta_p(L, <q>, kappa; s) by pure counting."""
    return beta_from_table(omega_table(lat, coset, q, w, xy_planes=xy_planes), s)


def beta_n1_poly(lat: DiagLattice, coset: Coset | None, q,
                 w: int | None = None, *, xy_planes: int = 0) -> LaurentRat:
    """beta_p(L, <q>, kappa; s) as an exact polynomial in X = p^(-s)."""
    return beta_poly_from_table(omega_table(lat, coset, q, w, xy_planes=xy_planes))


def omega_geometric_from(tab: OmegaTable) -> bool:
    """Whether the last step already grows geometrically by p^(m-1)."""
    p, m = tab.lattice.p, tab.dim
    return tab.w > 0 and tab.counts[tab.w] == p ** (m - 1) * tab.counts[tab.w - 1]


# ---------------------------------------------------------------------------
# Gram-congruence counting (general n)
# ---------------------------------------------------------------------------


def _as_gram(lat) -> GramLattice:
    return lat if isinstance(lat, GramLattice) else GramLattice.from_diag(lat)


def _int_gram(G: GramLattice) -> np.ndarray:
    for row in G.gram:
        for x in row:
            if x.denominator != 1:
                raise ValueError("gram entries must be integers")
    return np.array([[int(x) for x in row] for row in G.gram], dtype=np.int64)


def beta_gram_count(lat, M, l: int, coset: Coset | None = None) -> int:
    """#{(delta_1..delta_n) mod p^l with the Gram congruences mod p^l}.

    delta_i runs over kappa_i + L (scaled integrally by p^nu); the conditions
    are Q(delta_i) = Q_M(f_i) and <delta_i, delta_j> = <f_i, f_j> mod p^l.
    """
    G, GM = _as_gram(lat), _as_gram(M)
    p, m, n = G.p, G.dim, GM.dim
    nu = coset.denominator_exp() if coset is not None else 0
    if nu and not isinstance(lat, DiagLattice):
        raise ValueError("cosets require a diagonal target lattice")
    mod = p ** (l + 2 * nu)
    if p**l > 46341 or p ** (l * m) > size_guard():
        raise SizeGuardError(f"beta_gram enumeration p^{l * m} exceeds the size guard")

    gram = _int_gram(G)
    grids = np.meshgrid(*([np.arange(p**l, dtype=np.int64)] * m), indexing="ij")
    vecs = np.stack([g.ravel() for g in grids], axis=1)
    if nu:
        shift = np.array([c * p ** (nu - e) for (u, e), c in
                          zip(lat.entries, coset.components)], dtype=np.int64)
        vecs = vecs * p**nu + shift

    def quad_all(u: np.ndarray) -> np.ndarray:
        mod2 = 2 * mod
        acc = np.zeros(len(u), dtype=np.int64)
        for i in range(m):
            for k in range(m):
                if gram[i, k]:
                    acc = (acc + (u[:, i] * u[:, k] % mod2) * (gram[i, k] % mod2)) % mod2
        return (acc >> 1) % mod

    def pair_with(u: np.ndarray, w: np.ndarray) -> np.ndarray:
        acc = np.zeros(len(u), dtype=np.int64)
        gw = (gram @ (w % mod)) % mod
        for i in range(m):
            if np.any(gw[i]):
                acc = (acc + u[:, i] * gw[i]) % mod
        return acc

    qvals = quad_all(vecs)
    scale = p ** (2 * nu)
    e_vec = lambda i: [1 if k == i else 0 for k in range(n)]
    targets_q = []
    for i in range(n):
        t = GM.quad(e_vec(i)) * scale
        if t.denominator != 1:
            raise ValueError("represented form fractional beyond the coset scale")
        targets_q.append(int(t) % mod)
    targets_pair = {(jx, i): int(GM.pair(e_vec(i), e_vec(jx)) * scale) % mod
                    for i in range(n) for jx in range(i)}

    tuples = np.empty((1, 0), dtype=np.int64)
    idx_all = np.arange(len(vecs))
    for i in range(n):
        cand = idx_all[qvals == targets_q[i]]
        if i == 0:
            tuples = cand.reshape(-1, 1)
            continue
        if tuples.shape[0] * len(cand) > size_guard():
            raise SizeGuardError("beta_gram tuple growth exceeds the size guard")
        rows = []
        vc = vecs[cand]
        for row in tuples:
            ok = np.ones(len(cand), dtype=bool)
            for jx in range(i):
                ok &= pair_with(vc, vecs[row[jx]]) == targets_pair[(jx, i)]
            sel = cand[ok]
            if len(sel):
                rows.append(np.column_stack(
                    [np.broadcast_to(row, (len(sel), i)), sel]))
        tuples = np.concatenate(rows) if rows else np.empty((0, i + 1), dtype=np.int64)
    return int(tuples.shape[0])


def beta_gram(lat, M, coset: Coset | None = None, l: int | None = None) -> Fraction:
    """Classical density beta(L, M, kappa) = lim p^(l(n(n+1)/2 - mn)) #tuples.

    The limit is certified by comparing l and l+1; disagreement raises, which
    signals that l is too small.
    """
    G, GM = _as_gram(lat), _as_gram(M)
    p, m, n = G.p, G.dim, GM.dim
    if l is None:
        vals = [GM.quad([1 if k == i else 0 for k in range(n)]) for i in range(n)]
        l = 1 + max((vp(v, p) for v in vals if v != 0), default=0)

    def norm(ll, cnt):
        return Fraction(cnt) * Fraction(p) ** (ll * (n * (n + 1) // 2 - m * n))

    v1 = norm(l, beta_gram_count(lat, M, l, coset))
    v2 = norm(l + 1, beta_gram_count(lat, M, l + 1, coset))
    if v1 != v2:
        raise ValueError(f"beta_gram not stabilized at l={l}: {v1} vs {v2}")
    return v1


# ---------------------------------------------------------------------------
# beta -> mu dictionary and the tilde rescalings
# ---------------------------------------------------------------------------


def half_power(p: int, half_exp: int) -> QS:
    """p^(half_exp/2) as an exact QS value."""
    q, r = divmod(half_exp, 2)
    out = QS(Fraction(p) ** q)
    return out * QS.sqrt(p) if r else out


def mu_from_beta(lat: DiagLattice, m_disc, n: int, beta: LaurentRat) -> LaurentRat:
    """mu = |d(L)|^(n/2) |d(M)|^(-s + (1+n-m)/2) beta, exactly.

    |d(M)|^(-s) is the monomial X^v_p(d(M)); the constant half powers of p
    live in Q(sqrt p).
    """
    p, m = lat.p, lat.dim
    v_l = lat.disc_valuation()
    v_m = vp(m_disc, p)
    const = half_power(p, -v_l * n) * half_power(p, -v_m * (1 + n - m))
    return beta.shift(-v_m) * LaurentRat.const(const, p)


def mu_tilde_from_mu(mu: LaurentRat, p: int, m_disc) -> LaurentRat:
    """mu~ = |2 d(M)|_p^(s/2) mu: an X^(v/2) shift."""
    return mu.shift(Fraction(vp(2 * Fraction(m_disc), p), 2))


def lambda_tilde_from_lambda(lam: LaurentRat, p: int, l_disc) -> LaurentRat:
    """lambda~ = |D|_p^(-s/2) lambda: an X^(-v/2) shift."""
    return lam.shift(Fraction(-vp(Fraction(l_disc), p), 2))


# ---------------------------------------------------------------------------
# the |Q - q|^s integral
# ---------------------------------------------------------------------------


def integral_abs(lat: DiagLattice, coset: Coset | None, q, s: int) -> Fraction:
    """int_kappa |Q(v)-q|^s dv = p^s + beta(s+1)(1-p^s)/(1-p^(-s-1)), m >= 2."""
    if lat.dim < 2:
        raise ValueError("the integral formula requires m >= 2")
    if s < 1:
        raise ValueError("s >= 1 required")
    p = lat.p
    b = beta_n1(lat, coset, q, s + 1)
    ps = Fraction(p) ** s
    return ps + b * (1 - ps) / (1 - Fraction(1, p) ** (s + 1))


def integral_abs_series(lat: DiagLattice, coset: Coset | None, q, s: int,
                        w: int | None = None) -> Fraction:
    """The same integral summed directly with the exact geometric tail.

    vol{|Q-q| <= p^-i} = Omega(i) p^(-im), and beyond the stabilization
    bound Omega grows exactly by p^(m-1), so the tail is a geometric series.
    """
    tab = omega_table(lat, coset, q, w)
    p, m, wv = lat.p, tab.dim, tab.w
    if not omega_geometric_from(tab):
        raise ValueError("Omega tail not geometric at w; enlarge w")
    V = [Fraction(tab.counts[i], p ** (i * m)) for i in range(wv + 1)]
    ps = Fraction(p) ** s
    total = 1 + (1 - ps) * sum(V[i] * Fraction(1, p) ** (i * s) for i in range(1, wv))
    tail = V[wv] * Fraction(1, p) ** (wv * s) / (1 - Fraction(1, p) ** (s + 1))
    return total + (1 - ps) * tail


# ---------------------------------------------------------------------------
# group-volume counting (discriminant kernel)
# ---------------------------------------------------------------------------


def so_prime_count(lat, k: int, *, kernel_condition: bool = True,
                   det_one: bool = True) -> int:
    """#{A in M_m(Z/p^k) : A^t G A = G, det A = 1, A trivial on L*/L}.

    Column-by-column enumeration with early filtering.  Feasible for m <= 4
    at desk moduli.  kernel_condition=False counts all of SO; additionally
    det_one=False counts all of O.
    """
    G = _as_gram(lat)
    p, m = G.p, G.dim
    pk = p**k
    if pk > 46341 or pk**m > size_guard():
        raise SizeGuardError(f"group counting p^{k * m} per column exceeds the size guard")
    if p == 2 and det_one and k < 2:
        raise ValueError("det = 1 is not visible mod 2; use k >= 2")

    gram = _int_gram(G)
    grids = np.meshgrid(*([np.arange(pk, dtype=np.int64)] * m), indexing="ij")
    cols = np.stack([g.ravel() for g in grids], axis=1)

    def quad_all(u):
        mod2 = 2 * pk
        acc = np.zeros(len(u), dtype=np.int64)
        for i in range(m):
            for jx in range(m):
                if gram[i, jx]:
                    acc = (acc + (u[:, i] * u[:, jx] % mod2) * (gram[i, jx] % mod2)) % mod2
        return (acc >> 1) % pk

    def pair_with(u, w):
        gw = (gram @ (w % pk)) % pk
        acc = np.zeros(len(u), dtype=np.int64)
        for i in range(m):
            if gw[i]:
                acc = (acc + u[:, i] * gw[i]) % pk
        return acc

    qvals = quad_all(cols)
    basis = np.eye(m, dtype=np.int64)
    targets = quad_all(basis)
    pair_targets = {(i, jx): int(pair_with(basis[i:i + 1], basis[jx])[0])
                    for i in range(m) for jx in range(i)}

    diag_kernel = kernel_condition and isinstance(lat, DiagLattice)
    tuples = np.empty((1, 0), dtype=np.int64)
    idx_all = np.arange(len(cols))
    for i in range(m):
        ok = qvals == targets[i]
        if diag_kernel:
            mod = p ** lat.entries[i][1]
            if mod > 1:
                for r in range(m):
                    ok &= (cols[:, r] - basis[i][r]) % mod == 0
        cand = idx_all[ok]
        if i == 0:
            tuples = cand.reshape(-1, 1)
            continue
        if tuples.shape[0] * len(cand) > size_guard():
            raise SizeGuardError("group counting tuple growth exceeds the size guard")
        rows = []
        vc = cols[cand]
        for row in tuples:
            sel_ok = np.ones(len(cand), dtype=bool)
            for jx in range(i):
                sel_ok &= pair_with(vc, cols[row[jx]]) == pair_targets[(i, jx)]
            sel = cand[sel_ok]
            if len(sel):
                rows.append(np.column_stack(
                    [np.broadcast_to(row, (len(sel), i)), sel]))
        tuples = np.concatenate(rows) if rows else np.empty((0, i + 1), dtype=np.int64)

    if tuples.shape[0] == 0:
        return 0
    mats_cols = cols[tuples]             # [t, i, :] = column i
    keep = np.ones(len(mats_cols), dtype=bool)
    if det_one:
        keep &= _det_mod(mats_cols, pk) == 1 % pk
    if kernel_condition and not isinstance(lat, DiagLattice):
        keep &= _gram_kernel_ok(mats_cols, G, pk)
    return int(keep.sum())


def _det_mod(mats: np.ndarray, mod: int) -> np.ndarray:
    m = mats.shape[1]
    if m == 1:
        return mats[:, 0, 0] % mod
    if m == 2:
        return (mats[:, 0, 0] * mats[:, 1, 1] - mats[:, 0, 1] * mats[:, 1, 0]) % mod
    if m > 4:
        raise ValueError("determinant supported for m <= 4")
    out = np.zeros(len(mats), dtype=np.int64)
    for perm in itertools.permutations(range(m)):
        term = np.ones(len(mats), dtype=np.int64)
        for i, jx in enumerate(perm):
            term = term * mats[:, i, jx] % mod
        out = (out + _perm_sign(perm) * term) % mod
    return out % mod


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        length, jx = 0, i
        while not seen[jx]:
            seen[jx] = True
            jx = perm[jx]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _gram_kernel_ok(mats_cols: np.ndarray, G: GramLattice, pk: int) -> np.ndarray:
    """(A - 1) G^{-1} integral, tested mod p^delta, delta = v_p(det G)."""
    p, m = G.p, G.dim
    delta = vp(G.disc(), p)
    if delta == 0:
        return np.ones(len(mats_cols), dtype=bool)
    pd = p**delta
    ginv = _rational_inverse(G.gram)
    ginv_scaled = np.array([[int(x * pd) for x in row] for row in ginv],
                           dtype=np.int64)
    a = np.transpose(mats_cols, (0, 2, 1))  # proper row-major matrices
    diff = (a - np.eye(m, dtype=np.int64)) % pk
    prod = np.einsum("nij,jk->nik", diff % pd, ginv_scaled % (pd * pd)) % (pd * pd)
    return np.all(prod % pd == 0, axis=(1, 2))


def _rational_inverse(g):
    m = len(g)
    a = [list(row) + [Fraction(int(i == j)) for j in range(m)]
         for i, row in enumerate(g)]
    for col in range(m):
        piv = next(r for r in range(col, m) if a[r][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(m):
            if r != col and a[r][col]:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[m:] for row in a]


def vol_so_prime(lat, k: int, *, check_stable: bool = True) -> QS:
    """vol(SO'(L)) = |d|^((m-1)/2) #SO'(Z/p^k) / p^(k m(m-1)/2), by counting.

    Exact in Q(sqrt p); odd discriminant valuations give sqrt(p) factors.
    Stabilization is certified against k+1 unless disabled.
    """
    G = _as_gram(lat)
    p, m = G.p, G.dim
    dim_so = m * (m - 1) // 2
    v = vp(G.disc(), p)

    def value(kk: int) -> QS:
        cnt = so_prime_count(lat, kk)
        return QS(Fraction(cnt, p ** (kk * dim_so))) * half_power(p, -v * (m - 1))

    v1 = value(k)
    if check_stable:
        v2 = value(k + 1)
        if v1 != v2:
            raise ValueError(f"group volume not stabilized at k={k}: {v1} vs {v2}")
    return v1
