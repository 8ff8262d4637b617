"""Exact scalars and rational functions in X = p^(-s).

Two layers:

* ``QS`` -- elements a + b*sqrt(d) of a real quadratic extension of Q
  (d = 0 means plain rationals).  Square roots of a prime p show up in
  intermediate volume formulas whenever a discriminant valuation is odd;
  final answers are asserted rational.

* ``LaurentRat`` -- quotients of Laurent polynomials in X with QS
  coefficients.  Exponents are half-integers internally (stored doubled),
  because factors |disc|^(-s/2) contribute X^(l/2).  Most public values
  have integral exponents and rational coefficients.

Canonical form: numerator and denominator coprime, denominator shifted to
lowest exponent 0 with constant coefficient 1.  Equality of canonical forms
is therefore literal dictionary equality, which is what every identity test
in this package relies on.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

RatLike = Union[int, Fraction, "QS"]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


class QS:
    """a + b*sqrt(d) with a, b rational and d a positive non-square (or 0)."""

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b=0, d=0):
        a = _frac(a)
        b = _frac(b)
        if b == 0:
            d = 0
        elif d <= 1:
            raise ValueError("surd part requires d > 1")
        self.a = a
        self.b = b
        self.d = int(d)

    @staticmethod
    def sqrt(d: int) -> "QS":
        return QS(0, 1, d)

    @staticmethod
    def coerce(x: RatLike) -> "QS":
        if isinstance(x, QS):
            return x
        return QS(_frac(x))

    @staticmethod
    def sqrt_of_fraction(q: Fraction, d: int) -> "QS":
        """Exact square root of q inside Q(sqrt(d)), if it exists.

        Writes q = d^v * u and requires the remaining factor to be a
        rational square.  Raises ValueError otherwise.
        """
        if q == 0:
            return QS(0)
        if q < 0:
            raise ValueError("negative radicand")
        v = 0
        u = q
        if d > 1:
            while u.numerator % d == 0:
                u /= d
                v += 1
            while u.denominator % d == 0:
                u *= d
                v -= 1
        r = _sqrt_fraction(u)
        if r is None:
            raise ValueError(f"{q} has no square root in Q(sqrt({d}))")
        half, odd = divmod(v, 2)
        val = QS(r) * QS(Fraction(d) ** half)
        if odd:
            val = val * QS.sqrt(d)
        return val

    # -- ring structure ----------------------------------------------------

    def _join(self, other: "QS") -> int:
        if self.d and other.d and self.d != other.d:
            raise ValueError(f"incompatible surds sqrt({self.d}), sqrt({other.d})")
        return self.d or other.d

    def __add__(self, other):
        other = QS.coerce(other)
        d = self._join(other)
        return QS(self.a + other.a, self.b + other.b, d if self.b + other.b else 0)

    __radd__ = __add__

    def __neg__(self):
        return QS(-self.a, -self.b, self.d)

    def __sub__(self, other):
        return self + (-QS.coerce(other))

    def __rsub__(self, other):
        return QS.coerce(other) + (-self)

    def __mul__(self, other):
        other = QS.coerce(other)
        d = self._join(other)
        a = self.a * other.a + self.b * other.b * d
        b = self.a * other.b + self.b * other.a
        return QS(a, b, d if b else 0)

    __rmul__ = __mul__

    def inverse(self) -> "QS":
        n = self.a * self.a - self.b * self.b * self.d
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        return QS(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        return self * QS.coerce(other).inverse()

    def __rtruediv__(self, other):
        return QS.coerce(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QS(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        try:
            other = QS.coerce(other)
        except TypeError:
            return NotImplemented
        if self.b == 0 and other.b == 0:
            return self.a == other.a
        return self.a == other.a and self.b == other.b and self.d == other.d

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __bool__(self):
        return self.a != 0 or self.b != 0

    # -- inspection ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if self.b != 0:
            raise ValueError(f"{self} is irrational")
        return self.a

    def __float__(self):
        return float(self.a) + float(self.b) * float(self.d) ** 0.5

    def __repr__(self):
        if self.b == 0:
            return str(self.a)
        surd = f"sqrt({self.d})"
        if self.b != 1:
            surd = f"{self.b}*{surd}"
        if self.a == 0:
            return surd
        sign = "+" if self.b > 0 else "-"
        mag = surd if self.b > 0 else (f"{-self.b}*sqrt({self.d})" if self.b != -1 else f"sqrt({self.d})")
        return f"{self.a} {sign} {mag}"


def _sqrt_fraction(q: Fraction):
    if q < 0:
        return None
    n = _isqrt_exact(q.numerator)
    d = _isqrt_exact(q.denominator)
    if n is None or d is None:
        return None
    return Fraction(n, d)


def _isqrt_exact(n: int):
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


ZERO = QS(0)
ONE = QS(1)


# ---------------------------------------------------------------------------
# Laurent rational functions
# ---------------------------------------------------------------------------


def _coeffs(terms: Mapping[int, RatLike], half: bool) -> dict[int, QS]:
    """Normalize a terms mapping.  Keys are X-exponents; doubled if half=False."""
    out: dict[int, QS] = {}
    for e, c in terms.items():
        c = QS.coerce(c)
        if not c:
            continue
        key = int(e) if half else 2 * int(e)
        out[key] = out.get(key, ZERO) + c
    return {e: c for e, c in out.items() if c}


class LaurentRat:
    """Rational function in X = p^(-s), in canonical reduced form.

    ``num`` and ``den`` map doubled exponents (so key 3 means X^(3/2)) to QS
    coefficients.  ``prime_hint`` documents which prime X refers to; it is
    required for operations that create or evaluate sqrt(p) (half exponents,
    evaluation at odd s, the substitution X -> 1/(pX)).
    """

    __slots__ = ("num", "den", "prime_hint")

    def __init__(self, num: Mapping[int, RatLike], den: Mapping[int, RatLike] = None,
                 prime_hint: int | None = None, *, half_keys: bool = False):
        n = _coeffs(num, half_keys)
        d = _coeffs(den if den is not None else {0: 1}, half_keys)
        if not d:
            raise ZeroDivisionError("zero denominator")
        self.prime_hint = prime_hint
        self.num, self.den = _canonical(n, d)

    # -- constructors --------------------------------------------------------

    @staticmethod
    def const(c: RatLike, prime_hint: int | None = None) -> "LaurentRat":
        return LaurentRat({0: c}, prime_hint=prime_hint)

    @staticmethod
    def x(prime_hint: int | None = None) -> "LaurentRat":
        return LaurentRat({1: 1}, prime_hint=prime_hint)

    @staticmethod
    def monomial(c: RatLike, exp: int, prime_hint: int | None = None) -> "LaurentRat":
        return LaurentRat({exp: c}, prime_hint=prime_hint)

    @staticmethod
    def half_monomial(c: RatLike, e2: int, prime_hint: int | None = None) -> "LaurentRat":
        """c * X^(e2/2)."""
        return LaurentRat({e2: c}, prime_hint=prime_hint, half_keys=True)

    def _hint(self, other: "LaurentRat") -> int | None:
        if self.prime_hint and other.prime_hint and self.prime_hint != other.prime_hint:
            raise ValueError("mixing LaurentRat values for different primes")
        return self.prime_hint or other.prime_hint

    @staticmethod
    def coerce(x, prime_hint=None) -> "LaurentRat":
        if isinstance(x, LaurentRat):
            return x
        return LaurentRat.const(x, prime_hint)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = LaurentRat.coerce(other, self.prime_hint)
        n = _poly_add(_poly_mul(self.num, other.den), _poly_mul(other.num, self.den))
        return LaurentRat._raw(n, _poly_mul(self.den, other.den), self._hint(other))

    __radd__ = __add__

    def __neg__(self):
        return LaurentRat._raw({e: -c for e, c in self.num.items()}, dict(self.den), self.prime_hint)

    def __sub__(self, other):
        return self + (-LaurentRat.coerce(other, self.prime_hint))

    def __rsub__(self, other):
        return LaurentRat.coerce(other, self.prime_hint) + (-self)

    def __mul__(self, other):
        other = LaurentRat.coerce(other, self.prime_hint)
        return LaurentRat._raw(_poly_mul(self.num, other.num),
                               _poly_mul(self.den, other.den), self._hint(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = LaurentRat.coerce(other, self.prime_hint)
        if not other.num:
            raise ZeroDivisionError("division by the zero function")
        return LaurentRat._raw(_poly_mul(self.num, other.den),
                               _poly_mul(self.den, other.num), self._hint(other))

    def __rtruediv__(self, other):
        return LaurentRat.coerce(other, self.prime_hint) / self

    def __pow__(self, k: int):
        if k < 0:
            return (LaurentRat.const(1, self.prime_hint) / self) ** (-k)
        out = LaurentRat.const(1, self.prime_hint)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, LaurentRat):
            try:
                other = LaurentRat.coerce(other, self.prime_hint)
            except TypeError:
                return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((tuple(sorted(self.num.items(), key=lambda t: t[0])),
                     tuple(sorted(self.den.items(), key=lambda t: t[0]))))

    def __bool__(self):
        return bool(self.num)

    @classmethod
    def _raw(cls, num: dict[int, QS], den: dict[int, QS], hint) -> "LaurentRat":
        obj = object.__new__(cls)
        obj.prime_hint = hint
        obj.num, obj.den = _canonical(num, den)
        return obj

    # -- structure ----------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return self.den == {0: ONE} and all(e >= 0 for e in self.num)

    @property
    def is_laurent_polynomial(self) -> bool:
        return self.den == {0: ONE}

    @property
    def has_half_exponents(self) -> bool:
        return any(e % 2 for e in self.num) or any(e % 2 for e in self.den)

    @property
    def is_rational_coeff(self) -> bool:
        return all(c.is_rational for c in self.num.values()) and \
            all(c.is_rational for c in self.den.values())

    def degree(self) -> Fraction:
        """deg(num) - deg(den) in X-units (for the zero function: -inf-like None)."""
        if not self.num:
            return None
        return Fraction(max(self.num) - max(self.den), 2)

    def num_terms(self) -> dict[Fraction, QS]:
        return {Fraction(e, 2): c for e, c in sorted(self.num.items())}

    def den_terms(self) -> dict[Fraction, QS]:
        return {Fraction(e, 2): c for e, c in sorted(self.den.items())}

    def poly_coeff(self, exp) -> QS:
        """Coefficient of X^exp, valid when the value is a Laurent polynomial."""
        if self.den != {0: ONE}:
            raise ValueError("not a (Laurent) polynomial")
        key = int(2 * Fraction(exp))
        return self.num.get(key, ZERO)

    # -- evaluation and substitution -----------------------------------------

    def eval_x(self, x: RatLike) -> QS:
        """Exact value at X = x (x rational or QS); pole raises ZeroDivisionError."""
        x = QS.coerce(x)
        num = _eval_poly(self.num, x, self.prime_hint)
        den = _eval_poly(self.den, x, self.prime_hint)
        if not den:
            raise ZeroDivisionError("pole at the evaluation point")
        return num / den

    def eval_s(self, p: int, s: int) -> QS:
        """Exact value at X = p^(-s)."""
        return self.eval_x(Fraction(1, p) ** s if s >= 0 else Fraction(p) ** (-s))

    def subst_x(self, *, scale: Fraction = Fraction(1), invert: bool = False) -> "LaurentRat":
        """The function X -> f(scale * X) or X -> f(scale / X).

        scale^(1/2) must exist in Q(sqrt(prime_hint)) when half exponents occur.
        ``scale=Fraction(1,p)`` realizes the shift s -> s+1; with ``invert=True``
        it realizes s -> 1-s.
        """
        def transform(poly: dict[int, QS]) -> dict[int, QS]:
            out: dict[int, QS] = {}
            for e2, c in poly.items():
                c2 = c * _scale_pow(scale, e2, self.prime_hint)
                k = -e2 if invert else e2
                out[k] = out.get(k, ZERO) + c2
            return {e: c for e, c in out.items() if c}

        return LaurentRat._raw(transform(self.num), transform(self.den), self.prime_hint)

    def shift(self, exp) -> "LaurentRat":
        """Multiply by X^exp (exp a half-integer Fraction or int)."""
        e2 = int(2 * Fraction(exp))
        return LaurentRat._raw({e + e2: c for e, c in self.num.items()}, dict(self.den),
                               self.prime_hint)

    def derivative_x(self) -> "LaurentRat":
        """Formal d/dX."""
        dn = {e - 2: c * Fraction(e, 2) for e, c in self.num.items() if e != 0}
        dd = {e - 2: c * Fraction(e, 2) for e, c in self.den.items() if e != 0}
        num = _poly_sub(_poly_mul(dn, self.den), _poly_mul(self.num, dd))
        return LaurentRat._raw(num, _poly_mul(self.den, self.den), self.prime_hint)

    def dlog_at_one(self) -> Fraction:
        """f'(1)/f(1) as an exact rational (used for d/ds log f(p^{-s}) at s=0)."""
        v = self.eval_x(1)
        if not v:
            raise ZeroDivisionError("dlog at a zero of f")
        out = (self.derivative_x().eval_x(1) / v)
        return out.as_fraction() if out.is_rational else out

    # -- serialization ---------------------------------------------------------

    def to_json(self) -> dict:
        def enc(poly):
            out = []
            for e2, c in sorted(poly.items()):
                e = e2 // 2 if e2 % 2 == 0 else f"{e2}/2"
                if c.is_rational:
                    out.append([e, str(c.a)])
                else:
                    out.append([e, f"{c.a}+{c.b}*sqrt({c.d})"])
            return out

        data = {"numer": enc(self.num), "denom": enc(self.den)}
        if self.prime_hint:
            data["prime"] = self.prime_hint
        return data

    @staticmethod
    def from_json(data: dict) -> "LaurentRat":
        def dec(items):
            out = {}
            for e, c in items:
                e2 = int(e) * 2 if not isinstance(e, str) or "/" not in e else int(str(e).split("/")[0])
                if isinstance(c, str) and "sqrt" in c:
                    body, surd = c.split("+")
                    b, rest = surd.split("*sqrt(")
                    out[e2] = QS(Fraction(body), Fraction(b), int(rest.rstrip(")")))
                else:
                    out[e2] = QS(Fraction(c))
            return out

        return LaurentRat(dec(data["numer"]), dec(data["denom"]),
                          prime_hint=data.get("prime"), half_keys=True)

    def __repr__(self):
        return f"({_poly_str(self.num)})/({_poly_str(self.den)})" if self.den != {0: ONE} \
            else _poly_str(self.num)


# -- dense/sparse polynomial helpers (keys are doubled exponents) -------------


def _poly_add(a: dict[int, QS], b: dict[int, QS]) -> dict[int, QS]:
    out = dict(a)
    for e, c in b.items():
        s = out.get(e, ZERO) + c
        if s:
            out[e] = s
        else:
            out.pop(e, None)
    return out


def _poly_sub(a, b):
    return _poly_add(a, {e: -c for e, c in b.items()})


def _poly_mul(a: dict[int, QS], b: dict[int, QS]) -> dict[int, QS]:
    out: dict[int, QS] = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            s = out.get(e, ZERO) + ca * cb
            if s:
                out[e] = s
            else:
                out.pop(e, None)
    return out


def _eval_poly(poly: dict[int, QS], x: QS, hint) -> QS:
    total = QS(0)
    for e2, c in poly.items():
        q, r = divmod(e2, 2)
        val = x ** q
        if r:
            if x.is_rational:
                if hint is None:
                    raise ValueError("half exponent needs prime_hint to take sqrt")
                val = val * QS.sqrt_of_fraction(x.as_fraction(), hint)
            else:
                raise ValueError("cannot take sqrt of an irrational evaluation point")
        total = total + c * val
    return total


def _scale_pow(scale: Fraction, e2: int, hint) -> QS:
    q, r = divmod(e2, 2)
    val = QS(scale**q)
    if r:
        if hint is None:
            raise ValueError("half exponent needs prime_hint")
        val = val * QS.sqrt_of_fraction(scale, hint)
    return val


def _shift_to_zero(poly: dict[int, QS]) -> tuple[dict[int, QS], int]:
    if not poly:
        return poly, 0
    m = min(poly)
    return {e - m: c for e, c in poly.items()}, m


def _to_dense(poly: dict[int, QS]) -> list[QS]:
    deg = max(poly)
    out = [ZERO] * (deg + 1)
    for e, c in poly.items():
        out[e] = c
    return out


def _from_dense(coeffs: list[QS]) -> dict[int, QS]:
    return {e: c for e, c in enumerate(coeffs) if c}


def _dense_gcd(a: list[QS], b: list[QS]) -> list[QS]:
    """Monic gcd by the Euclidean algorithm over Q(sqrt(d))."""
    while b and any(b):
        a, b = b, _dense_mod(a, b)
    lead = a[-1]
    return [c / lead for c in a]


def _dense_mod(a: list[QS], b: list[QS]) -> list[QS]:
    a = list(a)
    while a and not a[-1]:
        a.pop()
    bdeg = len(b) - 1
    while len(a) - 1 >= bdeg:
        q = a[-1] / b[-1]
        shift = len(a) - 1 - bdeg
        for i, c in enumerate(b):
            a[i + shift] = a[i + shift] - q * c
        while a and not a[-1]:
            a.pop()
        if not a:
            break
    return a


def _canonical(num: dict[int, QS], den: dict[int, QS]) -> tuple[dict[int, QS], dict[int, QS]]:
    if not den:
        raise ZeroDivisionError("zero denominator")
    if not num:
        den = {0: ONE}
        return {}, den
    num, sn = _shift_to_zero(num)
    den, sd = _shift_to_zero(den)
    g = _dense_gcd(_to_dense(num), _to_dense(den))
    if len(g) > 1:
        num = _from_dense(_dense_div(_to_dense(num), g))
        den = _from_dense(_dense_div(_to_dense(den), g))
    # net monomial shift goes to the numerator; denominator starts at X^0
    num = {e + sn - sd: c for e, c in num.items()}
    unit = den[min(den)]
    num = {e: c / unit for e, c in num.items()}
    den = {e: c / unit for e, c in den.items()}
    return num, den


def _dense_div(a: list[QS], b: list[QS]) -> list[QS]:
    out = [ZERO] * (len(a) - len(b) + 1)
    a = list(a)
    bdeg = len(b) - 1
    while len(a) - 1 >= bdeg and any(a):
        while a and not a[-1]:
            a.pop()
        if len(a) - 1 < bdeg:
            break
        q = a[-1] / b[-1]
        shift = len(a) - 1 - bdeg
        out[shift] = q
        for i, c in enumerate(b):
            a[i + shift] = a[i + shift] - q * c
    return out


def _poly_str(poly: dict[int, QS]) -> str:
    if not poly:
        return "0"
    parts = []
    for e2, c in sorted(poly.items()):
        e = Fraction(e2, 2)
        if e == 0:
            parts.append(f"{c}")
        else:
            xs = "X" if e == 1 else f"X^{e}"
            cs = "" if c == ONE else ("-" if c == QS(-1) else f"{c}*")
            parts.append(f"{cs}{xs}")
    return " + ".join(parts).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# Module-level operations mirroring the documented API
# ---------------------------------------------------------------------------


def lr_arith(a: LaurentRat, b: LaurentRat, op: str) -> LaurentRat:
    """Field operation on LaurentRat values: one of add, sub, mul, div."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def lr_eval(f: LaurentRat, p: int, s: int) -> Fraction:
    """Exact rational value of f at X = p^(-s) (raises on a pole or surd)."""
    v = f.eval_s(p, s)
    return v.as_fraction()


def interpolate_poly(values: Iterable[tuple[int, Fraction]], p: int,
                     degree_bound: int) -> LaurentRat:
    """The unique polynomial in X of degree <= degree_bound through the samples.

    ``values`` are pairs (s, v) with distinct integers s >= 0, read as
    f(p^(-s)) = v.  More than degree_bound+1 samples over-determine the
    polynomial; inconsistent extra samples raise ValueError, which signals a
    wrong degree bound (the sampled function was not such a polynomial).
    """
    pts = [(Fraction(1, p) ** s if s >= 0 else Fraction(p) ** (-s), _frac(v))
           for s, v in values]
    xs = [x for x, _ in pts]
    if len(set(xs)) != len(xs):
        raise ValueError("duplicate sample points")
    if len(pts) < degree_bound + 1:
        raise ValueError("need at least degree_bound+1 samples")
    base, extra = pts[:degree_bound + 1], pts[degree_bound + 1:]
    poly = _lagrange(base, p)
    for x, v in extra:
        if poly.eval_x(x) != QS.coerce(v):
            raise ValueError("samples are inconsistent with the degree bound")
    return poly


def _lagrange(pts: list[tuple[Fraction, Fraction]], p: int) -> LaurentRat:
    total = LaurentRat.const(0, p)
    for i, (xi, vi) in enumerate(pts):
        term = LaurentRat.const(vi, p)
        for j, (xj, _) in enumerate(pts):
            if j == i:
                continue
            term = term * LaurentRat({1: 1, 0: -xj}, prime_hint=p) / LaurentRat.const(xi - xj, p)
        total = total + term
    return total
