"""Places of F_q(t), valuations, the product formula and K_v arithmetic.

A local element is stored as u^val * mant where u is the uniformizer (pi at
a finite place, s = 1/t at infinity), mant is a unit known modulo
u^(absprec - val) and absprec is the absolute precision: all digits of
exponent < absprec are known.  At infinity the mantissa is a polynomial in s
held in the same FqPoly type (its variable is read as s, not t).
"""

from __future__ import annotations

import functools
import math
from fractions import Fraction

import numpy as np

from .algebra import GF, FqPoly, RatFunc, factor, format_poly, inverse_mod

INF = math.inf
DEFAULT_PRECISION = 64


class PrecisionError(ArithmeticError):
    pass


class Place:
    """The infinite place (pi=None) or the finite place of a monic irreducible pi."""

    __slots__ = ("F", "pi")

    def __init__(self, F: GF, pi: FqPoly | None = None, *, _trusted: bool = False):
        if pi is not None and not _trusted:
            if not pi.is_monic() or not pi.is_irreducible():
                raise ValueError(f"{pi} is not a monic irreducible polynomial")
        self.F = F
        self.pi = pi

    @classmethod
    def infinite(cls, F: GF) -> Place:
        return cls(F, None)

    @property
    def is_infinite(self) -> bool:
        return self.pi is None

    @property
    def degree(self) -> int:
        return 1 if self.pi is None else self.pi.degree

    @property
    def uniformizer(self) -> FqPoly:
        """pi, or the variable s = 1/t at infinity (represented as t)."""
        return self.F.t if self.pi is None else self.pi

    @property
    def uses_truncation(self) -> bool:
        # reduction mod u^n is plain truncation when u is the variable itself
        return self.pi is None or (self.pi.degree == 1 and self.pi.c[0] == 0)

    def __eq__(self, other):
        return isinstance(other, Place) and self.F == other.F and self.pi == other.pi

    def __hash__(self):
        return hash((self.F, self.pi))

    def __str__(self):
        return "inf" if self.pi is None else str(self.pi)

    def __repr__(self):
        return f"Place({self})"


def _pi_adic_split(f: FqPoly, pi: FqPoly) -> tuple[int, FqPoly]:
    """(n, g) with f = pi^n g and pi not dividing g."""
    n = 0
    while True:
        quo, rem = divmod(f, pi)
        if not rem.is_zero():
            return n, f
        f = quo
        n += 1


def valuation(v: Place, x: RatFunc) -> int | float:
    """v(x); +inf at x = 0."""
    if x.is_zero():
        return INF
    if v.is_infinite:
        return x.den.degree - x.num.degree
    return _finite_valuation(v, x)


@functools.lru_cache(maxsize=8192)
def _finite_valuation(v: Place, x: RatFunc) -> int:
    a, _ = _pi_adic_split(x.num, v.pi)
    b, _ = _pi_adic_split(x.den, v.pi)
    return a - b


def abs_exponent(v: Place, x: RatFunc) -> int | float:
    """Exponent e with |x|_v = q^e, i.e. -deg(v) * v(x)."""
    return -v.degree * valuation(v, x)


def abs_value(v: Place, x: RatFunc) -> Fraction:
    """|x|_v = q^(-deg(v) v(x)) as an exact rational."""
    if x.is_zero():
        return Fraction(0)
    return Fraction(x.F.q) ** abs_exponent(v, x)


def support(x: RatFunc) -> dict[Place, int]:
    """Places where v(x) != 0, with the valuation."""
    if x.is_zero():
        raise ValueError("the zero element has no finite support")
    F = x.F
    out: dict[Place, int] = {}
    for poly, sign in ((x.num, 1), (x.den, -1)):
        if poly.degree < 1:
            continue
        for pi, e in factor(poly):
            v = Place(F, pi, _trusted=True)
            out[v] = out.get(v, 0) + sign * e
    v_inf = valuation(Place.infinite(F), x)
    if v_inf:
        out[Place.infinite(F)] = v_inf
    return out


def product_formula_terms(x: RatFunc) -> dict[Place, int]:
    """deg(v) * v(x) over the support of x (so |x|_v = q^-term)."""
    return {v: v.degree * e for v, e in support(x).items()}


def product_formula_check(x: RatFunc) -> bool:
    """True iff the exponents deg(v) v(x) sum to 0 over all places."""
    if x.is_zero():
        raise ValueError("product formula needs x != 0")
    return sum(product_formula_terms(x).values()) == 0


# ---------------------------------------------------------------------------
# Completion arithmetic


@functools.lru_cache(maxsize=1024)
def _u_power(v: Place, n: int) -> FqPoly:
    return v.uniformizer**n


def _reduce(v: Place, f: FqPoly, n: int) -> FqPoly:
    """f mod u^n."""
    if n <= 0:
        return v.F.zero
    if v.uses_truncation:
        if len(f) <= n:
            return f
        return FqPoly._make(v.F, f.c[:n])
    if f.degree < v.degree * n:
        return f
    return f % _u_power(v, n)


def _split_u(v: Place, f: FqPoly) -> tuple[int, FqPoly]:
    if v.uses_truncation:
        nz = np.flatnonzero(f.c)
        k = int(nz[0])
        return k, FqPoly._make(v.F, f.c[k:])
    return _pi_adic_split(f, v.uniformizer)


def _shift(v: Place, f: FqPoly, k: int) -> FqPoly:
    """f * u^k for k >= 0."""
    if k == 0 or f.is_zero():
        return f
    if v.uses_truncation:
        return FqPoly._make(v.F, np.concatenate([np.zeros(k, dtype=np.int64), f.c]))
    return f * _u_power(v, k)


class LocalElem:
    """u^val * mant in K_v, known up to absolute precision absprec."""

    __slots__ = ("place", "val", "mant", "absprec")

    def __init__(self, place: Place, val, mant: FqPoly, absprec):
        self.place = place
        self.val = val
        self.mant = mant
        self.absprec = absprec

    # constructors
    @classmethod
    def exact_zero(cls, v: Place) -> LocalElem:
        return cls(v, INF, v.F.zero, INF)

    @classmethod
    def zero_to(cls, v: Place, absprec) -> LocalElem:
        return cls(v, absprec, v.F.zero, absprec)

    @classmethod
    def _normalized(cls, v: Place, val: int, f: FqPoly, absprec) -> LocalElem:
        if absprec == INF:
            raise PrecisionError("nonzero local elements need finite precision")
        f = _reduce(v, f, absprec - val)
        if f.is_zero():
            return cls.zero_to(v, absprec)
        k, f = _split_u(v, f)
        val += k
        return cls(v, val, _reduce(v, f, absprec - val), absprec)

    @classmethod
    def from_series(cls, v: Place, val: int, f: FqPoly, absprec: int) -> LocalElem:
        """u^val * f for a polynomial f (in t, or in s at infinity)."""
        if f.is_zero():
            return cls.zero_to(v, absprec)
        return cls._normalized(v, val, f, absprec)

    # properties
    @property
    def relprec(self):
        return self.absprec - self.val

    def is_zero(self) -> bool:
        """Zero to the known precision (or exactly zero)."""
        return self.mant.is_zero()

    def is_exact_zero(self) -> bool:
        return self.mant.is_zero() and self.absprec == INF

    def _check(self, other: LocalElem) -> None:
        if self.place != other.place:
            raise ValueError("local elements at different places")

    # arithmetic
    def __add__(self, other: LocalElem) -> LocalElem:
        if isinstance(other, RatFunc):
            other = embed_abs(self.place, other, self.absprec)
        self._check(other)
        if other.is_exact_zero():
            return self
        if self.is_exact_zero():
            return other
        v = self.place
        absprec = min(self.absprec, other.absprec)
        low = min(self.val, other.val)
        if low >= absprec:
            return LocalElem.zero_to(v, absprec)
        f = v.F.zero
        for x in (self, other):
            if not x.mant.is_zero() and x.val < absprec:
                f = f + _shift(v, x.mant, x.val - low)
        return LocalElem._normalized(v, low, f, absprec)

    __radd__ = __add__

    def __neg__(self) -> LocalElem:
        return LocalElem(self.place, self.val, -self.mant, self.absprec)

    def __sub__(self, other: LocalElem) -> LocalElem:
        if isinstance(other, RatFunc):
            other = embed_abs(self.place, other, self.absprec)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> LocalElem:
        if isinstance(other, RatFunc):
            return local_scale(self, other)
        self._check(other)
        v = self.place
        if self.is_exact_zero() or other.is_exact_zero():
            return LocalElem.exact_zero(v)
        absprec = min(self.absprec + other.val, other.absprec + self.val)
        if self.is_zero() or other.is_zero():
            return LocalElem.zero_to(v, absprec)
        val = self.val + other.val
        mant = _reduce(v, self.mant * other.mant, absprec - val)
        return LocalElem(v, val, mant, absprec)

    __rmul__ = __mul__

    def inverse(self) -> LocalElem:
        if self.is_zero():
            raise PrecisionError("precision exhausted")
        v = self.place
        rel = self.relprec
        mant = inverse_mod(self.mant, _u_power(v, rel)) if not v.uses_truncation else _series_inverse(v, self.mant, rel)
        return LocalElem(v, -self.val, mant, -self.val + rel)

    def __truediv__(self, other) -> LocalElem:
        if isinstance(other, RatFunc):
            other = embed(self.place, other, max(int(self.relprec), 1))
        return self * other.inverse()

    def frobenius(self, j: int = 1, cap=None) -> LocalElem:
        """self^(q^j), optionally truncated to absolute precision cap."""
        v = self.place
        x = self
        for _ in range(j):
            q = v.F.q
            if x.is_exact_zero():
                return x
            if x.is_zero():
                x = LocalElem.zero_to(v, x.absprec * q)
            else:
                absprec = x.absprec * q
                val = x.val * q
                if cap is not None and absprec > cap:
                    absprec = max(cap, val)
                x = LocalElem(v, val, _reduce(v, x.mant.frobenius(1), absprec - val), absprec)
                if x.mant.is_zero():
                    x = LocalElem.zero_to(v, absprec)
            if cap is not None:
                x = x.truncate(cap)
        return x

    def truncate(self, absprec) -> LocalElem:
        if absprec >= self.absprec:
            return self
        v = self.place
        if self.val >= absprec:
            return LocalElem.zero_to(v, absprec)
        return LocalElem(v, self.val, _reduce(v, self.mant, absprec - self.val), absprec)

    def apply_twisted(self, tp) -> LocalElem:
        """Evaluate a twisted polynomial sum c_i self^(q^i) in K_v."""
        v = self.place
        acc = LocalElem.exact_zero(v)
        if self.is_exact_zero():
            return acc
        target = self.absprec
        cap = target + max([0] + [-valuation(v, c) for c in tp.coeffs if not c.is_zero()])
        power = self
        for i, c in enumerate(tp.coeffs):
            if i:
                power = power.frobenius(1, cap=cap)
            if c.is_zero():
                continue
            acc = acc + local_scale(power, c, target)
        return acc

    def valuation(self):
        return self.val

    def agrees_with(self, other: LocalElem) -> int | float:
        """Absolute precision to which self - other is known to vanish,
        or the valuation of the difference if it does not vanish."""
        d = self - other
        return d.val

    # digits and conversion
    def digits(self) -> list[FqPoly]:
        """Residue digits for exponents val .. absprec-1, each reduced mod u."""
        if self.is_zero():
            return []
        u = self.place.uniformizer
        out = []
        f = self.mant
        for _ in range(int(self.relprec)):
            f, rem = divmod(f, u)
            out.append(rem)
        return out

    def to_ratfunc(self) -> RatFunc:
        """The approximant u^val * mant as an element of K."""
        v = self.place
        F = v.F
        if self.is_zero():
            return RatFunc.zero(F)
        if v.is_infinite:
            # mant(s) s^val with s = 1/t
            m = self.mant
            d = m.degree
            num = FqPoly._make(F, m.c[::-1].copy())  # t^d * mant(1/t)
            shift = self.val + d
            if shift >= 0:
                return RatFunc(num, F.t**shift)
            return RatFunc(num * F.t ** (-shift), F.one)
        if self.val >= 0:
            return RatFunc.from_poly(self.mant * v.pi**self.val)
        return RatFunc(self.mant, v.pi ** (-self.val))

    def digit_string(self) -> str:
        if self.is_exact_zero():
            return "0"
        if self.is_zero():
            return f"O(u^{self.absprec})"
        F = self.place.F
        if self.place.degree == 1:
            body = " ".join(F.format_elem(d[0]) for d in self.digits())
        else:
            body = " ".join(f"[{format_poly(d)}]" for d in self.digits())
        return f"u^{self.val} * ({body}) + O(u^{self.absprec})"

    def __eq__(self, other):
        return (
            isinstance(other, LocalElem)
            and self.place == other.place
            and self.val == other.val
            and self.absprec == other.absprec
            and self.mant == other.mant
        )

    def __hash__(self):
        return hash((self.place, self.val, self.mant, self.absprec))

    def __repr__(self):
        return f"LocalElem({self.place}: {self.digit_string()})"


def _series_inverse(v: Place, f: FqPoly, n: int) -> FqPoly:
    """Inverse of a unit power series in the uniformizer variable mod u^n."""
    F = v.F
    g = FqPoly(F, (F.inv(f[0]),))
    prec = 1
    while prec < n:
        prec = min(2 * prec, n)
        # Newton step g <- g (2 - f g)
        fg = _reduce(v, _reduce(v, f, prec) * g, prec)
        g = _reduce(v, g * (FqPoly(F, (2 % F.p,)) - fg), prec)
    return g


def embed(v: Place, x: RatFunc, N: int = DEFAULT_PRECISION) -> LocalElem:
    """Laurent expansion of x at v with N digits of relative precision."""
    if N < 1:
        raise ValueError("precision N must be >= 1")
    return _embed(v, x, N)


@functools.lru_cache(maxsize=4096)
def _embed(v: Place, x: RatFunc, N: int) -> LocalElem:
    if x.is_zero():
        return LocalElem.exact_zero(v)
    F = v.F
    if v.is_infinite:
        num = FqPoly._make(F, x.num.c[::-1].copy())
        den = FqPoly._make(F, x.den.c[::-1].copy())
        val = x.den.degree - x.num.degree
    else:
        a, num = _pi_adic_split(x.num, v.pi)
        b, den = _pi_adic_split(x.den, v.pi)
        val = a - b
    num = _reduce(v, num, N)
    den = _reduce(v, den, N)
    if v.uses_truncation:
        inv = _series_inverse(v, den, N)
    else:
        inv = inverse_mod(den, _u_power(v, N))
    mant = _reduce(v, num * inv, N)
    return LocalElem(v, val, mant, val + N)


def embed_abs(v: Place, x: RatFunc, absprec) -> LocalElem:
    """Embed x known to absolute precision absprec (exact zero stays exact)."""
    if x.is_zero():
        return LocalElem.exact_zero(v)
    val = valuation(v, x)
    if absprec <= val:
        return LocalElem.zero_to(v, absprec)
    return embed(v, x, int(absprec - val))


def local_add(a: LocalElem, b: LocalElem) -> LocalElem:
    return a + b


def local_mul(a: LocalElem, b: LocalElem) -> LocalElem:
    return a * b


def local_inv(a: LocalElem) -> LocalElem:
    return a.inverse()


def local_scale(a: LocalElem, k: RatFunc, target=None) -> LocalElem:
    """k * a with k embedded precisely enough not to limit a's precision.

    target caps the absolute precision that is worth computing.
    """
    v = a.place
    if k.is_zero() or a.is_exact_zero():
        return LocalElem.exact_zero(v)
    vk = valuation(v, k)
    want = a.absprec if target is None else min(a.absprec + vk, target)
    if a.is_zero():
        return LocalElem.zero_to(v, a.absprec + vk)
    rel = int(max(want - vk - a.val, 1))
    return a * embed(v, k, rel)
