"""Exact arithmetic over F_q, A = F_q[t] and K = F_q(t).

Field elements are encoded as integers 0..q-1.  For q = p the integer is the
residue itself; for q = p^k it packs the base-p digits of a polynomial of
degree < k reduced modulo the field's conductor.  Polynomials in t keep their
coefficients (low degree first) in a read-only numpy int64 array with no
trailing zeros; the zero polynomial is the empty array.

Every value is immutable after construction.
"""

from __future__ import annotations

import functools
import random
from typing import Iterator, Sequence

import numpy as np

# Conway polynomials, coefficients low degree first.
CONWAY = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 1, 1, 0, 1),
    (2, 7): (1, 1, 0, 0, 0, 0, 0, 1),
    (2, 8): (1, 0, 1, 1, 1, 0, 0, 0, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (3, 4): (2, 0, 0, 2, 1),
    (3, 5): (1, 2, 0, 0, 0, 1),
    (5, 2): (2, 4, 1),
    (5, 3): (3, 3, 0, 1),
    (7, 2): (3, 6, 1),
    (11, 2): (2, 7, 1),
    (13, 2): (2, 12, 1),
}

MAX_Q = 256


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


class GF:
    """The finite field F_q with q = p^k <= 256.

    Arithmetic on encoded elements (ints or int arrays) goes through the
    methods ``add``, ``sub``, ``neg``, ``mul``, ``inv``; prime fields use
    modular integer arithmetic, extension fields use precomputed tables.
    """

    def __init__(self, p: int, k: int = 1, conductor: Sequence[int] | None = None):
        if not _is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if not 1 <= k <= 8:
            raise ValueError("extension degree k must satisfy 1 <= k <= 8")
        if p**k > MAX_Q:
            raise ValueError(f"q = {p}^{k} exceeds the supported bound {MAX_Q}")
        self.p = p
        self.k = k
        self.q = p**k
        self.prime = k == 1
        if k == 1:
            self.conductor: tuple[int, ...] | None = None
        else:
            if conductor is None:
                if (p, k) not in CONWAY:
                    raise ValueError(f"no built-in conductor for F_{p}^{k}; supply one")
                conductor = CONWAY[(p, k)]
            conductor = tuple(int(c) % p for c in conductor)
            while conductor and conductor[-1] == 0:
                conductor = conductor[:-1]
            if len(conductor) != k + 1 or conductor[-1] != 1:
                raise ValueError(f"conductor must be monic of degree {k}")
            prime_field = GF(p)
            if not FqPoly(prime_field, conductor).is_irreducible():
                raise ValueError("conductor is not irreducible over F_p")
            self.conductor = conductor
        self._build_tables()

    def _build_tables(self) -> None:
        p, k, q = self.p, self.k, self.q
        digits = np.array([[(e // p**i) % p for i in range(k)] for e in range(q)], dtype=np.int64)
        weights = p ** np.arange(k, dtype=np.int64)
        add = (digits[:, None, :] + digits[None, :, :]) % p
        self.add_t = (add @ weights).astype(np.int64)
        self.neg_t = ((-digits) % p) @ weights
        if self.prime:
            idx = np.arange(q, dtype=np.int64)
            self.mul_t = (idx[:, None] * idx[None, :]) % p
        else:
            mul = np.zeros((q, q), dtype=np.int64)
            cond = self.conductor
            for a in range(q):
                for b in range(a, q):
                    prod = [0] * (2 * k - 1)
                    for i in range(k):
                        if digits[a, i]:
                            for j in range(k):
                                prod[i + j] += int(digits[a, i] * digits[b, j])
                    for d in range(2 * k - 2, k - 1, -1):
                        c = prod[d] % p
                        if c:
                            for i in range(k + 1):
                                prod[d - k + i] -= c * cond[i]
                    val = sum((prod[i] % p) * p**i for i in range(k))
                    mul[a, b] = mul[b, a] = val
            self.mul_t = mul
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(self.mul_t[a] == 1)[0][0])
        self.inv_t = inv
        # Discrete log tables for the generator used in the text syntax.
        self.generator = self._find_generator()
        exp = [1]
        for _ in range(q - 2):
            exp.append(int(self.mul_t[exp[-1], self.generator]))
        self.exp_t = exp
        self.log_t = {e: i for i, e in enumerate(exp)}

    def _find_generator(self) -> int:
        q = self.q
        candidates = list(range(2, q)) if q > 2 else [1]
        if not self.prime and self.p < q:
            candidates.remove(self.p)
            candidates.insert(0, self.p)  # the class of x, primitive for Conway choices
        for g in candidates:
            x, order = g, 1
            while x != 1:
                x = int(self.mul_t[x, g])
                order += 1
            if order == q - 1:
                return g
        raise AssertionError("no primitive element")

    # element-wise arithmetic on encoded ints or int64 arrays
    def add(self, a, b):
        if self.prime:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self.add_t[a, b]

    def neg(self, a):
        if self.prime:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self.neg_t[a]

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.prime:
            return (a * b) % self.p
        return self.mul_t[a, b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return int(self.inv_t[a])

    def frobenius(self, a: int, times: int = 1) -> int:
        """a^(p^times); the identity after k applications."""
        for _ in range(times % self.k):
            a = int(self.power(a, self.p))
        return a

    def power(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e > 0 else 1
        return self.exp_t[(self.log_t[a] * e) % (self.q - 1)]

    def __call__(self, value: int) -> FqElem:
        return FqElem(self, value)

    def elements(self) -> list[FqElem]:
        return [FqElem(self, e) for e in range(self.q)]

    def format_elem(self, a: int) -> str:
        if self.prime or a in (0, 1):
            return str(int(a))
        i = self.log_t[int(a)]
        return "g" if i == 1 else f"g^{i}"

    # polynomial helpers
    def poly(self, coeffs: Sequence[int]) -> FqPoly:
        return FqPoly(self, coeffs)

    @property
    def t(self) -> FqPoly:
        return FqPoly(self, (0, 1))

    @property
    def one(self) -> FqPoly:
        return FqPoly(self, (1,))

    @property
    def zero(self) -> FqPoly:
        return FqPoly(self, ())

    def _key(self):
        return (self.p, self.k, self.conductor)

    def __eq__(self, other):
        return isinstance(other, GF) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __reduce__(self):
        return (get_field, self._key())

    def __repr__(self):
        if self.prime:
            return f"GF({self.p})"
        return f"GF({self.p}^{self.k})"


def get_field(p: int, k: int = 1, conductor: Sequence[int] | None = None) -> GF:
    """Cached field constructor; use it instead of ``GF`` for sharing tables."""
    if k == 1:
        conductor = None
    elif conductor is None:
        conductor = CONWAY.get((p, k))
    if conductor is not None:
        conductor = tuple(int(c) % p for c in conductor)
        while conductor and conductor[-1] == 0:
            conductor = conductor[:-1]
    return _get_field(p, k, conductor)


@functools.lru_cache(maxsize=None)
def _get_field(p: int, k: int, conductor: tuple[int, ...] | None) -> GF:
    return GF(p, k, conductor)


class FqElem:
    """A single element of F_q with operator overloading."""

    __slots__ = ("F", "value")

    def __init__(self, F: GF, value: int):
        if not 0 <= value < F.q:
            raise ValueError(f"{value} is not an encoded element of {F}")
        self.F = F
        self.value = int(value)

    def _wrap(self, other) -> int:
        if isinstance(other, FqElem):
            if other.F != self.F:
                raise TypeError("elements of different fields")
            return other.value
        if isinstance(other, int):
            return _int_elem(self.F, other)
        return NotImplemented

    def __add__(self, other):
        b = self._wrap(other)
        return FqElem(self.F, int(self.F.add(self.value, b)))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._wrap(other)
        return FqElem(self.F, int(self.F.sub(self.value, b)))

    def __rsub__(self, other):
        b = self._wrap(other)
        return FqElem(self.F, int(self.F.sub(b, self.value)))

    def __neg__(self):
        return FqElem(self.F, int(self.F.neg(self.value)))

    def __mul__(self, other):
        b = self._wrap(other)
        return FqElem(self.F, int(self.F.mul(self.value, b)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._wrap(other)
        return FqElem(self.F, int(self.F.mul(self.value, self.F.inv(b))))

    def __pow__(self, e: int):
        if e < 0:
            return FqElem(self.F, self.F.power(self.F.inv(self.value), -e))
        return FqElem(self.F, self.F.power(self.value, e))

    def frobenius(self) -> FqElem:
        return FqElem(self.F, self.F.frobenius(self.value))

    def __eq__(self, other):
        if isinstance(other, FqElem):
            return self.F == other.F and self.value == other.value
        if isinstance(other, int):
            return self.value == _int_elem(self.F, other)
        return NotImplemented

    def __hash__(self):
        return hash((self.F, self.value))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return self.F.format_elem(self.value)


def _int_elem(F: GF, n: int) -> int:
    """Image of the integer n in F_q (through F_p)."""
    return n % F.p  # prime-field elements are encoded by their residue in either case


def _strip(c: np.ndarray) -> np.ndarray:
    if len(c) and c[-1]:
        return c
    nz = np.flatnonzero(c)
    if len(nz) == 0:
        return c[:0]
    return c[: nz[-1] + 1]


class FqPoly:
    """A polynomial in t over F_q."""

    __slots__ = ("F", "c", "_hash")

    def __init__(self, F: GF, coeffs, *, _trusted: bool = False):
        self.F = F
        if _trusted:
            c = coeffs
        else:
            c = np.array(coeffs, dtype=np.int64).reshape(-1)
            if len(c) and (c.min() < 0 or c.max() >= F.q):
                if F.prime:
                    c = c % F.p
                else:
                    raise ValueError("coefficient out of range for the field encoding")
            c = _strip(c)
        c.flags.writeable = False
        self.c = c
        self._hash = None

    # construction helpers
    @classmethod
    def _make(cls, F: GF, c: np.ndarray) -> FqPoly:
        return cls(F, _strip(np.ascontiguousarray(c, dtype=np.int64)), _trusted=True)

    @classmethod
    def monomial(cls, F: GF, deg: int, coeff: int = 1) -> FqPoly:
        c = np.zeros(deg + 1, dtype=np.int64)
        c[deg] = coeff
        return cls._make(F, c)

    # basic properties
    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return len(self.c) == 0

    def is_one(self) -> bool:
        return len(self.c) == 1 and self.c[0] == 1

    @property
    def lead(self) -> int:
        return int(self.c[-1]) if len(self.c) else 0

    def is_monic(self) -> bool:
        return self.lead == 1

    def coeffs(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.c)

    def __len__(self):
        return len(self.c)

    def __getitem__(self, i: int) -> int:
        return int(self.c[i]) if 0 <= i < len(self.c) else 0

    def sort_key(self):
        """Degree first, then coefficients from the leading one down."""
        return (self.degree, tuple(int(x) for x in self.c[::-1]))

    # ring operations
    def _coerce(self, other) -> FqPoly:
        if isinstance(other, FqPoly):
            if other.F != self.F:
                raise TypeError("polynomials over different fields")
            return other
        if isinstance(other, FqElem):
            return FqPoly(self.F, (other.value,))
        if isinstance(other, int):
            return FqPoly(self.F, (_int_elem(self.F, other),))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        if not len(b):
            return self if a is self.c else other
        out = a.copy()
        out[: len(b)] = self.F.add(a[: len(b)], b)
        return FqPoly._make(self.F, out)

    __radd__ = __add__

    def __neg__(self):
        return FqPoly._make(self.F, self.F.neg(self.c))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FqPoly._make(self.F, _mul(self.F, self.c, other.c))

    __rmul__ = __mul__

    def scale(self, a: int) -> FqPoly:
        if a == 0:
            return self.F.zero
        return FqPoly._make(self.F, self.F.mul(self.c, a))

    def __pow__(self, e: int) -> FqPoly:
        if e < 0:
            raise ValueError("negative exponent for a polynomial")
        result = self.F.one
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __divmod__(self, other):
        other = self._coerce(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        qc, rc = _divmod(self.F, self.c, other.c)
        return FqPoly._make(self.F, qc), FqPoly._make(self.F, rc)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other: FqPoly) -> FqPoly:
        quo, rem = divmod(self, other)
        if not rem.is_zero():
            raise ArithmeticError("inexact polynomial division")
        return quo

    def monic(self) -> FqPoly:
        if self.is_zero() or self.lead == 1:
            return self
        return self.scale(self.F.inv(self.lead))

    def frobenius(self, j: int = 1) -> FqPoly:
        """self^(q^j), i.e. t -> t^(q^j) since coefficients lie in F_q."""
        if j == 0 or len(self.c) <= 1:
            return self
        step = self.F.q**j
        out = np.zeros((len(self.c) - 1) * step + 1, dtype=np.int64)
        out[::step] = self.c
        return FqPoly(self.F, out, _trusted=True)

    def derivative(self) -> FqPoly:
        if len(self.c) <= 1:
            return self.F.zero
        n = np.arange(1, len(self.c), dtype=np.int64) % self.F.p
        return FqPoly._make(self.F, self.F.mul(self.c[1:], n))

    def __call__(self, x: int) -> int:
        acc = 0
        for a in self.c[::-1]:
            acc = int(self.F.add(self.F.mul(acc, x), int(a)))
        return acc

    def powmod(self, e: int, mod: FqPoly) -> FqPoly:
        result = self.F.one % mod
        base = self % mod
        while e:
            if e & 1:
                result = (result * base) % mod
            e >>= 1
            if e:
                base = (base * base) % mod
        return result

    def is_irreducible(self) -> bool:
        """Rabin's test."""
        n = self.degree
        if n < 1:
            return False
        if n == 1:
            return True
        f = self.monic()
        t = self.F.t
        q = self.F.q

        def frob_pow(k: int) -> FqPoly:
            h = t
            for _ in range(k):
                h = h.powmod(q, f)
            return h

        if not (frob_pow(n) - t).__mod__(f).is_zero():
            return False
        for r in _prime_divisors(n):
            if not gcd(frob_pow(n // r) - t, f).is_one():
                return False
        return True

    # comparisons
    def __eq__(self, other):
        if isinstance(other, FqPoly):
            return self.F == other.F and np.array_equal(self.c, other.c)
        if isinstance(other, (int, FqElem)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.F.q, self.c.tobytes()))
        return self._hash

    def __lt__(self, other: FqPoly):
        return self.sort_key() < other.sort_key()

    def __bool__(self):
        return len(self.c) > 0

    def __reduce__(self):
        return (FqPoly, (self.F, self.coeffs()))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"FqPoly({format_poly(self)})"


def _mul(F: GF, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if not len(a) or not len(b):
        return a[:0]
    if F.prime:
        return np.convolve(a, b) % F.p
    if len(a) > len(b):
        a, b = b, a
    out = np.zeros(len(a) + len(b) - 1, dtype=np.int64)
    m = len(b)
    for i, ai in enumerate(a):
        if ai:
            out[i : i + m] = F.add(out[i : i + m], F.mul_t[ai][b])
    return out


def _divmod(F: GF, a: np.ndarray, b: np.ndarray):
    m = len(b) - 1
    if len(a) <= m:
        return a[:0], a
    r = a.copy()
    quo = np.zeros(len(a) - m, dtype=np.int64)
    inv_lead = F.inv(int(b[-1]))
    if F.prime:
        p = F.p
        neg_b = (-b) % p
        if m == 0:
            return (a * inv_lead) % p, a[:0]
        for i in range(len(a) - 1, m - 1, -1):
            c = int(r[i])
            if c:
                c = c * inv_lead % p
                quo[i - m] = c
                seg = r[i - m : i + 1]
                seg += c * neg_b
                seg %= p
    else:
        for i in range(len(a) - 1, m - 1, -1):
            c = int(r[i])
            if c:
                c = int(F.mul(c, inv_lead))
                quo[i - m] = c
                r[i - m : i + 1] = F.sub(r[i - m : i + 1], F.mul_t[c][b])
    return quo, r[:m]


def _prime_divisors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def gcd(a: FqPoly, b: FqPoly) -> FqPoly:
    """Monic gcd (0 if both are 0)."""
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def xgcd(a: FqPoly, b: FqPoly) -> tuple[FqPoly, FqPoly, FqPoly]:
    """Return (g, s, u) with s*a + u*b = g monic."""
    F = a.F
    r0, r1 = a, b
    s0, s1 = F.one, F.zero
    u0, u1 = F.zero, F.one
    while not r1.is_zero():
        quo, rem = divmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, s0 - quo * s1
        u0, u1 = u1, u0 - quo * u1
    if r0.is_zero():
        return r0, s0, u0
    inv = F.inv(r0.lead)
    return r0.scale(inv), s0.scale(inv), u0.scale(inv)


def inverse_mod(a: FqPoly, mod: FqPoly) -> FqPoly:
    g, s, _ = xgcd(a % mod, mod)
    if not g.is_one():
        raise ZeroDivisionError("not invertible modulo the given polynomial")
    return s % mod


def format_poly(f: FqPoly, var: str = "t") -> str:
    if f.is_zero():
        return "0"
    F = f.F
    parts = []
    for i in range(f.degree, -1, -1):
        a = int(f.c[i])
        if not a:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        coef = F.format_elem(a)
        if not mono:
            parts.append(coef)
        elif a == 1:
            parts.append(mono)
        else:
            parts.append(f"{coef}*{mono}")
    return " + ".join(parts)


# ---------------------------------------------------------------------------
# Rational functions


class RatFunc:
    """An element num/den of K = F_q(t) in canonical form.

    gcd(num, den) = 1 and den is monic, so equality is representation
    equality.  Use :func:`rat_normalize` or :meth:`from_poly` to build one.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: FqPoly, den: FqPoly, *, _reduced: bool = False):
        if not _reduced:
            if den.is_zero():
                raise ZeroDivisionError("division by zero in K")
            if num.is_zero():
                den = num.F.one
            else:
                g = gcd(num, den)
                if not g.is_one():
                    num, den = num // g, den // g
                lc = den.lead
                if lc != 1:
                    inv = num.F.inv(lc)
                    num, den = num.scale(inv), den.scale(inv)
        self.num = num
        self.den = den
        self._hash = None

    @property
    def F(self) -> GF:
        return self.num.F

    @classmethod
    def from_poly(cls, f: FqPoly) -> RatFunc:
        return cls(f, f.F.one, _reduced=True)

    @classmethod
    def zero(cls, F: GF) -> RatFunc:
        return cls(F.zero, F.one, _reduced=True)

    @classmethod
    def one(cls, F: GF) -> RatFunc:
        return cls(F.one, F.one, _reduced=True)

    @classmethod
    def t(cls, F: GF) -> RatFunc:
        return cls(F.t, F.one, _reduced=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_poly(self) -> bool:
        return self.den.is_one()

    def _coerce(self, other) -> RatFunc:
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, FqPoly):
            return RatFunc.from_poly(other)
        if isinstance(other, (int, FqElem)):
            return RatFunc.from_poly(self.num._coerce(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        a, b, c, d = self.num, self.den, other.num, other.den
        if b.is_one() and d.is_one():
            return RatFunc(a + c, b, _reduced=True)
        g = gcd(b, d)
        if g.is_one():
            num = a * d + c * b
            if num.is_zero():
                return RatFunc.zero(self.F)
            return RatFunc(num, b * d, _reduced=True)
        b1, d1 = b // g, d // g
        num = a * d1 + c * b1
        if num.is_zero():
            return RatFunc.zero(self.F)
        g2 = gcd(num, g)
        if not g2.is_one():
            num = num // g2
            d = d // g2
        return RatFunc(num, b1 * d, _reduced=True)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den, _reduced=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.is_zero() or other.is_zero():
            return RatFunc.zero(self.F)
        a, b, c, d = self.num, self.den, other.num, other.den
        g1 = gcd(a, d) if not d.is_one() else d
        g2 = gcd(c, b) if not b.is_one() else b
        if not g1.is_one():
            a, d = a // g1, d // g1
        if not g2.is_one():
            c, b = c // g2, b // g2
        num, den = a * c, b * d
        lc = den.lead
        if lc != 1:
            inv = num.F.inv(lc)
            num, den = num.scale(inv), den.scale(inv)
        return RatFunc(num, den, _reduced=True)

    __rmul__ = __mul__

    def inverse(self) -> RatFunc:
        if self.is_zero():
            raise ZeroDivisionError("division by zero in K")
        num, den = self.den, self.num
        lc = den.lead
        if lc != 1:
            inv = num.F.inv(lc)
            num, den = num.scale(inv), den.scale(inv)
        return RatFunc(num, den, _reduced=True)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, e: int) -> RatFunc:
        if e < 0:
            return self.inverse() ** (-e)
        return RatFunc(self.num**e, self.den**e, _reduced=True)

    def frobenius(self, j: int = 1) -> RatFunc:
        """self^(q^j); coprimality and monicity survive Frobenius."""
        return RatFunc(self.num.frobenius(j), self.den.frobenius(j), _reduced=True)

    def __eq__(self, other):
        if isinstance(other, RatFunc):
            return self.num == other.num and self.den == other.den
        if isinstance(other, (int, FqElem, FqPoly)):
            return self == self._coerce(other)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self):
        return not self.is_zero()

    def __reduce__(self):
        return (RatFunc, (self.num, self.den))

    def sort_key(self):
        return (self.den.sort_key(), self.num.sort_key())

    def __str__(self):
        if self.den.is_one():
            return format_poly(self.num)
        n = format_poly(self.num)
        if len(np.flatnonzero(self.num.c)) > 1:
            n = f"({n})"
        return f"{n}/({format_poly(self.den)})"

    def __repr__(self):
        return f"RatFunc({self})"


def rat_normalize(num: FqPoly, den: FqPoly) -> RatFunc:
    """Reduced fraction with monic denominator; zero denominators raise."""
    return RatFunc(num, den)


def weil_height(x: RatFunc) -> int:
    """max(deg num, deg den) of the reduced form; 0 at x = 0."""
    if x.is_zero():
        return 0
    return max(x.num.degree, x.den.degree)


def enumerate_polys(F: GF, max_deg: int) -> Iterator[FqPoly]:
    """All polynomials of degree <= max_deg, degree first then lexicographic."""
    if max_deg < 0:
        raise ValueError("max_deg must be >= 0")
    q = F.q
    yield F.zero
    for d in range(max_deg + 1):
        for lead in range(1, q):
            for low in range(q**d):
                c = np.zeros(d + 1, dtype=np.int64)
                c[d] = lead
                for i in range(d):
                    low, c[i] = divmod(low, q)
                yield FqPoly(F, c, _trusted=True)


def monic_polys(F: GF, d: int) -> Iterator[FqPoly]:
    """Monic polynomials of exact degree d in canonical order."""
    q = F.q
    for low in range(q**d):
        c = np.zeros(d + 1, dtype=np.int64)
        c[d] = 1
        for i in range(d):
            low, c[i] = divmod(low, q)
        yield FqPoly(F, c, _trusted=True)


@functools.lru_cache(maxsize=None)
def irreducible_monics(F: GF, d: int) -> tuple[FqPoly, ...]:
    """The monic irreducibles of degree d, sorted canonically."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return tuple(sorted(f for f in monic_polys(F, d) if f.is_irreducible()))


# ---------------------------------------------------------------------------
# Factorisation (square-free, distinct-degree, Cantor-Zassenhaus)


def _pth_root(f: FqPoly) -> FqPoly:
    F = f.F
    p = F.p
    c = f.c[::p]
    # a^(1/p) = a^(p^(k-1)) in F_{p^k}
    if not F.prime:
        c = np.array([F.frobenius(int(a), F.k - 1) for a in c], dtype=np.int64)
    return FqPoly._make(F, c)


def squarefree_factorization(f: FqPoly) -> list[tuple[FqPoly, int]]:
    f = f.monic()
    if f.degree < 1:
        return []
    out: list[tuple[FqPoly, int]] = []
    c = gcd(f, f.derivative())
    w = f // c
    i = 1
    while not w.is_one():
        y = gcd(w, c)
        fac = w // y
        if not fac.is_one():
            out.append((fac, i))
        w, c = y, c // y
        i += 1
    if not c.is_one():
        for g, e in squarefree_factorization(_pth_root(c)):
            out.append((g, e * f.F.p))
    return out


def _ddf(f: FqPoly) -> list[tuple[FqPoly, int]]:
    F = f.F
    t = F.t
    out = []
    h = t
    d = 0
    while f.degree >= 2 * (d + 1):
        d += 1
        h = h.powmod(F.q, f)
        g = gcd(h - t, f)
        if not g.is_one():
            out.append((g, d))
            f = f // g
            h = h % f
    if f.degree > 0:
        out.append((f, f.degree))
    return out


def _edf(f: FqPoly, d: int, rng: random.Random) -> list[FqPoly]:
    if f.degree == d:
        return [f]
    F = f.F
    while True:
        a = FqPoly(F, [rng.randrange(F.q) for _ in range(f.degree)])
        if a.degree < 1:
            continue
        if F.p == 2:
            b = a % f
            acc = b
            for _ in range(F.k * d - 1):
                b = (b * b) % f
                acc = acc + b
        else:
            acc = a.powmod((F.q**d - 1) // 2, f) - F.one
        g = gcd(acc, f)
        if 0 < g.degree < f.degree:
            return _edf(g, d, rng) + _edf(f // g, d, rng)


def factor(f: FqPoly) -> list[tuple[FqPoly, int]]:
    """Monic irreducible factors with multiplicity, sorted canonically."""
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    return list(_factor(f))


@functools.lru_cache(maxsize=4096)
def _factor(f: FqPoly) -> tuple[tuple[FqPoly, int], ...]:
    F = f.F
    rng = random.Random(0x5EED)
    counts: dict[FqPoly, int] = {}
    if F.prime and f.degree <= _SMALL_DEGREE:
        # numpy overhead dominates for short polynomials; use plain lists
        p = F.p
        for sq, e in _lsqfree(_lmonic([int(c) for c in f.c], p), p):
            for g, d in _lddf(sq, p):
                for h in _ledf(g, d, p, rng):
                    key = FqPoly(F, h)
                    counts[key] = counts.get(key, 0) + e
    else:
        for sq, e in squarefree_factorization(f):
            for g, d in _ddf(sq):
                for h in _edf(g, d, rng):
                    counts[h] = counts.get(h, 0) + e
    return tuple(sorted(counts.items(), key=lambda it: it[0].sort_key()))


# --- list arithmetic over F_p for short polynomials (low degree first) -----

_SMALL_DEGREE = 24


def _lstrip(a: list[int]) -> list[int]:
    while a and not a[-1]:
        a.pop()
    return a


def _lmonic(a: list[int], p: int) -> list[int]:
    inv = pow(a[-1], -1, p)
    return [c * inv % p for c in a]


def _lsub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _lstrip(out)


def _lmul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _lstrip([c % p for c in out])


def _ldivmod(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    m = len(b) - 1
    if len(a) <= m:
        return [], list(a)
    r = list(a)
    quo = [0] * (len(a) - m)
    inv = pow(b[-1], -1, p)
    for i in range(len(a) - 1, m - 1, -1):
        c = r[i] % p
        if c:
            c = c * inv % p
            quo[i - m] = c
            for j in range(m + 1):
                r[i - m + j] -= c * b[j]
    return _lstrip(quo), _lstrip([c % p for c in r[:m]])


def _lmod(a: list[int], b: list[int], p: int) -> list[int]:
    return _ldivmod(a, b, p)[1]


def _lgcd(a: list[int], b: list[int], p: int) -> list[int]:
    while b:
        a, b = b, _lmod(a, b, p)
    return _lmonic(a, p) if a else a


def _lpowmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result, base = _lmod([1], f, p), _lmod(a, f, p)
    while e:
        if e & 1:
            result = _lmod(_lmul(result, base, p), f, p)
        e >>= 1
        if e:
            base = _lmod(_lmul(base, base, p), f, p)
    return result


def _lsqfree(f: list[int], p: int) -> list[tuple[list[int], int]]:
    if len(f) < 2:
        return []
    out = []
    deriv = _lstrip([i * c % p for i, c in enumerate(f)][1:])
    c = _lgcd(f, deriv, p) if deriv else f
    w = _ldivmod(f, c, p)[0]
    i = 1
    while w != [1]:
        y = _lgcd(w, c, p)
        fac = _ldivmod(w, y, p)[0]
        if fac != [1]:
            out.append((fac, i))
        w, c = y, _ldivmod(c, y, p)[0]
        i += 1
    if c != [1]:
        # c is a p-th power; over F_p the coefficient roots are the coefficients
        for g, e in _lsqfree(c[::p], p):
            out.append((g, e * p))
    return out


def _lddf(f: list[int], p: int) -> list[tuple[list[int], int]]:
    out = []
    h, d = [0, 1], 0
    while len(f) - 1 >= 2 * (d + 1):
        d += 1
        h = _lpowmod(h, p, f, p)
        g = _lgcd(_lsub(h, [0, 1], p), f, p)
        if g != [1]:
            out.append((g, d))
            f = _ldivmod(f, g, p)[0]
            h = _lmod(h, f, p)
    if len(f) > 1:
        out.append((f, len(f) - 1))
    return out


def _ledf(f: list[int], d: int, p: int, rng: random.Random) -> list[list[int]]:
    if len(f) - 1 == d:
        return [f]
    while True:
        a = _lstrip([rng.randrange(p) for _ in range(len(f) - 1)])
        if len(a) < 2:
            continue
        if p == 2:
            b = _lmod(a, f, p)
            acc = b
            for _ in range(d - 1):
                b = _lmod(_lmul(b, b, p), f, p)
                acc = _lsub(acc, b, p)
        else:
            acc = _lsub(_lpowmod(a, (p**d - 1) // 2, f, p), [1], p)
        g = _lgcd(acc, f, p) if acc else f
        if 1 < len(g) < len(f):
            return _ledf(g, d, p, rng) + _ledf(_ldivmod(f, g, p)[0], d, p, rng)
