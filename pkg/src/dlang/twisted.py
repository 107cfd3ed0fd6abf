"""Twisted polynomials K{tau}, Drinfeld modules and their action on G_a."""

from __future__ import annotations

import functools
import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import GF, FqPoly, RatFunc, enumerate_polys, factor, gcd, weil_height
from .places import Place, valuation


class TwistedPoly:
    """sum c_i tau^i with c_i in K and tau c = c^q tau."""

    __slots__ = ("F", "coeffs", "_hash")

    def __init__(self, F: GF, coeffs: Sequence[RatFunc]):
        coeffs = list(coeffs)
        while coeffs and coeffs[-1].is_zero():
            coeffs.pop()
        self.F = F
        self.coeffs: tuple[RatFunc, ...] = tuple(coeffs)
        self._hash = None

    @classmethod
    def constant(cls, c: RatFunc) -> TwistedPoly:
        return cls(c.F, [c])

    @classmethod
    def tau(cls, F: GF, power: int = 1) -> TwistedPoly:
        zero, one = RatFunc.zero(F), RatFunc.one(F)
        return cls(F, [zero] * power + [one])

    @property
    def degree(self) -> int:
        """tau-degree; -1 for zero."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, i: int) -> RatFunc:
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return RatFunc.zero(self.F)

    def __add__(self, other: TwistedPoly) -> TwistedPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        return TwistedPoly(self.F, [self[i] + other[i] for i in range(n)])

    def __neg__(self) -> TwistedPoly:
        return TwistedPoly(self.F, [-c for c in self.coeffs])

    def __sub__(self, other: TwistedPoly) -> TwistedPoly:
        return self + (-other)

    def __mul__(self, other: TwistedPoly) -> TwistedPoly:
        return tw_mul(self, other)

    def scale(self, c: RatFunc) -> TwistedPoly:
        """Left multiplication by a constant c (c * self)."""
        return TwistedPoly(self.F, [c * a for a in self.coeffs])

    def __call__(self, x):
        """Evaluate sum c_i x^(q^i) at x in K (or any type with frobenius)."""
        if isinstance(x, RatFunc):
            acc = RatFunc.zero(self.F)
            if x.is_zero():
                return acc
            for i, c in enumerate(self.coeffs):
                if not c.is_zero():
                    acc = acc + c * x.frobenius(i)
            return acc
        return x.apply_twisted(self)

    def __eq__(self, other):
        return isinstance(other, TwistedPoly) and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.coeffs)
        return self._hash

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for i, c in enumerate(self.coeffs):
            if c.is_zero():
                continue
            mono = "" if i == 0 else ("tau" if i == 1 else f"tau^{i}")
            cs = str(c)
            if not mono:
                parts.append(cs)
            elif c == RatFunc.one(self.F):
                parts.append(mono)
            else:
                parts.append(f"({cs})*{mono}")
        return " + ".join(parts)

    def __repr__(self):
        return f"TwistedPoly({self})"


def tw_mul(a: TwistedPoly, b: TwistedPoly, max_degree: int | None = None) -> TwistedPoly:
    """Composition a o b: coefficient n is sum_{i+j=n} a_i * b_j^(q^i).

    With max_degree, only coefficients up to that tau-degree are formed.
    """
    if a.is_zero() or b.is_zero():
        return TwistedPoly(a.F, [])
    top = a.degree + b.degree if max_degree is None else min(max_degree, a.degree + b.degree)
    out = [RatFunc.zero(a.F) for _ in range(top + 1)]
    for i, ai in enumerate(a.coeffs[: top + 1]):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b.coeffs[: top + 1 - i]):
            if not bj.is_zero():
                out[i + j] = out[i + j] + ai * bj.frobenius(i)
    return TwistedPoly(a.F, out)


class DrinfeldModule:
    """A Drinfeld module over F_q(t), determined by phi_t."""

    def __init__(self, phi_t: TwistedPoly):
        F = phi_t.F
        if phi_t[0] != RatFunc.t(F):
            raise ValueError("constant coefficient of phi_t must be t")
        if phi_t.degree < 1:
            raise ValueError("phi_t must have tau-degree >= 1 (rank >= 1)")
        self.F = F
        self.phi_t = phi_t
        self.q = F.q

    @classmethod
    def from_coeffs(cls, F: GF, coeffs: Sequence[RatFunc]) -> DrinfeldModule:
        """Module with phi_t = t + coeffs[0] tau + coeffs[1] tau^2 + ..."""
        return cls(TwistedPoly(F, [RatFunc.t(F), *coeffs]))

    @classmethod
    def carlitz(cls, F: GF) -> DrinfeldModule:
        return cls.from_coeffs(F, [RatFunc.one(F)])

    @property
    def rank(self) -> int:
        return self.phi_t.degree

    def a(self, j: int) -> RatFunc:
        """Coefficient of tau^j in phi_t."""
        return self.phi_t[j]

    def __eq__(self, other):
        return isinstance(other, DrinfeldModule) and self.phi_t == other.phi_t

    def __hash__(self):
        return hash(self.phi_t)

    def __str__(self):
        return f"phi_t = {self.phi_t}"

    def __repr__(self):
        return f"DrinfeldModule({self.phi_t})"


class ProductAction:
    """(phi_1, ..., phi_g) acting coordinate-wise on G_a^g."""

    def __init__(self, modules: Sequence[DrinfeldModule]):
        if not modules:
            raise ValueError("a product action needs g >= 1 modules")
        self.modules = tuple(modules)
        self.F = modules[0].F

    @property
    def g(self) -> int:
        return len(self.modules)

    def __len__(self):
        return len(self.modules)

    def __getitem__(self, i: int) -> DrinfeldModule:
        return self.modules[i]

    def act(self, P: FqPoly, point: Sequence[RatFunc]) -> tuple[RatFunc, ...]:
        return tuple(act(m, P, x) for m, x in zip(self.modules, point))

    def permuted(self, perm: Sequence[int]) -> ProductAction:
        return ProductAction([self.modules[i] for i in perm])

    def __eq__(self, other):
        return isinstance(other, ProductAction) and self.modules == other.modules

    def __hash__(self):
        return hash(self.modules)


@functools.lru_cache(maxsize=4096)
def phi_of(m: DrinfeldModule, P: FqPoly) -> TwistedPoly:
    """The image phi_P of P under the ring homomorphism A -> K{tau}."""
    F = m.F
    result = TwistedPoly(F, [])
    for coef in P.c[::-1]:
        result = tw_mul(m.phi_t, result) if not result.is_zero() else result
        if coef:
            result = result + TwistedPoly(F, [RatFunc.from_poly(FqPoly(F, (int(coef),)))])
    return result


def frob_orbit(m: DrinfeldModule, x: RatFunc, n: int) -> list[RatFunc]:
    """[x, phi_t(x), phi_t^2(x), ..., phi_{t^n}(x)]."""
    ys = [x]
    for _ in range(n):
        ys.append(m.phi_t(ys[-1]))
    return ys


def act(m: DrinfeldModule, P: FqPoly, x: RatFunc) -> RatFunc:
    """phi_P(x), evaluated as sum_k p_k phi_{t^k}(x)."""
    F = m.F
    acc = RatFunc.zero(F)
    if x.is_zero() or P.is_zero():
        return acc
    y = x
    for k, coef in enumerate(P.c):
        if k:
            y = m.phi_t(y)
        if coef:
            acc = acc + y * RatFunc.from_poly(FqPoly(F, (int(coef),)))
    return acc


def _as_poly_rows(values: Sequence[RatFunc]) -> tuple[np.ndarray, FqPoly]:
    """Clear denominators: rows of coefficient vectors of values[i] * L."""
    F = values[0].F
    L = F.one
    for v in values:
        if not v.den.is_one():
            L = (L * v.den) // gcd(L, v.den)
    polys = [v.num * (L // v.den) for v in values]
    width = max((len(p) for p in polys), default=0)
    rows = np.zeros((len(polys), max(width, 1)), dtype=np.int64)
    for i, p in enumerate(polys):
        rows[i, : len(p)] = p.c
    return rows, L


def _first_dependency(F: GF, rows: np.ndarray) -> np.ndarray | None:
    """Coefficients c (c[-1] = 1) with sum c_i rows_i = 0 and the last row
    dependent on the earlier ones; None if the last row is independent."""
    n = rows.shape[0]
    # reduce the last row against an echelon basis of the earlier rows while
    # tracking combinations
    basis: list[tuple[int, np.ndarray, np.ndarray]] = []  # (pivot, row, combo)
    for i in range(n):
        row = rows[i].copy()
        combo = np.zeros(n, dtype=np.int64)
        combo[i] = 1
        for piv, brow, bcombo in basis:
            c = int(row[piv])
            if c:
                row = F.sub(row, F.mul(brow, c))
                combo = F.sub(combo, F.mul(bcombo, c))
        nz = np.flatnonzero(row)
        if len(nz) == 0:
            if i == n - 1:
                return combo
            return None
        piv = int(nz[0])
        inv = F.inv(int(row[piv]))
        basis.append((piv, F.mul(row, inv), F.mul(combo, inv)))
    return None


def is_torsion(m: DrinfeldModule, x: RatFunc, deg_bound: int) -> FqPoly | None:
    """Monic generator of the annihilator of x if it has degree <= deg_bound.

    Searches for the first F_q-linear dependence among x, phi_t(x),
    phi_{t^2}(x), ...; the dependence gives the minimal monic Q with
    phi_Q(x) = 0.  None is not a proof that x is non-torsion.
    """
    if deg_bound < 0:
        raise ValueError("deg_bound must be >= 0")
    F = m.F
    if x.is_zero():
        return F.one
    ys = [x]
    for n in range(1, deg_bound + 1):
        ys.append(m.phi_t(ys[-1]))
        rows, _ = _as_poly_rows(ys)
        combo = _first_dependency(F, rows)
        if combo is not None:
            return FqPoly(F, combo).monic()
    return None


def escapes_at(m: DrinfeldModule, x: RatFunc, v: Place) -> bool:
    """True if the orbit of x provably escapes to infinity at v.

    With w = v(x), it suffices that the tau^r term of phi_t(x) strictly
    dominates every other term and that v(phi_t(x)) < w: the same then holds
    for phi_t(x) with a smaller w, so the valuations of phi_{t^k}(x) strictly
    decrease and x has an infinite orbit, hence is not torsion.
    """
    if x.is_zero():
        return False
    w = valuation(v, x)
    r = m.rank
    q = m.q
    top = valuation(v, m.a(r)) + q**r * w
    if top >= w:
        return False
    for i in range(r):
        a = m.a(i)
        if not a.is_zero() and valuation(v, a) + q**i * w <= top:
            return False
    return True


def _escape_places(m: DrinfeldModule, x: RatFunc) -> list[Place]:
    """Candidate places for escapes_at: infinity and the poles of x."""
    F = m.F
    places = [Place.infinite(F)]
    if x.den.degree >= 1:
        places += [Place(F, pi, _trusted=True) for pi, _ in factor(x.den)]
    return places


TORSION = "torsion"
NON_TORSION = "non-torsion"
UNKNOWN = "unknown"


def torsion_status(m: DrinfeldModule, x: RatFunc, deg_bound: int, max_height: int = 1 << 14):
    """(status, annihilator or None, steps) for x.

    Runs the dependency search of is_torsion and stops early with
    NON_TORSION once some phi_{t^k}(x) provably escapes; UNKNOWN means the
    degree bound or the height budget ran out first.
    """
    F = m.F
    if x.is_zero():
        return TORSION, F.one, 0
    ys = [x]
    for n in range(deg_bound + 1):
        y = ys[-1]
        if any(escapes_at(m, y, v) for v in _escape_places(m, y)):
            return NON_TORSION, None, n
        if n == deg_bound or weil_height(y) * m.q**m.rank > max_height:
            return UNKNOWN, None, n
        ys.append(m.phi_t(y))
        combo = _first_dependency(F, _as_poly_rows(ys)[0])
        if combo is not None:
            return TORSION, FqPoly(F, combo).monic(), n + 1
    return UNKNOWN, None, deg_bound


def is_torsion_bruteforce(m: DrinfeldModule, x: RatFunc, deg_bound: int) -> FqPoly | None:
    """Exhaustive cross-check: smallest monic Q (canonical order) killing x."""
    for d in range(deg_bound + 1):
        for Q in enumerate_polys(m.F, d):
            if Q.degree == d and Q.is_monic() and act(m, Q, x).is_zero():
                return Q
    return None


def canonical_height_estimate(m: DrinfeldModule, x: RatFunc, n: int) -> Fraction:
    """h(phi_{t^n}(x)) / q^(r n), or 0 once the t-power orbit repeats.

    A repeat means the sequence phi_{t^k}(x) is eventually periodic, so the
    heights are bounded and the limit is exactly 0.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seen = {x}
    y = x
    for _ in range(n):
        y = m.phi_t(y)
        if y in seen:
            return Fraction(0)
        seen.add(y)
    return Fraction(weil_height(y), m.q ** (m.rank * n))


def looks_nontorsion(
    m: DrinfeldModule, x: RatFunc, threshold: Fraction = Fraction(1, 2), n_max: int = 6
) -> bool:
    """True if the height estimate exceeds threshold at two consecutive n."""
    prev = False
    for n in range(1, n_max + 1):
        cur = canonical_height_estimate(m, x, n) > threshold
        if cur and prev:
            return True
        prev = cur
    return False


def good_reduction(m: DrinfeldModule, v: Place) -> bool:
    """Coefficients of phi_t v-integral, leading coefficient a v-unit."""
    if v.is_infinite:
        return False
    if any(valuation(v, c) < 0 for c in m.phi_t.coeffs):
        return False
    return valuation(v, m.phi_t.coeffs[-1]) == 0


def torsion_subgroup(action: ProductAction, generators, deg_bound: int):
    """All elements of the submodule generated by torsion g-vectors.

    Returns a sorted list of g-tuples; raises ValueError if some generator
    has no annihilator of degree <= deg_bound in some coordinate.
    """
    F = action.F
    zero = tuple(RatFunc.zero(F) for _ in range(action.g))
    elems = {zero}
    for gen in generators:
        ann = F.one
        for mod, xi in zip(action.modules, gen):
            status, Q, _ = torsion_status(mod, xi, deg_bound)
            if status != TORSION:
                raise ValueError("unverified torsion generator")
            ann = (ann * Q) // gcd(ann, Q)
        cyclic = []
        for R in enumerate_polys(F, max(ann.degree - 1, 0)):
            if R.degree < ann.degree:
                cyclic.append(action.act(R, gen))
        elems = {tuple(a + b for a, b in zip(e, c)) for e, c in itertools.product(elems, cyclic)}
    return sorted(elems, key=lambda e: tuple(x.sort_key() for x in e))
