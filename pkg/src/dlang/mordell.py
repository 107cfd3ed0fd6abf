"""Orbits of cyclic modules, their intersection with affine varieties and
the coset structure of the intersection.

The set S = {P : phi_P(x) in V} is computed exactly for deg P < D, a coset
structure is inferred from it, and a coset can be certified analytically by
checking that f_{d,j}(Z_u) vanishes on the v-adic ball.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .algebra import GF, FqPoly, RatFunc, enumerate_polys, monic_polys
from .analytic import (
    act_local,
    common_ball,
    eval_log,
    normalize_lead,
    zu,
)
from .places import INF, LocalElem, Place, embed, embed_abs, local_scale, valuation
from .twisted import TORSION, ProductAction, frob_orbit, good_reduction, torsion_status, torsion_subgroup

log = logging.getLogger(__name__)

Monomial = tuple[int, ...]


class VerificationError(ValueError):
    pass


class MPoly:
    """Sparse polynomial in X_1..X_g with coefficients in K."""

    __slots__ = ("F", "g", "terms")

    def __init__(self, F: GF, g: int, terms: Mapping[Monomial, RatFunc] | None = None):
        self.F = F
        self.g = g
        clean = {}
        for mono, c in (terms or {}).items():
            if len(mono) != g:
                raise ValueError(f"monomial {mono} does not have {g} exponents")
            if not c.is_zero():
                clean[tuple(mono)] = c
        self.terms: dict[Monomial, RatFunc] = clean

    @classmethod
    def const(cls, F: GF, g: int, c: RatFunc) -> MPoly:
        return cls(F, g, {(0,) * g: c})

    @classmethod
    def var(cls, F: GF, g: int, i: int) -> MPoly:
        """X_{i+1} (0-based index i)."""
        if not 0 <= i < g:
            raise ValueError(f"variable X{i + 1} outside X1..X{g}")
        mono = tuple(1 if j == i else 0 for j in range(g))
        return cls(F, g, {mono: RatFunc.one(F)})

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(m) for m in self.terms), default=-1)

    def __add__(self, other: MPoly) -> MPoly:
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out[mono] + c if mono in out else c
        return MPoly(self.F, self.g, out)

    def __neg__(self) -> MPoly:
        return MPoly(self.F, self.g, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: MPoly) -> MPoly:
        return self + (-other)

    def __mul__(self, other: MPoly) -> MPoly:
        out: dict[Monomial, RatFunc] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                prod = c1 * c2
                out[mono] = out[mono] + prod if mono in out else prod
        return MPoly(self.F, self.g, out)

    def __pow__(self, e: int) -> MPoly:
        result = MPoly.const(self.F, self.g, RatFunc.one(self.F))
        for _ in range(e):
            result = result * self
        return result

    def scale(self, c: RatFunc) -> MPoly:
        return MPoly(self.F, self.g, {m: c * a for m, a in self.terms.items()})

    def evaluate(self, point: Sequence[RatFunc]) -> RatFunc:
        """Exact value in K."""
        acc = RatFunc.zero(self.F)
        powers: dict[tuple[int, int], RatFunc] = {}
        for mono, c in self.terms.items():
            term = c
            for i, e in enumerate(mono):
                if e:
                    key = (i, e)
                    if key not in powers:
                        powers[key] = point[i] ** e
                    term = term * powers[key]
            acc = acc + term
        return acc

    def evaluate_local(self, point: Sequence[LocalElem], absprec) -> LocalElem:
        """Value in K_v; absprec bounds the precision of constant terms."""
        v = point[0].place
        acc = LocalElem.exact_zero(v)
        for mono, c in self.terms.items():
            if not any(mono):
                acc = acc + embed_abs(v, c, absprec)
                continue
            val = None
            for i, e in enumerate(mono):
                for _ in range(e):
                    val = point[i] if val is None else val * point[i]
            acc = acc + local_scale(val, c, absprec)
        return acc

    def translate(self, shift: Sequence[RatFunc]) -> MPoly:
        """f(shift + X)."""
        if all(s.is_zero() for s in shift):
            return self
        subs = [MPoly.var(self.F, self.g, i) + MPoly.const(self.F, self.g, s) for i, s in enumerate(shift)]
        out = MPoly(self.F, self.g)
        for mono, c in self.terms.items():
            term = MPoly.const(self.F, self.g, c)
            for i, e in enumerate(mono):
                if e:
                    term = term * subs[i] ** e
            out = out + term
        return out

    def permute(self, perm: Sequence[int]) -> MPoly:
        """Rename variables so new X_{k+1} is old X_{perm[k]+1}."""
        return MPoly(self.F, self.g, {tuple(m[perm[k]] for k in range(self.g)): c for m, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, MPoly) and self.g == other.g and self.terms == other.terms

    def __hash__(self):
        return hash((self.g, frozenset(self.terms.items())))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for mono in sorted(self.terms, key=lambda m: (-sum(m), tuple(-e for e in m))):
            c = self.terms[mono]
            factors = [f"X{i + 1}" if e == 1 else f"X{i + 1}^{e}" for i, e in enumerate(mono) if e]
            mono_s = "*".join(factors)
            cs = str(c)
            if not mono_s:
                parts.append(cs if c.is_poly() and " + " not in cs else f"({cs})")
            elif c == RatFunc.one(self.F):
                parts.append(mono_s)
            else:
                parts.append(f"({cs})*{mono_s}")
        return " + ".join(parts)

    def __repr__(self):
        return f"MPoly({self})"


@dataclass(frozen=True)
class Variety:
    """Zero set of f_1..f_l in G_a^g."""

    g: int
    polys: tuple[MPoly, ...]

    def __post_init__(self):
        if not self.polys:
            raise ValueError("a variety needs at least one polynomial")
        for f in self.polys:
            if f.g != self.g:
                raise ValueError("polynomial dimension does not match the variety")

    def contains(self, point: Sequence[RatFunc]) -> bool:
        return all(f.evaluate(point).is_zero() for f in self.polys)


@dataclass(frozen=True)
class CyclicModule:
    action: ProductAction
    generator: tuple[RatFunc, ...]

    def __post_init__(self):
        if len(self.generator) != self.action.g:
            raise ValueError("generator length does not match the action")

    @property
    def F(self) -> GF:
        return self.action.F

    def point(self, P: FqPoly) -> tuple[RatFunc, ...]:
        return self.action.act(P, self.generator)


@dataclass(frozen=True)
class CosetStructure:
    """Union of cosets d + (Q) and isolated points, certified below degree D."""

    cosets: tuple[tuple[FqPoly, FqPoly], ...]
    isolated: tuple[FqPoly, ...]
    search_bound: int
    max_mod_deg: int

    def contains(self, P: FqPoly) -> bool:
        return P in self.isolated or any((P - d) % Q == P.F.zero for d, Q in self.cosets)

    def members(self, F: GF, D: int | None = None) -> list[FqPoly]:
        D = self.search_bound if D is None else D
        if D <= 0:
            return []
        return sorted(P for P in enumerate_polys(F, D - 1) if self.contains(P))

    def same_cosets(self, other: CosetStructure) -> bool:
        return self.cosets == other.cosets


@dataclass(frozen=True)
class RankOneModule:
    torsion_generators: tuple[tuple[RatFunc, ...], ...]
    free_generator: CyclicModule


# ---------------------------------------------------------------------------
# Orbits and intersections


def _scale_const(x: RatFunc, c: int) -> RatFunc:
    if c == 0 or x.is_zero():
        return RatFunc.zero(x.F)
    return RatFunc(x.num.scale(c), x.den, _reduced=True)


def _orbit_degrees(cm: CyclicModule, D: int, degrees: Sequence[int] | None = None) -> Iterator[tuple[FqPoly, tuple[RatFunc, ...]]]:
    F = cm.F
    if D <= 0:
        return
    ys = [frob_orbit(mod, x, D - 1) for mod, x in zip(cm.action.modules, cm.generator)]
    zero = tuple(RatFunc.zero(F) for _ in cm.generator)
    memo: dict[FqPoly, tuple[RatFunc, ...]] = {}
    want = None if degrees is None else set(degrees)
    top = D - 1 if want is None else max(want)
    for P in enumerate_polys(F, top):
        if P.is_zero():
            val = zero
        else:
            d = P.degree
            lead = P.lead
            low = P - FqPoly.monomial(F, d, lead)
            base = memo[low]
            val = tuple(b + _scale_const(y[d], lead) for b, y in zip(base, ys))
        memo[P] = val
        if want is None or max(P.degree, 0) in want:
            yield P, val


def orbit(cm: CyclicModule, D: int) -> Iterator[tuple[FqPoly, tuple[RatFunc, ...]]]:
    """(P, phi_P(x)) for every P with deg P < D, in canonical order.

    phi_P(x) is assembled from the images phi_{t^k}(x), each obtained from
    the previous one by one application of phi_t.
    """
    if D < 0:
        raise ValueError("D must be >= 0")
    yield from _orbit_degrees(cm, D)


def _intersect_slice(V: Variety, cm: CyclicModule, D: int, degrees: tuple[int, ...]) -> list[FqPoly]:
    return [P for P, pt in _orbit_degrees(cm, D, degrees) if V.contains(pt)]


def intersect(V: Variety, cm: CyclicModule, D: int, jobs: int = 1) -> list[FqPoly]:
    """Sorted S = {P : deg P < D and f_j(phi_P(x)) = 0 for all j}.

    With jobs > 1 the degrees are split across worker processes; the merged
    result is identical to the sequential one.
    """
    if V.g != cm.action.g:
        raise ValueError("variety dimension does not match the module")
    if D <= 0:
        return []
    if jobs <= 1:
        found = _intersect_slice(V, cm, D, tuple(range(D)))
    else:
        slices = [tuple(range(D)[i::jobs]) for i in range(jobs) if range(D)[i::jobs]]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_intersect_slice, *zip(*[(V, cm, D, s) for s in slices]))
            found = [P for part in parts for P in part]
    return sorted(set(found))


def _residues(F: GF, d: int) -> Iterator[FqPoly]:
    if d == 0:
        yield F.zero
        return
    yield from enumerate_polys(F, d - 1)


def infer_cosets(S: Sequence[FqPoly], D: int, max_mod_deg: int, F: GF) -> CosetStructure:
    """Greedy cover of S by residue classes d + (Q) fully contained in S.

    Moduli are tried by increasing degree, then canonical order; a class is
    accepted when every P of degree < D in it lies in S, it has at least two
    such elements, it is not contained in an accepted coset and it covers
    something new.  What is left becomes isolated points.
    """
    if max_mod_deg >= D:
        raise ValueError("modulus exceeds evidence")
    in_S = set(S)
    for P in in_S:
        if P.degree >= D:
            raise ValueError(f"{P} has degree >= D = {D}")
    remaining = set(in_S)
    cosets: list[tuple[FqPoly, FqPoly]] = []
    for d in range(max_mod_deg + 1):
        multiples = [R for R in _residues(F, D - d)]
        for Q in monic_polys(F, d):
            for r in _residues(F, d):
                if r not in in_S:
                    continue
                members = [r + R * Q for R in multiples]
                if len(members) < 2 or not all(P in in_S for P in members):
                    continue
                if any(Q % Q0 == F.zero and (r - d0) % Q0 == F.zero for d0, Q0 in cosets):
                    continue
                if not any(P in remaining for P in members):
                    continue
                cosets.append((r, Q))
                remaining.difference_update(members)
    structure = CosetStructure(tuple(cosets), tuple(sorted(remaining)), D, max_mod_deg)
    if structure.members(F, D) != sorted(in_S):
        raise AssertionError("coset structure does not re-expand to S")
    return structure


def effective_mod_deg(max_mod_deg: int, D: int) -> int:
    return max(0, min(max_mod_deg, D - 1))


@dataclass(frozen=True)
class IntersectionResult:
    S: tuple[FqPoly, ...]
    structure: CosetStructure
    next_structure: CosetStructure | None
    stable: bool


def intersect_and_infer(V: Variety, cm: CyclicModule, D: int, max_mod_deg: int, jobs: int = 1, check_stability: bool = True) -> IntersectionResult:
    """S and its coset structure at D, with the D+1 stability comparison."""
    F = cm.F
    S = intersect(V, cm, D, jobs)
    st = infer_cosets(S, D, effective_mod_deg(max_mod_deg, D), F)
    _echo_stronger_result(S, st, D)
    nxt = None
    stable = True
    if check_stability:
        S2 = intersect(V, cm, D + 1, jobs)
        nxt = infer_cosets(S2, D + 1, effective_mod_deg(max_mod_deg, D + 1), F)
        stable = st.same_cosets(nxt)
    return IntersectionResult(tuple(S), st, nxt, stable)


def _echo_stronger_result(S: Sequence[FqPoly], st: CosetStructure, D: int, threshold: int = 8) -> bool:
    """Log a counterexample candidate when a large S yields no coset."""
    if len(S) >= threshold and D >= 4 and not st.cosets:
        log.warning("|S| = %d at D = %d but no coset found: counterexample candidate", len(S), D)
        return False
    return True


def translate_by(V: Variety, point: Sequence[RatFunc]) -> Variety:
    """V_p = {y : p + y in V}, with f_{p,j}(X) = f_j(p + X)."""
    if len(point) != V.g:
        raise ValueError("translation vector has the wrong dimension")
    return Variety(V.g, tuple(f.translate(point) for f in V.polys))


# ---------------------------------------------------------------------------
# Analytic verification


@dataclass
class SampleResidual:
    kind: str  # "orbit" or "random"
    label: str
    valuations: list  # per polynomial: int or INF
    absprec: list

    def min_valuation(self):
        return min(self.valuations)


@dataclass
class VerifyReport:
    place: Place
    coset: tuple[FqPoly, FqPoly]
    ball_m: int
    precision: int
    floor: int
    lead_order: list[int]
    witness: FqPoly
    lambdas: list[LocalElem]
    translated: list[MPoly]
    samples: list[SampleResidual] = field(default_factory=list)
    tail_heuristic: bool = True

    @property
    def ok(self) -> bool:
        return all(s.min_valuation() >= self.floor for s in self.samples)


def _in_ball(pt: Sequence[RatFunc], v: Place, mv: int) -> bool:
    return all(x.is_zero() or valuation(v, x) >= mv for x in pt)


def find_witness(cm: CyclicModule, Q: FqPoly, v: Place, mv: int, cap: int = 32) -> FqPoly | None:
    """Nonzero P0 in (Q) with phi_{P0}(x) in the ball v >= mv.

    Tries Q t^k directly and, by pigeonhole on residues mod pi^mv, the
    differences Q (t^k2 - t^k1).
    """
    F = cm.F
    t = F.t
    seen: list[tuple[int, tuple[RatFunc, ...]]] = []
    base = cm.point(Q)
    modules = cm.action.modules
    cur = base
    for k in range(cap + 1):
        if k:
            cur = tuple(m.phi_t(x) for m, x in zip(modules, cur))
        if _in_ball(cur, v, mv) and any(not x.is_zero() for x in cur):
            return Q * t**k
        for k1, prev in seen:
            diff = tuple(a - b for a, b in zip(cur, prev))
            if _in_ball(diff, v, mv) and any(not x.is_zero() for x in diff):
                return Q * (t**k - t**k1)
        seen.append((k, cur))
    return None


def verify_coset_analytic(
    V: Variety,
    cm: CyclicModule,
    coset: tuple[FqPoly, FqPoly],
    v: Place,
    N: int,
    extra_samples: int = 5,
    *,
    D: int = 0,
    seed: int = 0,
    witness_cap: int = 32,
    floor: int | None = None,
) -> VerifyReport:
    """Check that f_{d,j}(Z_u) vanishes on the ball for the coset d + (Q).

    Samples u = (phi_1)_P(x_1) for fresh multiples P of the witness beyond
    degree D, and random u in the ball; each residual valuation must reach
    the floor (default N - 5).
    """
    F = cm.F
    action = cm.action
    floor = N - 5 if floor is None else floor
    if v.is_infinite:
        raise VerificationError("analytic verification needs a finite place of good reduction")
    for i, mod in enumerate(action.modules):
        if not good_reduction(mod, v):
            raise VerificationError(f"module {i + 1} has bad reduction at {v}")
    for i, x in enumerate(cm.generator):
        if valuation(v, x) < 0:
            raise VerificationError(f"generator coordinate {i + 1} is not integral at {v}")
    d, Q = coset
    series, b = common_ball(action.modules, v, N)
    mv = b.min_valuation
    P0 = find_witness(cm, Q, v, mv, witness_cap)
    if P0 is None:
        raise VerificationError("no analytic witness")
    base = cm.point(P0)
    logs = []
    for ls, y in zip(series, base):
        logs.append(LocalElem.exact_zero(v) if y.is_zero() else eval_log(ls.log, b, embed(v, y, N)))
    perm = normalize_lead(logs)
    paction = action.permuted(perm)
    lead_log = logs[perm[0]]
    lambdas = [logs[i] * lead_log.inverse() for i in perm[1:]]
    for lam in lambdas:
        if not lam.is_exact_zero() and lam.val < 0:
            raise VerificationError("uncertified λ magnitude")
    shift = cm.point(d)
    translated = [f.translate(shift) for f in V.polys]
    ptrans = [f.permute(perm) for f in translated]
    report = VerifyReport(v, coset, mv, N, floor, perm, P0, lambdas, translated, tail_heuristic=b.tail_increasing)

    def residuals(point: Sequence[LocalElem], kind: str, label: str) -> None:
        absprec = min(x.absprec for x in point)
        if absprec == INF:
            absprec = mv + N
        vals, precs = [], []
        for f in ptrans:
            r = f.evaluate_local(point, absprec)
            vals.append(r.val if not r.is_zero() else r.absprec)
            precs.append(r.absprec)
        report.samples.append(SampleResidual(kind, label, vals, precs))

    lead_mod = paction.modules[0]
    u0 = embed(v, base[perm[0]], N) if not base[perm[0]].is_zero() else LocalElem.exact_zero(v)
    start = max(1, D - P0.degree)

    for s in range(extra_samples):
        R = F.t ** (start + s)
        u = act_local(lead_mod, R, u0).truncate(u0.absprec)
        Z = zu(paction, lambdas, v, u, N)
        residuals(Z, "orbit", str(R * P0))
    rng = random.Random(seed)
    for s in range(extra_samples):
        coeffs = [rng.randrange(F.q) for _ in range(N * v.degree)]
        coeffs[0] = coeffs[0] or 1
        u = LocalElem.from_series(v, mv + rng.randrange(3), FqPoly(F, coeffs), mv + N)
        Z = zu(paction, lambdas, v, u, N)
        residuals(Z, "random", u.digit_string())
    return report


# ---------------------------------------------------------------------------
# Rank one


def intersect_rank_one(
    V: Variety,
    M: RankOneModule,
    D: int,
    max_mod_deg: int = 3,
    torsion_bound: int = 8,
    jobs: int = 1,
) -> list[tuple[tuple[RatFunc, ...], CosetStructure]]:
    """One coset structure per torsion element gamma, for (V - gamma) meet Gamma_1."""
    if D < 1:
        raise ValueError("D must be >= 1")
    cm = M.free_generator
    action = cm.action
    if all(torsion_status(mod, x, torsion_bound)[0] == TORSION for mod, x in zip(action.modules, cm.generator)):
        raise ValueError("free generator is torsion in every coordinate")
    try:
        elems = torsion_subgroup(action, M.torsion_generators, torsion_bound)
    except ValueError as exc:
        raise ValueError("unverified torsion generator") from exc
    out = []
    for gamma in elems:
        Vg = translate_by(V, gamma)
        S = intersect(Vg, cm, D, jobs)
        out.append((gamma, infer_cosets(S, D, effective_mod_deg(max_mod_deg, D), cm.F)))
    return out
