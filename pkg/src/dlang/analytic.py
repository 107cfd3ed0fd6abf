"""Exponential and logarithm of a Drinfeld module at a place.

The coefficients of exp and log lie in K and do not depend on the place;
only the ball on which the series are evaluated does.  Balls are certified
by explicit valuation inequalities on the truncated series.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .algebra import FqPoly, RatFunc
from .places import INF, LocalElem, Place, PrecisionError, embed, valuation
from .twisted import DrinfeldModule, ProductAction, TwistedPoly, act, good_reduction, phi_of, tw_mul

MAX_TERMS = 12
MAX_BALL = 2**20


class BallError(ValueError):
    """A point lies outside the certified ball, or no ball can be certified."""


@dataclass(frozen=True)
class ExpLogSeries:
    kind: str
    coeffs: tuple[RatFunc, ...]
    module: DrinfeldModule = field(compare=False)

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def as_twisted(self) -> TwistedPoly:
        return TwistedPoly(self.module.F, self.coeffs)


@dataclass(frozen=True)
class ConvergenceBall:
    """{x : v(x) >= min_valuation}, certified for series truncated at order."""

    place: Place
    min_valuation: int
    order: int
    tail_increasing: bool = True
    caveat: str | None = None

    def contains(self, x: LocalElem) -> bool:
        return x.place == self.place and x.val >= self.min_valuation


# Coefficient cache, shared between threads.
_cache: dict[tuple[str, DrinfeldModule], list[RatFunc]] = {}
_cache_lock = threading.Lock()


def _series(kind: str, m: DrinfeldModule, N: int) -> list[RatFunc]:
    key = (kind, m)
    with _cache_lock:
        coeffs = list(_cache.get(key, []))
    F = m.F
    t = RatFunc.t(F)
    if not coeffs:
        coeffs = [RatFunc.one(F)]
    r = m.rank
    for n in range(len(coeffs), N + 1):
        tq = t.frobenius(n)
        acc = RatFunc.zero(F)
        if kind == "exp":
            for j in range(1, min(r, n) + 1):
                a = m.a(j)
                if not a.is_zero() and not coeffs[n - j].is_zero():
                    acc = acc + a * coeffs[n - j].frobenius(j)
            coeffs.append(acc / (tq - t))
        else:
            for i in range(max(0, n - r), n):
                a = m.a(n - i)
                if not a.is_zero() and not coeffs[i].is_zero():
                    acc = acc + coeffs[i] * a.frobenius(i)
            coeffs.append(acc / (t - tq))
    with _cache_lock:
        if len(_cache.get(key, [])) < len(coeffs):
            _cache[key] = coeffs
    return coeffs[: N + 1]


def exp_coeffs(m: DrinfeldModule, N: int) -> ExpLogSeries:
    """e_0..e_N from e_n (t^(q^n) - t) = sum_{j=1}^{min(r,n)} a_j e_{n-j}^(q^j)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return ExpLogSeries("exp", tuple(_series("exp", m, N)), m)


def log_coeffs(m: DrinfeldModule, N: int) -> ExpLogSeries:
    """l_0..l_N from l_n (t - t^(q^n)) = sum_{i<n} l_i a_{n-i}^(q^i)."""
    if N < 0:
        raise ValueError("N must be >= 0")
    return ExpLogSeries("log", tuple(_series("log", m, N)), m)


def compose_truncated(outer: ExpLogSeries | TwistedPoly, inner: ExpLogSeries | TwistedPoly, N: int) -> TwistedPoly:
    """outer o inner as twisted series, truncated mod tau^(N+1)."""
    a = outer.as_twisted() if isinstance(outer, ExpLogSeries) else outer
    b = inner.as_twisted() if isinstance(inner, ExpLogSeries) else inner
    return tw_mul(a, b, N)


# ---------------------------------------------------------------------------
# Balls


def _term_bounds(vals: Sequence, q: int) -> Fraction:
    """Smallest real lower bound on m from the isometry inequalities."""
    bound = Fraction(0)
    prev = None
    for n, w in enumerate(vals):
        if w == INF:
            continue
        if n >= 1:
            # w + q^n m > m
            bound = max(bound, Fraction(-w, q**n - 1))
        if prev is not None:
            pn, pw = prev
            # w + q^n m > pw + q^pn m
            bound = max(bound, Fraction(pw - w, q**n - q**pn))
        prev = (n, w)
    return bound


def _min_integer_above(bound: Fraction) -> int:
    return max(1, math.floor(bound) + 1)


def _tail_increasing(vals: Sequence, q: int, m: int) -> bool:
    terms = [w + q**n * m for n, w in enumerate(vals) if w != INF]
    last = terms[-3:]
    return all(b > a for a, b in zip(last, last[1:]))


@functools.lru_cache(maxsize=4096)
def _coeff_valuation(kind: str, m: DrinfeldModule, v: Place, n: int):
    return valuation(v, _series(kind, m, n)[n])


@functools.lru_cache(maxsize=1024)
def ball(m: DrinfeldModule, v: Place, N: int) -> ConvergenceBall:
    """Minimal certified ball v(x) >= m for the exp and log series at order N."""
    caveat = None
    if v.is_infinite:
        caveat = "infinite place: bad reduction, ball certified from series valuations only"
    elif not good_reduction(m, v):
        raise BallError(f"module has bad reduction at {v}")
    q = m.q
    exp_vals = [_coeff_valuation("exp", m, v, n) for n in range(N + 1)]
    log_vals = [_coeff_valuation("log", m, v, n) for n in range(N + 1)]
    bound = max(_term_bounds(exp_vals, q), _term_bounds(log_vals, q))
    mv = _min_integer_above(bound)
    if mv > MAX_BALL:
        raise BallError("no certified ball at this truncation")
    tail = _tail_increasing(exp_vals, q, mv) and _tail_increasing(log_vals, q, mv)
    return ConvergenceBall(v, mv, N, tail, caveat)


def terms_for(m: DrinfeldModule, v: Place, precision: int, min_val: int | None = None) -> int:
    """Smallest truncation order whose last term lies beyond the precision.

    Capped at MAX_TERMS; the certified ball is recomputed for each order.
    """
    q = m.q
    for N in range(1, MAX_TERMS + 1):
        mv = ball(m, v, N).min_valuation if min_val is None else min_val
        ok = True
        for kind in ("exp", "log"):
            # zero coefficients say nothing about the tail; use the last nonzero one
            n = _last_nonzero(kind, m, v, N)
            if n == 0 or _coeff_valuation(kind, m, v, n) + q**n * mv < mv + precision:
                ok = False
        if ok:
            return N
    return MAX_TERMS


def _last_nonzero(kind: str, m: DrinfeldModule, v: Place, N: int) -> int:
    for n in range(N, 0, -1):
        if _coeff_valuation(kind, m, v, n) != INF:
            return n
    return 0


@dataclass(frozen=True)
class LocalSeries:
    """exp, log and a ball for one module at one place and precision."""

    module: DrinfeldModule
    exp: ExpLogSeries
    log: ExpLogSeries
    ball: ConvergenceBall


def common_ball(modules: Sequence[DrinfeldModule], v: Place, precision: int) -> tuple[list[LocalSeries], ConvergenceBall]:
    """Series for each module and one ball valid for all of them."""
    mv = 1
    for mod in modules:
        N = terms_for(mod, v, precision)
        mv = max(mv, ball(mod, v, N).min_valuation)
    out = []
    for mod in modules:
        N = terms_for(mod, v, precision, mv)
        b = ball(mod, v, N)
        if b.min_valuation > mv:
            mv = b.min_valuation
        out.append(LocalSeries(mod, exp_coeffs(mod, N), log_coeffs(mod, N), b))
    order = min(s.exp.N for s in out)
    tail = all(s.ball.tail_increasing for s in out)
    return out, ConvergenceBall(v, mv, order, tail, out[0].ball.caveat)


# ---------------------------------------------------------------------------
# Evaluation


def _eval(s: ExpLogSeries, b: ConvergenceBall, x: LocalElem) -> LocalElem:
    if x.place != b.place:
        raise BallError("point and ball live at different places")
    v = b.place
    if x.is_exact_zero():
        return LocalElem.exact_zero(v)
    if x.val < b.min_valuation:
        raise BallError("outside convergence ball")
    if s.N < b.order:
        raise BallError("series truncated below the ball's certified order")
    if x.is_zero():
        return LocalElem.zero_to(v, x.absprec)
    q = v.F.q
    target = x.absprec
    n = max((i for i in range(1, s.N + 1) if not s.coeffs[i].is_zero()), default=0)
    if n:
        target = min(target, valuation(v, s.coeffs[n]) + q**n * x.val + 1)
    return x.truncate(target).apply_twisted(s.as_twisted()).truncate(target)


def eval_exp(s: ExpLogSeries, b: ConvergenceBall, x: LocalElem) -> LocalElem:
    """sum e_n x^(q^n) for x in the ball."""
    if s.kind != "exp":
        raise ValueError("expected an exponential series")
    return _eval(s, b, x)


def eval_log(s: ExpLogSeries, b: ConvergenceBall, x: LocalElem) -> LocalElem:
    """sum l_n x^(q^n) for x in the ball."""
    if s.kind != "log":
        raise ValueError("expected a logarithm series")
    return _eval(s, b, x)


def act_local(m: DrinfeldModule, P: FqPoly, x: LocalElem) -> LocalElem:
    """phi_P(x) for x in K_v."""
    return x.apply_twisted(phi_of(m, P))


# ---------------------------------------------------------------------------
# Same ratio, lambda invariants, Z_u


@dataclass(frozen=True)
class SameRatioReport:
    place: Place
    min_valuation: int
    precision: int
    lhs: LocalElem
    rhs: LocalElem
    agree_digits: int | float

    @property
    def ok(self) -> bool:
        return (self.lhs - self.rhs).is_zero()


def _in_ball_log(ls: LocalSeries, b: ConvergenceBall, y: RatFunc, N: int, what: str) -> LocalElem:
    v = b.place
    if y.is_zero():
        return LocalElem.exact_zero(v)
    e = embed(v, y, N)
    if e.val < b.min_valuation:
        raise BallError(f"{what} outside convergence ball (v = {e.val} < {b.min_valuation})")
    return eval_log(ls.log, b, e)


def _agree_digits(a: LocalElem, b: LocalElem):
    d = a - b
    if not d.is_zero():
        return 0
    lead = min(a.val, b.val)
    if lead == INF:
        return INF
    return d.absprec - lead


def same_ratio_report(
    theta: DrinfeldModule,
    psi: DrinfeldModule,
    x: RatFunc,
    y: RatFunc,
    P: FqPoly,
    Q: FqPoly,
    v: Place,
    N: int,
) -> SameRatioReport:
    (lt, lp), b = common_ball([theta, psi], v, N)
    a1 = _in_ball_log(lt, b, act(theta, P, x), N, "theta_P(x)")
    a2 = _in_ball_log(lp, b, act(psi, Q, y), N, "psi_Q(y)")
    b1 = _in_ball_log(lt, b, act(theta, Q, x), N, "theta_Q(x)")
    b2 = _in_ball_log(lp, b, act(psi, P, y), N, "psi_P(y)")
    lhs, rhs = a1 * a2, b1 * b2
    return SameRatioReport(v, b.min_valuation, N, lhs, rhs, _agree_digits(lhs, rhs))


def same_ratio_check(theta, psi, x, y, P, Q, v, N) -> bool:
    """log_theta(theta_P x) log_psi(psi_Q y) == log_theta(theta_Q x) log_psi(psi_P y)."""
    return same_ratio_report(theta, psi, x, y, P, Q, v, N).ok


def normalize_lead(logs: Sequence[LocalElem]) -> list[int]:
    """Permutation putting first the coordinate whose log has the largest
    absolute value (smallest valuation); ties go to the smaller index."""
    candidates = [i for i, L in enumerate(logs) if not L.is_zero()]
    if not candidates:
        raise ValueError("all coordinates are torsion")
    lead = min(candidates, key=lambda i: (logs[i].val, i))
    return [lead] + [i for i in range(len(logs)) if i != lead]


def orbit_logs(action: ProductAction, point: Sequence[RatFunc], P: FqPoly, v: Place, N: int):
    """log_i((phi_i)_P(x_i)) for every coordinate, plus the series used."""
    series, b = common_ball(action.modules, v, N)
    logs = [
        _in_ball_log(ls, b, act(ls.module, P, xi), N, f"coordinate {i + 1} of phi_P(x)")
        for i, (ls, xi) in enumerate(zip(series, point))
    ]
    return logs, series, b


def lambda_at(action: ProductAction, point: Sequence[RatFunc], P: FqPoly, v: Place, N: int) -> list[LocalElem]:
    """lambda_i = log_i(phi_P x_i) / log_1(phi_P x_1) for i = 2..g."""
    if P.is_zero():
        raise ValueError("P must be nonzero")
    logs, _, _ = orbit_logs(action, point, P, v, N)
    if logs[0].is_exact_zero() or logs[0].is_zero():
        raise ValueError("λ undefined: x_1 torsion")
    inv = logs[0].inverse()
    return [L * inv for L in logs[1:]]


def zu(action: ProductAction, lambdas: Sequence[LocalElem], v: Place, u: LocalElem, N: int | None = None) -> list[LocalElem]:
    """Z_u = (u, exp_2(lambda_2 log_1 u), ..., exp_g(lambda_g log_1 u))."""
    if len(lambdas) != action.g - 1:
        raise ValueError("need g - 1 lambda values")
    if N is None:
        N = int(u.relprec) if not u.is_exact_zero() else 1
    series, b = common_ball(action.modules, v, N)
    if u.is_exact_zero():
        return [LocalElem.exact_zero(v) for _ in range(action.g)]
    if u.val < b.min_valuation:
        raise BallError("outside convergence ball")
    for lam in lambdas:
        if not lam.is_exact_zero() and lam.val < 0:
            raise BallError("uncertified λ magnitude")
    L = eval_log(series[0].log, b, u)
    out = [u]
    for ls, lam in zip(series[1:], lambdas):
        out.append(eval_exp(ls.exp, b, lam * L))
    return out


# ---------------------------------------------------------------------------
# Newton polygon


def _coeff_point(b) -> tuple[int | float, bool]:
    """(valuation or lower bound, known nonzero)."""
    if isinstance(b, LocalElem):
        if b.is_exact_zero():
            return INF, False
        if b.is_zero():
            return b.absprec, False
        return b.val, True
    if isinstance(b, tuple):
        return b
    raise TypeError("coefficients must be LocalElem values")


def newton_polygon(points: Sequence[tuple[int, int]]) -> list[tuple[Fraction, int]]:
    """Lower convex hull of (i, w_i) as (slope, horizontal length) pairs."""
    pts = sorted(points)
    hull: list[tuple[int, int]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return [(Fraction(y2 - y1, x2 - x1), x2 - x1) for (x1, y1), (x2, y2) in zip(hull, hull[1:])]


def isolated_zero_bound(coeffs: Sequence, min_val: int) -> int:
    """Upper bound on zeros z with v(z) >= min_val of sum b_i z^i.

    This is the length of the Newton polygon over slopes <= -min_val plus
    the order of vanishing at 0.  Coefficients known only to be zero to
    their precision are placed at their precision, which keeps the count an
    upper bound.
    """
    pts = [(i, *_coeff_point(b)) for i, b in enumerate(coeffs)]
    known = [(i, w) for i, w, nz in pts if nz]
    if not known:
        raise PrecisionError("series indistinguishable from zero")
    best = min(w + i * min_val for i, w in known)
    count = 0
    for i, w, _ in pts:
        if w != INF and w + i * min_val <= best:
            count = max(count, i)
    return count
