import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlang.algebra import FqPoly, RatFunc, get_field
from dlang.analytic import (
    BallError,
    act_local,
    ball,
    common_ball,
    compose_truncated,
    eval_exp,
    eval_log,
    exp_coeffs,
    isolated_zero_bound,
    lambda_at,
    log_coeffs,
    newton_polygon,
    normalize_lead,
    same_ratio_check,
    same_ratio_report,
    terms_for,
    zu,
)
from dlang.mordell import CyclicModule, find_witness
from dlang.places import LocalElem, Place, PrecisionError, embed, local_scale
from dlang.twisted import DrinfeldModule, ProductAction, TwistedPoly
from oracles import coefficient_matching
from strategies import SMALL_FIELDS, fields, modules, polys

F2 = get_field(2)
F3 = get_field(3)
C2 = DrinfeldModule.carlitz(F2)
C3 = DrinfeldModule.carlitz(F3)
t2 = RatFunc.t(F2)
one2 = RatFunc.one(F2)
V1 = Place(F2, F2.t + F2.one)


def residual(d: LocalElem):
    return d.absprec if d.is_zero() else d.val


def admissible_witness(mods, xs, v, N):
    cm = CyclicModule(ProductAction(mods), tuple(xs))
    _, b = common_ball(mods, v, N)
    return find_witness(cm, F2.one if v.F is F2 else v.F.one, v, b.min_valuation)


def in_ball(v, b, F, rnd_coeffs, shift=0, N=40):
    coeffs = list(rnd_coeffs) + [0] * (N * v.degree)
    coeffs = coeffs[: N * v.degree]
    coeffs[0] = coeffs[0] or 1
    val = b.min_valuation + shift
    return LocalElem.from_series(v, val, FqPoly(F, coeffs), val + N)


# --- coefficients ----------------------------------------------------------


def test_carlitz_coefficients_q2():
    e, l_ = exp_coeffs(C2, 3), log_coeffs(C2, 3)
    assert [str(c) for c in e.coeffs] == [
        "1",
        "1/(t^2 + t)",
        "1/(t^8 + t^6 + t^5 + t^3)",
        "1/(t^24 + t^20 + t^18 + t^17 + t^14 + t^13 + t^11 + t^7)",
    ]
    assert [str(c) for c in l_.coeffs][:3] == ["1", "1/(t^2 + t)", "1/(t^6 + t^5 + t^3 + t^2)"]


def test_carlitz_coefficients_q3_fix_the_sign():
    t = RatFunc.t(F3)
    e, l_ = exp_coeffs(C3, 2), log_coeffs(C3, 2)
    assert e.coeffs[1] == RatFunc.one(F3) / (t**3 - t)
    assert l_.coeffs[1] == RatFunc.one(F3) / (t - t**3)
    assert e.coeffs[2] == RatFunc.one(F3) / ((t**3 - t) ** 3 * (t**9 - t))
    assert str(l_.coeffs[1]) == "2/(t^3 + 2*t)"


def test_series_reject_negative_order():
    with pytest.raises(ValueError):
        exp_coeffs(C2, -1)
    with pytest.raises(ValueError):
        log_coeffs(C2, -1)


@settings(max_examples=20)
@given(fields(SMALL_FIELDS), st.data())
def test_recursion_matches_coefficient_matching(F, data):
    m = data.draw(modules(F))
    assert list(exp_coeffs(m, 6).coeffs) == coefficient_matching(m, 6, "exp")
    assert list(log_coeffs(m, 6).coeffs) == coefficient_matching(m, 6, "log")


@settings(max_examples=20)
@given(fields(SMALL_FIELDS), st.data())
def test_exp_and_log_are_inverse(F, data):
    m = data.draw(modules(F))
    N = 6
    one = TwistedPoly.constant(RatFunc.one(F))
    assert compose_truncated(exp_coeffs(m, N), log_coeffs(m, N), N) == one
    assert compose_truncated(log_coeffs(m, N), exp_coeffs(m, N), N) == one


# --- balls -----------------------------------------------------------------


def test_ball_examples():
    assert ball(C2, Place(F2, F2.t), 0).min_valuation == 1
    assert ball(C2, Place(F2, F2.t), 1).min_valuation == 2
    assert ball(C2, Place(F2, F2.t), 6).min_valuation == 2
    assert ball(C2, V1, 6).min_valuation == 2
    b = ball(C2, Place.infinite(F2), 4)
    assert b.min_valuation == 1 and b.caveat is not None
    assert terms_for(C2, V1, 40) == 6


def test_ball_needs_good_reduction():
    m = DrinfeldModule.from_coeffs(F2, [one2 / t2])
    with pytest.raises(BallError, match="bad reduction"):
        ball(m, Place(F2, F2.t), 3)


def test_eval_basics():
    _, b = common_ball([C2], V1, 40)
    e = exp_coeffs(C2, b.order)
    assert eval_exp(e, b, LocalElem.exact_zero(V1)).is_exact_zero()
    with pytest.raises(BallError, match="outside convergence ball"):
        eval_exp(e, b, embed(V1, one2, 40))
    with pytest.raises(ValueError):
        eval_log(e, b, embed(V1, one2, 40))


@pytest.mark.parametrize("m", [C2, DrinfeldModule.from_coeffs(F2, [t2 + one2, one2])], ids=["carlitz", "rank2"])
@pytest.mark.parametrize("v", [Place(F2, F2.t), V1, Place(F2, FqPoly(F2, [1, 1, 1]))], ids=str)
def test_isometry(m, v):
    series, b = common_ball([m], v, 40)
    ls = series[0]
    for shift in range(3):
        for pattern in ([1], [1, 1], [1, 0, 1, 1], [1, 1, 0, 0, 1, 0, 1]):
            x = in_ball(v, b, F2, pattern, shift)
            assert eval_exp(ls.exp, b, x).val == x.val
            assert eval_log(ls.log, b, x).val == x.val
            ex = eval_exp(ls.exp, b, x)
            assert residual(eval_log(ls.log, b, ex) - x) >= x.val + 35


@settings(max_examples=15)
@given(fields(SMALL_FIELDS), st.data())
def test_functional_equations(F, data):
    m = data.draw(modules(F))
    v = Place(F, F.t)
    a = data.draw(polys(F, 2, nonzero=True))
    series, b = common_ball([m], v, 40)
    ls = series[0]
    pattern = data.draw(st.lists(st.integers(0, F.q - 1), min_size=1, max_size=6))
    x = in_ball(v, b, F, pattern, data.draw(st.integers(0, 2)))
    A = RatFunc.from_poly(a)
    lhs = eval_log(ls.log, b, act_local(m, a, x))
    rhs = local_scale(eval_log(ls.log, b, x), A)
    assert residual(lhs - rhs) >= x.val + 35
    lhs = eval_exp(ls.exp, b, local_scale(x, A))
    rhs = act_local(m, a, eval_exp(ls.exp, b, x))
    assert residual(lhs - rhs) >= x.val + 35


def test_functional_equation_carlitz_t_squared():
    v = Place(F2, F2.t)
    series, b = common_ball([C2], v, 40)
    x = embed(v, t2 * t2, 40)
    lhs = eval_log(series[0].log, b, act_local(C2, F2.t, x))
    rhs = local_scale(eval_log(series[0].log, b, x), t2)
    assert residual(lhs - rhs) >= 40


# --- same ratio and lambda -------------------------------------------------


def test_same_ratio_trivial_cases():
    x = t2 * t2
    W = admissible_witness([C2], [x], V1, 40)
    assert same_ratio_check(C2, C2, x, x, W, W * F2.t, V1, 40)
    assert same_ratio_check(C2, C2, x, x, W * F2.t, W * F2.t, V1, 40)


def test_same_ratio_spec_instance_leaves_the_ball():
    psi = DrinfeldModule.from_coeffs(F2, [t2])
    with pytest.raises(BallError, match="outside convergence ball"):
        same_ratio_check(C2, psi, t2 * t2, t2 * t2, F2.t, F2.t + F2.one, V1, 40)


def test_same_ratio_on_witness_multiples():
    psi = DrinfeldModule.from_coeffs(F2, [t2])
    x = t2 * t2
    W = admissible_witness([C2, psi], [x, x], V1, 40)
    rep = same_ratio_report(C2, psi, x, x, W * F2.t, W * (F2.t + F2.one), V1, 40)
    assert rep.ok and rep.agree_digits >= 30
    assert rep.min_valuation == 2


@settings(max_examples=10)
@given(st.data())
def test_same_ratio_random(data):
    F = F2
    th = data.draw(modules(F))
    ps = data.draw(modules(F))
    x = RatFunc.from_poly(data.draw(polys(F, 3, nonzero=True)))
    y = RatFunc.from_poly(data.draw(polys(F, 3, nonzero=True)))
    W = admissible_witness([th, ps], [x, y], V1, 40)
    if W is None:
        return
    P = W * data.draw(polys(F, 2, nonzero=True))
    Q = W * data.draw(polys(F, 2, nonzero=True))
    rep = same_ratio_report(th, ps, x, y, P, Q, V1, 40)
    assert rep.ok and rep.agree_digits >= 30


def test_truncation_looks_past_vanishing_coefficients():
    # phi_t = t + tau^2 has zero exp and log coefficients at every odd order
    m = DrinfeldModule.from_coeffs(F2, [RatFunc.zero(F2), one2])
    assert exp_coeffs(m, 3).coeffs[1].is_zero()
    assert terms_for(m, V1, 40) > 1
    W = admissible_witness([m, m], [t2, one2], V1, 40)
    assert same_ratio_check(m, m, t2, one2, W * F2.t, W, V1, 40)


def lambda_instance():
    psi = DrinfeldModule.from_coeffs(F2, [t2])
    A = ProductAction([C2, psi])
    pt = [t2 * t2, t2 * t2]
    W = admissible_witness([C2, psi], pt, V1, 40)
    return A, pt, W


def test_lambda_independent_of_P():
    A, pt, W = lambda_instance()
    (l1,) = lambda_at(A, pt, W, V1, 40)
    (l2,) = lambda_at(A, pt, W * F2.t, V1, 40)
    assert residual(l1 - l2) - min(l1.val, l2.val) >= 30


def test_lambda_trivial_cases():
    A = ProductAction([C2, C2])
    x = t2 * t2
    W = admissible_witness([C2], [x], V1, 40)
    (lam,) = lambda_at(A, [x, x], W, V1, 40)
    assert residual(lam - embed(V1, one2, 40)) >= 30
    (lam,) = lambda_at(A, [x, RatFunc.zero(F2)], W, V1, 40)
    assert lam.is_zero()
    with pytest.raises(ValueError, match="x_1 torsion"):
        lambda_at(A, [RatFunc.zero(F2), x], W, V1, 40)
    with pytest.raises(ValueError):
        lambda_at(A, [x, x], F2.zero, V1, 40)


def test_normalize_lead():
    a = embed(V1, (t2 + one2) ** 3, 10)
    b = embed(V1, (t2 + one2) ** 2, 10)
    assert normalize_lead([a, b]) == [1, 0]
    assert normalize_lead([a, a]) == [0, 1]
    with pytest.raises(ValueError):
        normalize_lead([LocalElem.exact_zero(V1)])


def test_zu_basics_and_errors():
    A, pt, W = lambda_instance()
    lams = lambda_at(A, pt, W, V1, 40)
    assert all(z.is_exact_zero() for z in zu(A, lams, V1, LocalElem.exact_zero(V1), 40))
    single = ProductAction([C2])
    u = embed(V1, (t2 + one2) ** 2, 40)
    assert zu(single, [], V1, u, 40) == [u]
    with pytest.raises(BallError, match="outside"):
        zu(A, lams, V1, embed(V1, t2 + one2, 40), 40)
    with pytest.raises(BallError, match="uncertified"):
        zu(A, [embed(V1, one2 / (t2 + one2), 40)], V1, u, 40)


def test_zu_additive_and_equivariant():
    A, pt, W = lambda_instance()
    lams = lambda_at(A, pt, W, V1, 40)
    _, b = common_ball(A.modules, V1, 40)
    u1 = in_ball(V1, b, F2, [1, 0, 1])
    u2 = in_ball(V1, b, F2, [1, 1], 1)
    z1, z2, z12 = zu(A, lams, V1, u1, 40), zu(A, lams, V1, u2, 40), zu(A, lams, V1, u1 + u2, 40)
    for a, b_, c in zip(z1, z2, z12):
        assert residual(a + b_ - c) >= 35
    lhs = [act_local(m, F2.t, z) for m, z in zip(A.modules, z1)]
    rhs = zu(A, lams, V1, act_local(C2, F2.t, u1), 40)
    for a, c in zip(lhs, rhs):
        assert residual(a - c) >= 35


# --- Newton polygon --------------------------------------------------------


def test_newton_polygon():
    assert newton_polygon([(0, 2), (1, 0), (2, 0)]) == [(-2, 1), (0, 1)]


def test_isolated_zero_bound_examples():
    v = Place(F2, F2.t)
    zero, one = LocalElem.exact_zero(v), embed(v, one2, 20)
    assert isolated_zero_bound([zero, one], 0) == 1
    assert isolated_zero_bound([one, one], 1) == 0
    unit = one2 + t2
    c0 = embed(v, -(t2 * t2) * unit, 20)
    assert isolated_zero_bound([c0, zero, one], 1) <= 2
    assert isolated_zero_bound([c0, zero, one], 1) == 2
    with pytest.raises(PrecisionError, match="indistinguishable from zero"):
        isolated_zero_bound([LocalElem.zero_to(v, 5), LocalElem.zero_to(v, 5)], 1)


@settings(max_examples=20)
@given(st.data())
def test_dominant_constant_term_has_no_zeros(data):
    v = Place(F2, F2.t)
    M = data.draw(st.integers(1, 6))
    mv = data.draw(st.integers(1, 3))
    b0 = embed(v, one2 / (one2 + t2 ** data.draw(st.integers(1, 3))), 20)
    rest = []
    for _ in range(M):
        k = data.draw(st.integers(0, 4))
        rest.append(embed(v, t2**k * (one2 + t2), 20))
    assert isolated_zero_bound([b0] + rest, mv) == 0
