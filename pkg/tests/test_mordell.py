import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dlang.algebra import RatFunc, enumerate_polys, get_field
from dlang.mordell import (
    CosetStructure,
    CyclicModule,
    MPoly,
    RankOneModule,
    VerificationError,
    Variety,
    infer_cosets,
    intersect,
    intersect_and_infer,
    intersect_rank_one,
    orbit,
    translate_by,
    verify_coset_analytic,
)
from dlang.places import INF, Place, embed
from dlang.twisted import DrinfeldModule, ProductAction, act
from oracles import brute_S
from strategies import SMALL_FIELDS, fields, modules, polys

F2 = get_field(2)
C2 = DrinfeldModule.carlitz(F2)
t = RatFunc.t(F2)
one = RatFunc.one(F2)
zero = RatFunc.zero(F2)
V1 = Place(F2, F2.t + F2.one)
PAIR = ProductAction([C2, C2])


def X(i, g=2, F=F2):
    return MPoly.var(F, g, i)


# --- polynomials and varieties ---------------------------------------------


def test_mpoly_basics():
    X1, X2 = X(0), X(1)
    assert str(X1 - X2) == "X1 + X2"  # char 2
    assert str(X1 * X1) == "X1^2"
    assert (X1 * X2).total_degree() == 2
    assert (X1 + X2).evaluate([t, one]) == t + one
    with pytest.raises(ValueError):
        MPoly.var(F2, 2, 2)


def test_variety_needs_a_polynomial():
    with pytest.raises(ValueError):
        Variety(2, ())


# --- orbits ----------------------------------------------------------------


def test_orbit_examples():
    cm = CyclicModule(PAIR, (t * t, t))
    assert list(orbit(cm, 1)) == [(F2.zero, (zero, zero)), (F2.one, (t * t, t))]
    one_dim = CyclicModule(ProductAction([C2]), (one,))
    assert [pt[0] for _, pt in orbit(one_dim, 2)] == [zero, one, t + one, t]


@settings(max_examples=15)
@given(fields(SMALL_FIELDS), st.data())
def test_orbit_matches_action(F, data):
    m = data.draw(modules(F, max_deg=1))
    x = RatFunc.from_poly(data.draw(polys(F, 2)))
    cm = CyclicModule(ProductAction([m]), (x,))
    for P, pt in orbit(cm, 3):
        assert pt == (act(m, P, x),)


# --- intersections ---------------------------------------------------------


def test_intersect_diagonal_is_everything():
    cm = CyclicModule(PAIR, (t * t + one, t * t + one))
    V = Variety(2, (X(0) - X(1),))
    assert intersect(V, cm, 4) == list(enumerate_polys(F2, 3))


def test_intersect_carlitz_torsion_coordinate():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    S = intersect(V, cm, 5)
    assert S == [P for P in enumerate_polys(F2, 4) if (P % F2.t).is_zero()]
    assert S == brute_S(V, cm, 5)


def test_intersect_value_outside_orbit():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(0) - MPoly.const(F2, 2, t**3 + one),))
    assert intersect(V, cm, 5) == []


def test_intersect_dimension_mismatch():
    cm = CyclicModule(PAIR, (t, t))
    with pytest.raises(ValueError):
        intersect(Variety(1, (X(0, 1),)), cm, 3)


@settings(max_examples=15)
@given(st.data())
def test_intersect_matches_bruteforce(data):
    m1 = data.draw(modules(F2, max_deg=1))
    m2 = data.draw(modules(F2, max_deg=1))
    x = tuple(RatFunc.from_poly(data.draw(polys(F2, 2))) for _ in range(2))
    cm = CyclicModule(ProductAction([m1, m2]), x)
    c = RatFunc.from_poly(data.draw(polys(F2, 1)))
    f = data.draw(st.sampled_from([X(0) - X(1), X(0) * X(1), X(1) + MPoly.const(F2, 2, c)]))
    V = Variety(2, (f,))
    assert intersect(V, cm, 4) == brute_S(V, cm, 4)


def test_parallel_intersection_is_identical():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    assert intersect(V, cm, 6, jobs=3) == intersect(V, cm, 6)


# --- coset inference -------------------------------------------------------


def test_infer_cosets_examples():
    allP = list(enumerate_polys(F2, 3))
    st_all = infer_cosets(allP, 4, 2, F2)
    assert st_all.cosets == ((F2.zero, F2.one),) and st_all.isolated == ()
    mult_t = [P for P in enumerate_polys(F2, 4) if (P % F2.t).is_zero()]
    st_t = infer_cosets(mult_t, 5, 3, F2)
    assert st_t.cosets == ((F2.zero, F2.t),) and st_t.isolated == ()
    single = infer_cosets([F2.t], 5, 3, F2)
    assert single.cosets == () and single.isolated == (F2.t,)
    assert infer_cosets([], 3, 2, F2) == CosetStructure((), (), 3, 2)


def test_infer_cosets_rejects_unsupported_modulus():
    with pytest.raises(ValueError, match="modulus exceeds evidence"):
        infer_cosets([], 3, 3, F2)


@settings(max_examples=30)
@given(fields(SMALL_FIELDS), st.data())
def test_inference_reexpands_to_S(F, data):
    D = data.draw(st.integers(1, 3))
    universe = list(enumerate_polys(F, D - 1))
    S = sorted(data.draw(st.sets(st.sampled_from(universe))))
    sc = infer_cosets(S, D, D - 1, F)
    assert sc.members(F, D) == S
    for P in sc.isolated:
        assert not any(((P - d) % Q).is_zero() for d, Q in sc.cosets)
    for d, Q in sc.cosets:
        assert Q.is_monic() and (d.is_zero() or d.degree < max(Q.degree, 1))


def test_intersect_and_infer_stability():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    r = intersect_and_infer(V, cm, 6, 3)
    assert r.stable and r.structure.cosets == ((F2.zero, F2.t),)
    assert r.structure.isolated == ()
    assert list(r.S) == brute_S(V, cm, 6)


# --- translation -----------------------------------------------------------


def test_translate_examples():
    V = Variety(2, (X(0) - X(1),))
    assert translate_by(V, (zero, zero)) == V
    a, b = t + one, t * t
    (f,) = translate_by(V, (a, b)).polys
    assert f == X(0) - X(1) + MPoly.const(F2, 2, a - b)
    (sq,) = translate_by(Variety(1, (X(0, 1) ** 2,)), (t,)).polys
    assert str(sq) == "X1^2 + t^2"
    with pytest.raises(ValueError):
        translate_by(V, (zero,))


@settings(max_examples=15)
@given(st.data())
def test_translation_coherence(data):
    cm = CyclicModule(ProductAction([C2, DrinfeldModule.from_coeffs(F2, [t])]), (t * t, t + one))
    V = Variety(2, (X(0) * X(1) + X(1), X(0) ** 2 - X(1)))
    P = data.draw(polys(F2, 3))
    shifted = translate_by(V, cm.point(P))
    assert V.contains(cm.point(P)) == shifted.contains((zero, zero))


# --- analytic verification -------------------------------------------------


def residual_floor_ok(rep):
    return all(v >= rep.floor for s in rep.samples for v in s.valuations)


def test_verify_diagonal():
    m = DrinfeldModule.from_coeffs(F2, [t * t + t + one, one])
    cm = CyclicModule(ProductAction([m, m]), (t**3 + one, t**3 + one))
    V = Variety(2, (X(0) - X(1),))
    rep = verify_coset_analytic(V, cm, (F2.zero, F2.one), V1, 40, 5)
    assert rep.ok and len(rep.samples) == 10
    (lam,) = rep.lambdas
    assert (lam - embed(V1, one, 40)).is_zero()
    # Z_u passes through exp o log, so vanishing holds to precision only
    assert residual_floor_ok(rep)


def test_verify_torsion_coordinate():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    rep = verify_coset_analytic(V, cm, (F2.zero, F2.t), V1, 40, 5)
    assert rep.ok
    assert rep.witness == F2.t**2 + F2.t
    assert [lam.is_zero() for lam in rep.lambdas] == [True]
    assert all(s.valuations == [INF] for s in rep.samples)


def test_verify_flags_a_wrong_coset():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    rep = verify_coset_analytic(V, cm, (F2.one, F2.t), V1, 40, 5)
    assert not rep.ok
    assert all(s.valuations == [0] for s in rep.samples)


def test_verify_preconditions():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    with pytest.raises(VerificationError, match="finite place"):
        verify_coset_analytic(V, cm, (F2.zero, F2.t), Place.infinite(F2), 40)
    bad = CyclicModule(PAIR, (one / (t + one), t))
    with pytest.raises(VerificationError, match="not integral"):
        verify_coset_analytic(V, bad, (F2.zero, F2.t), V1, 40)
    rough = DrinfeldModule.from_coeffs(F2, [one / (t + one)])
    with pytest.raises(VerificationError, match="bad reduction"):
        verify_coset_analytic(V, CyclicModule(ProductAction([rough, C2]), (t, t)), (F2.zero, F2.t), V1, 40)


# --- rank one --------------------------------------------------------------


def test_rank_one_without_torsion_matches_cyclic():
    cm = CyclicModule(PAIR, (t * t, t))
    V = Variety(2, (X(1),))
    (entry,) = intersect_rank_one(V, RankOneModule((), cm), 5)
    assert entry[0] == (zero, zero)
    assert entry[1] == infer_cosets(intersect(V, cm, 5), 5, 3, F2)


def test_rank_one_carlitz_torsion():
    cm = CyclicModule(PAIR, (t * t, zero))
    V = Variety(2, (X(1) - MPoly.const(F2, 2, t),))
    out = intersect_rank_one(V, RankOneModule(((zero, t),), cm), 4)
    assert [g for g, _ in out] == [(zero, zero), (zero, t)]
    assert out[0][1].cosets == () and out[0][1].isolated == ()
    assert out[1][1].cosets == ((F2.zero, F2.one),)


def test_rank_one_no_solutions():
    cm = CyclicModule(PAIR, (t * t, zero))
    V = Variety(2, (X(1) - MPoly.const(F2, 2, t**3),))
    out = intersect_rank_one(V, RankOneModule(((zero, t),), cm), 4)
    assert all(not s.cosets and not s.isolated for _, s in out)


def test_rank_one_errors():
    V = Variety(2, (X(1),))
    with pytest.raises(ValueError, match="unverified torsion generator"):
        intersect_rank_one(V, RankOneModule(((t * t, zero),), CyclicModule(PAIR, (t * t, zero))), 4)
    with pytest.raises(ValueError, match="torsion in every coordinate"):
        intersect_rank_one(V, RankOneModule((), CyclicModule(PAIR, (one, t))), 4)
    with pytest.raises(ValueError):
        intersect_rank_one(V, RankOneModule((), CyclicModule(PAIR, (t * t, t))), 0)
