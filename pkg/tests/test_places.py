from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from dlang.algebra import FqPoly, RatFunc, get_field, irreducible_monics
from dlang.places import (
    INF,
    LocalElem,
    Place,
    PrecisionError,
    abs_value,
    embed,
    local_add,
    local_inv,
    local_mul,
    local_scale,
    product_formula_check,
    product_formula_terms,
    valuation,
)
from strategies import SMALL_FIELDS, fields, polys, ratfuncs

F2 = get_field(2)
t = RatFunc.t(F2)
one = RatFunc.one(F2)
PI2 = FqPoly(F2, [1, 1, 1])


def places_of(F):
    return st.sampled_from([Place.infinite(F)] + [Place(F, pi) for d in (1, 2) for pi in irreducible_monics(F, d)])


def test_place_validation():
    with pytest.raises(ValueError):
        Place(F2, FqPoly(F2, [1, 0, 1]))
    assert Place(F2, PI2).degree == 2
    assert Place.infinite(F2).degree == 1
    assert str(Place.infinite(F2)) == "inf"


def test_valuation_examples():
    assert valuation(Place.infinite(F2), t) == -1
    assert valuation(Place(F2, F2.t), t**3 / (t + one)) == 3
    assert valuation(Place(F2, PI2), t / (t + one)) == 0
    assert valuation(Place(F2, F2.t), RatFunc.zero(F2)) == INF


@given(fields(SMALL_FIELDS), st.data())
def test_valuation_laws(F, data):
    v = data.draw(places_of(F))
    x = data.draw(ratfuncs(F, 4, nonzero=True))
    y = data.draw(ratfuncs(F, 4, nonzero=True))
    assert valuation(v, x * y) == valuation(v, x) + valuation(v, y)
    if not (x + y).is_zero():
        assert valuation(v, x + y) >= min(valuation(v, x), valuation(v, y))
    if valuation(v, x) != valuation(v, y):
        assert valuation(v, x + y) == min(valuation(v, x), valuation(v, y))


def test_abs_value_examples():
    assert abs_value(Place.infinite(F2), t) == 2
    assert abs_value(Place(F2, PI2), one) == 1
    assert abs_value(Place(F2, PI2), t) == 1
    assert abs_value(Place(F2, PI2), RatFunc.from_poly(PI2)) == Fraction(1, 4)


def test_product_formula_examples():
    assert product_formula_terms(t) == {Place(F2, F2.t): 1, Place.infinite(F2): -1}
    assert product_formula_check(one)
    x = (t * t + t) / (t * t + t + one)
    assert product_formula_terms(x) == {Place(F2, F2.t): 1, Place(F2, F2.t + F2.one): 1, Place(F2, PI2): -2}
    with pytest.raises(ValueError):
        product_formula_check(RatFunc.zero(F2))


@given(fields(), st.data())
def test_product_formula_holds(F, data):
    x = data.draw(ratfuncs(F, 5, nonzero=True))
    assert product_formula_check(x)
    prod = Fraction(1)
    for v in product_formula_terms(x):
        prod *= abs_value(v, x)
    assert prod == 1


# --- completions -----------------------------------------------------------


def test_embed_examples():
    e = embed(Place(F2, F2.t), one / (one + t), 4)
    assert e.val == 0 and e.absprec == 4
    assert e.digits() == [F2.one] * 4
    assert e.digit_string() == "u^0 * (1 1 1 1) + O(u^4)"
    e = embed(Place.infinite(F2), t, 4)
    assert e.val == -1 and e.digits()[0] == F2.one
    e = embed(Place(F2, PI2), RatFunc.from_poly(PI2), 3)
    assert e.val == 1 and e.digits() == [F2.one, F2.zero, F2.zero]


@given(fields(SMALL_FIELDS), st.data())
def test_embed_is_a_ring_homomorphism(F, data):
    v = data.draw(places_of(F))
    x = data.draw(ratfuncs(F, 3))
    y = data.draw(ratfuncs(F, 3))
    N = 12
    ex, ey = embed(v, x, N), embed(v, y, N)
    assert (embed(v, x + y, N) - (ex + ey)).is_zero()
    assert (embed(v, x * y, N) - ex * ey).is_zero()


@given(fields(SMALL_FIELDS), st.data())
def test_embed_round_trip_for_integral_polynomials(F, data):
    f = data.draw(polys(F, 5))
    v = Place(F, F.t + F.one)
    assert embed(v, RatFunc.from_poly(f), 8).to_ratfunc() == RatFunc.from_poly(f)


def test_precision_propagation():
    v = Place(F2, F2.t)
    a = embed(v, t, 5)  # val 1, absprec 6
    b = embed(v, one + t, 3)  # val 0, absprec 3
    assert (a * b).absprec == min(a.absprec + b.val, b.absprec + a.val) == 4
    assert (a + b).absprec == 3
    assert local_mul(a, b).val == a.val + b.val


def test_local_identities():
    v = Place(F2, PI2)
    a = embed(v, t / (t + one), 10)
    zero = LocalElem.exact_zero(v)
    assert local_add(a, zero) == a
    inv = local_inv(embed(v, one + t, 10))
    assert (inv * embed(v, one / (one + t), 10) - embed(v, one / (one + t) ** 2, 10)).is_zero()
    prod = embed(v, one / (one + t), 10) * embed(v, one + t, 10)
    assert (prod - embed(v, one, 10)).is_zero()
    assert (local_scale(a, t) - embed(v, t * t / (t + one), 10)).is_zero()


def test_inverting_zero_to_precision_fails():
    with pytest.raises(PrecisionError, match="precision exhausted"):
        LocalElem.zero_to(Place(F2, F2.t), 5).inverse()


@given(fields(SMALL_FIELDS), st.data())
def test_frobenius_matches_embedding(F, data):
    v = data.draw(places_of(F))
    x = data.draw(ratfuncs(F, 3, nonzero=True))
    assume(valuation(v, x) >= 0)
    e = embed(v, x, 6)
    assert (e.frobenius(1) - embed(v, x.frobenius(1), 6 * F.q)).is_zero()
