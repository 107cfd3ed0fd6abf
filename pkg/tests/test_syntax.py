from importlib import resources

import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlang.algebra import FqPoly, RatFunc, get_field
from dlang.mordell import MPoly
from dlang.problem import BOUND_DEFAULTS, parse_place, parse_problem
from dlang.syntax import ParseError, parse_conductor, parse_mpoly, parse_poly, parse_ratfunc, parse_twisted, tokenize
from dlang.twisted import DrinfeldModule, TwistedPoly
from strategies import fields, modules, ratfuncs

F2 = get_field(2)
F3 = get_field(3)
F4 = get_field(2, 2)
t = RatFunc.t(F2)
one = RatFunc.one(F2)

FIXTURES = sorted(p.name for p in resources.files("dlang.fixtures").iterdir() if p.name.endswith(".dl"))

MINIMAL = """\
[field]
p = 2

[module.1]
phi_t = t + tau

[point]
x1 = t^2

[variety]
f1 = X1
"""


def fixture_text(name):
    return resources.files("dlang.fixtures").joinpath(name).read_text()


# --- expressions -----------------------------------------------------------


def test_tokenize_positions():
    toks = tokenize("t^2 +  tau", line=3, col=5)
    assert [(tok.text, tok.line, tok.col) for tok in toks] == [("t", 3, 5), ("^", 3, 6), ("2", 3, 7), ("+", 3, 9), ("tau", 3, 12), ("", 3, 15)]
    with pytest.raises(ParseError) as exc:
        tokenize("t $ 1")
    assert (exc.value.line, exc.value.col) == (1, 3)


def test_ratfunc_expressions():
    assert parse_ratfunc(F2, "t^2 + 1/(t+1)") == (t**3 + t * t + one) / (t + one)
    assert parse_ratfunc(F2, "(t+1)^-1") == one / (t + one)
    assert parse_ratfunc(F3, "2*t - 1") == RatFunc.from_poly(FqPoly(F3, [2, 2]))
    assert parse_ratfunc(F2, "2*t").is_zero()
    assert parse_ratfunc(F4, "g*t + g^2") == RatFunc.from_poly(FqPoly(F4, [3, 2]))


@pytest.mark.parametrize(
    "text,col,msg",
    [
        ("t/", 3, "unexpected"),
        ("x", 1, "unknown symbol"),
        ("t^5000", 3, "exponent exceeds"),
        ("(t + 1", 7, "expected '\\)'"),
        ("t + + ", 5, "unexpected"),
        ("1/(t+1-t-1)", 3, "division by zero"),
    ],
)
def test_ratfunc_errors(text, col, msg):
    with pytest.raises(ParseError, match=msg) as exc:
        parse_ratfunc(F2, text, line=7, col=1)
    assert exc.value.line == 7
    assert exc.value.col == col


def test_g_only_in_extension_fields():
    with pytest.raises(ParseError, match="unknown symbol 'g'"):
        parse_ratfunc(F2, "g + t")


def test_poly_must_be_polynomial():
    assert parse_poly(F2, "t^2+t+1") == FqPoly(F2, [1, 1, 1])
    with pytest.raises(ParseError, match="not a polynomial"):
        parse_poly(F2, "1/t")


def test_twisted_expressions():
    assert parse_twisted(F2, "t + tau") == DrinfeldModule.carlitz(F2).phi_t
    assert parse_twisted(F2, "tau*t") == TwistedPoly(F2, [RatFunc.zero(F2), t * t])
    assert parse_twisted(F2, "t + tau/t") == TwistedPoly(F2, [t, one / t])
    with pytest.raises(ParseError, match="only allowed by elements of K"):
        parse_twisted(F2, "t + t/tau")


def test_mpoly_expressions():
    X1, X2 = MPoly.var(F2, 2, 0), MPoly.var(F2, 2, 1)
    assert parse_mpoly(F2, 2, "(X1+X2)^2") == X1 * X1 + X2 * X2
    assert parse_mpoly(F2, 2, "X1*X2 + t") == X1 * X2 + MPoly.const(F2, 2, t)
    with pytest.raises(ParseError, match="unknown symbol 'X3'"):
        parse_mpoly(F2, 2, "X3")


def test_conductor():
    assert parse_conductor(2, "g^2 + g + 1") == (1, 1, 1)
    with pytest.raises(ParseError):
        parse_conductor(2, "g^2 + t")


@given(fields(), st.data())
def test_ratfunc_print_parse_round_trip(F, data):
    x = data.draw(ratfuncs(F, 4))
    assert parse_ratfunc(F, str(x)) == x


@given(fields(), st.data())
def test_twisted_print_parse_round_trip(F, data):
    m = data.draw(modules(F))
    assert parse_twisted(F, str(m.phi_t)) == m.phi_t


# --- problem files ---------------------------------------------------------


def test_minimal_problem_gets_defaults():
    spec = parse_problem(MINIMAL)
    assert spec.F is F2 and spec.g == 1
    assert spec.point == [t * t]
    assert spec.bounds == BOUND_DEFAULTS
    assert spec.torsion is None
    assert spec.place() == parse_place(F2, "t + 1")


@pytest.mark.parametrize("name", FIXTURES)
def test_fixtures_round_trip(name):
    spec = parse_problem(fixture_text(name))
    text = spec.serialize()
    again = parse_problem(text)
    assert again.serialize() == text
    assert again.F is spec.F
    assert [m.phi_t for m in again.modules] == [m.phi_t for m in spec.modules]
    assert again.point == spec.point and again.variety == spec.variety


def test_f4_fixture():
    spec = parse_problem(fixture_text("f4_rank2.dl"))
    assert spec.F is F4 and spec.F.conductor == (1, 1, 1)
    assert spec.modules[0].rank == 2
    assert spec.bounds["place"] == "t + g"


def test_places():
    assert parse_place(F2, "inf").is_infinite
    assert parse_place(F2, "t^2 + t + 1").degree == 2
    with pytest.raises(ParseError, match="not a monic irreducible"):
        parse_place(F2, "t^2 + 1")


BAD = [
    ("[field]\np = 4\n[module.1]\nphi_t = t + tau\n", 2, 5, "not prime"),
    ("p = 2\n", 1, 1, "outside of any section"),
    ("[field]\np = 2\n[modul.1]\n", 3, 1, "unknown section"),
    ("[field]\np = 2\n[module]\n", 3, 1, "module.i"),
    ("[field]\np = 2\n[module.1]\nphi_t = 1 + tau\n", 4, 9, "constant coefficient of phi_t must be t"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[point]\nx1 = t +* 1\n", 6, 9, "unexpected"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[point]\nx1 = t\nx1 = t\n", 7, 1, "duplicate key"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[point]\nx2 = t\n", 5, 1, "x1..x1"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[bounds]\ndegree = -1\n", 6, 10, "non-negative integer"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[bounds]\nplace = t^2 + 1\n", 6, 9, "not a monic irreducible"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[bounds]\nspeed = 3\n", 6, 9, "unknown bound"),
    ("[field]\np = 2\n[module.1]\nphi_t = t + tau\n[torsion]\ngen1 = t, t\n", 6, 8, "needs 1 coordinates"),
    ("[field]\np = 2\nk = 2\nconductor = g^2 + 1\n[module.1]\nphi_t = t + tau\n", 2, 5, "not irreducible"),
    ("[module.1]\nphi_t = t + tau\n", 1, 1, "missing \\[field\\]"),
    ("[field]\np = 2\n", 1, 1, "at least one"),
]


@pytest.mark.parametrize("text,line,col,msg", BAD)
def test_problem_errors_carry_positions(text, line, col, msg):
    with pytest.raises(ParseError, match=msg) as exc:
        parse_problem(text)
    assert (exc.value.line, exc.value.col) == (line, col)
    assert str(exc.value).startswith(f"line {line}, column {col}: ")


def test_comments_and_blank_lines_are_ignored():
    text = "# header\n\n" + MINIMAL.replace("x1 = t^2", "x1 = t^2   # the generator")
    assert parse_problem(text).point == [t * t]
