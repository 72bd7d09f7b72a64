from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from liesym.errors import (
    DerivativeOrderExceeded, DomainError, MalformedExpression, ProbableZero, UnboundSymbol,
)
from liesym.expr import (
    ONE, ZERO, Rational, add, collect, eval_numeric, exp, is_zero, ln, mul, normalize, parse, partial_diff,
    power, substitute, symbol, to_string, total_diff_t, total_diff_x, unknown,
)

P = parse


# ---------------------------------------------------------------- canonical form

@pytest.mark.parametrize("raw, expected", [
    ("u_x + u_x", "2*u_x"),
    ("exp(k2*u)*exp(-k2*u)", "1"),
    ("(x*u_x)*(1/x)", "u_x"),
    ("x^1", "x"),
    ("x^0", "1"),
    ("exp(0)", "1"),
    ("ln(1)", "0"),
    ("3/6*x", "1/2*x"),
])
def test_normalize_examples(raw, expected):
    assert P(raw) == P(expected)
    assert to_string(P(raw)) == to_string(P(expected))


def test_no_nested_sums_and_merged_coefficients():
    e = P("(x + (u + x)) + 2*(u + 1)")
    assert e == P("2*x + 3*u + 2")


def test_exp_of_log_becomes_power():
    assert P("exp(2*ln(x))") == P("x^2")
    assert P("exp(k2*ln(x) + t)") == mul(power(symbol("x"), symbol("k2")), exp(symbol("t")))


def test_common_factor_pulled_out_of_negative_power():
    e = P("((k4 - k2)*x)^(-1)")
    assert symbol("x") not in P("(k4 - k2)^(-1)").free_symbols()
    assert is_zero(add(e, mul(-1, P("x^(-1)"), P("(k4 - k2)^(-1)"))))


def test_rational_roots_are_exact():
    assert P("4^(1/2)") == Rational(2)
    assert P("(9/4)^(-1/2)") == Rational(Fraction(2, 3))


@pytest.mark.parametrize("text", [
    "x +", "1/0", "ln(0)", "0^(-1)", "foo(x)", "x*)", "bogus",
])
def test_malformed(text):
    with pytest.raises(MalformedExpression):
        P(text)


@pytest.mark.parametrize("text", [
    "u_t - k5 - k1*k2*exp(k2*u)*u_x^2 - k1*exp(k2*u)*u_xx - k1*x^(-1)*exp(k2*u)*u_x",
    "tau_t(t) + xi_xx(x,t) - 3/4*eta_uu",
    "h^(k2^(-1)*k4) + z*h_zz - p_z",
    "(1 + x)^(-1/2)*exp(-t)",
    "ln(c1 + c2*ln(x))",
])
def test_round_trip(text):
    e = P(text)
    assert P(to_string(e)) == e


# ---------------------------------------------------------------- calculus

def test_partial_diff_examples():
    assert partial_diff(P("x*u_x"), "x") == P("u_x")
    assert partial_diff(unknown("xi", signature=("x", "t")), "u") == ZERO
    assert partial_diff(P("exp(k2*u)"), "u") == P("k2*exp(k2*u)")
    assert partial_diff(P("f"), "u") == P("f_u")
    assert partial_diff(P("ln(x)"), "x") == P("1/x")


def test_mixed_partials_commute():
    xi = unknown("xi")
    assert partial_diff(partial_diff(xi, "x"), "t") == partial_diff(partial_diff(xi, "t"), "x")


def test_derivative_order_cap():
    with pytest.raises(DerivativeOrderExceeded):
        partial_diff(P("xi_xxx"), "x")


def test_total_derivatives():
    assert total_diff_x(P("u")) == P("u_x")
    expected = P("g*u_x + x*g_u*u_x^2 + x*g*u_xx")
    assert total_diff_x(P("x*g*u_x")) == expected
    assert total_diff_t(unknown("xi", signature=("x", "t"))) == unknown("xi", "t", signature=("x", "t"))
    with pytest.raises(DerivativeOrderExceeded):
        total_diff_x(P("u_xx"))


def test_substitute_examples():
    assert substitute(P("u_t + u_x"), P("u_t"), P("f")) == P("f + u_x")
    assert substitute(P("u_x*u_t"), P("u_t"), P("g*u_xx")) == P("g*u_x*u_xx")
    assert substitute(P("exp(k2*u)"), P("u"), ZERO) == ONE


def test_collect_examples():
    coeffs, rem = collect(P("k1*u_x^2 + k2*u_x*u_xx + k3*u_x^2"), [P("u_x^2"), P("u_x*u_xx")])
    assert coeffs[P("u_x^2")] == P("k1 + k3")
    assert coeffs[P("u_x*u_xx")] == P("k2")
    assert rem == ZERO
    coeffs, rem = collect(P("x + u"), [P("u_x")])
    assert coeffs[P("u_x")] == ZERO
    assert rem == P("x + u")


def test_is_zero_examples():
    assert is_zero(P("exp(k2*u)*exp(-k2*u) - 1"))
    assert not is_zero(P("u_x"))
    assert is_zero(P("(u+1)^2 - u^2 - 2*u - 1"))
    assert is_zero(P("(1 + x)^(-1) - (1 + x)^(-1)"))
    assert is_zero(P("x/(x + x^2) - 1/(1 + x)"))


def test_probable_zero_is_raised_not_guessed():
    # ln(x*y)-ln(x)-ln(y) for a non-positive atom: canonical form is nonzero, every probe vanishes
    e = P("ln(u^2) - 2*ln(u)")
    try:
        verdict = is_zero(e)
    except ProbableZero:
        return
    assert verdict in (True, False)


def test_eval_numeric():
    assert eval_numeric(P("exp(0)")) == 1
    assert eval_numeric(P("x^2"), {"x": 3}) == 9
    with pytest.raises(DomainError):
        eval_numeric(P("ln(x)"), {"x": -1})
    with pytest.raises(UnboundSymbol):
        eval_numeric(P("x + t"), {"x": 1})


# ---------------------------------------------------------------- properties

ATOMS = ["x", "t", "u", "u_x", "k2", "k3", "xi", "f", "g"]
PLAIN = ["x", "t", "u", "u_x", "k2", "k3"]


@st.composite
def exprs(draw, depth=4, atoms=ATOMS):
    if depth == 0 or draw(st.integers(0, 3)) == 0:
        if draw(st.booleans()):
            return P(draw(st.sampled_from(atoms)))
        return Rational(Fraction(draw(st.integers(-5, 5)), draw(st.integers(1, 4))))
    kind = draw(st.sampled_from(["add", "mul", "exp", "pow", "ln"]))
    a = draw(exprs(depth=depth - 1, atoms=atoms))
    if kind == "add":
        return add(a, draw(exprs(depth=depth - 1, atoms=atoms)))
    if kind == "mul":
        return mul(a, draw(exprs(depth=depth - 1, atoms=atoms)))
    if kind == "exp":
        return exp(mul(Rational(Fraction(1, 3)), a))
    if kind == "pow":
        return power(a, draw(st.integers(1, 3)))
    return ln(add(P("x^2"), 1))


VARS = st.sampled_from(["x", "t", "u", "u_x"])


@settings(max_examples=60, deadline=None)
@given(exprs())
def test_normalize_idempotent(e):
    assert normalize(normalize(e)) == normalize(e)
    assert P(to_string(e)) == e


@settings(max_examples=60, deadline=None)
@given(exprs(), exprs(), VARS, st.integers(-4, 4), st.integers(1, 5))
def test_diff_linear(e1, e2, v, a, b):
    lhs = partial_diff(add(mul(a, e1), mul(Fraction(1, b), e2)), v)
    rhs = add(mul(a, partial_diff(e1, v)), mul(Fraction(1, b), partial_diff(e2, v)))
    assert is_zero(add(lhs, mul(-1, rhs)))


@settings(max_examples=60, deadline=None)
@given(exprs(), exprs(), VARS)
def test_leibniz(e1, e2, v):
    d = add(partial_diff(mul(e1, e2), v), mul(-1, e1, partial_diff(e2, v)), mul(-1, e2, partial_diff(e1, v)))
    assert is_zero(d)


@settings(max_examples=40, deadline=None)
@given(exprs(depth=3, atoms=PLAIN), st.floats(0.6, 2.5), st.floats(0.6, 2.5), st.floats(-1.5, 1.5))
def test_diff_matches_finite_difference(e, xv, tv, uv):
    b = {"x": xv, "t": tv, "u": uv, "u_x": 0.7, "k2": 0.3, "k3": -1.2}
    d = partial_diff(e, "x")
    hstep = 1e-5
    fp = float(eval_numeric(e, {**b, "x": xv + hstep}))
    fm = float(eval_numeric(e, {**b, "x": xv - hstep}))
    fd = (fp - fm) / (2 * hstep)
    exact = float(eval_numeric(d, b))
    scale = max(abs(exact), abs(fp), abs(fm), 1.0)
    assert abs(fd - exact) <= 1e-6 * scale


NO_JET = ["x", "t", "u", "k2", "k3", "xi", "f", "g"]


@settings(max_examples=60, deadline=None)
@given(st.lists(exprs(depth=3, atoms=NO_JET), min_size=4, max_size=4))
def test_collect_round_trip(cs):
    e = add(cs[0], mul(cs[1], P("u_x")), mul(cs[2], P("u_x^2")), mul(cs[3], P("u_x*u_xx")))
    monos = [P("u_x"), P("u_x^2"), P("1")]
    coeffs, rem = collect(e, monos)
    back = add(*[mul(m, c) for m, c in coeffs.items()], rem)
    assert is_zero(add(back, mul(-1, e)))
