from fractions import Fraction

import numpy as np
import pytest

from liesym.classifier import build_case
from liesym.errors import NegativeBesselArgument
from liesym.expr import add, is_zero, ln, mul, parse, substitute_function
from liesym.numerics import bessel_j0
from liesym.prolongation import VectorField
from liesym.reduction import (
    annihilates, bessel_closed_form, case_a_ode, fn, invariant_surface_check, pde_of_case, reduce_case_a,
    reduce_case_b, reduce_case_c,
)

P = parse


def same_up_to_constant(a, b, const):
    return is_zero(add(a, mul(-1, P(const), b)))


def test_pde_of_case():
    assert pde_of_case("A").f == P("k3*exp(k4*u)")
    assert pde_of_case("B").f == P("k3*exp(k2*u) + k5")
    assert pde_of_case("C").f == P("k5")
    assert pde_of_case("C").g == P("k1*exp(k2*u)")


def test_invariant_surface_examples():
    x2b = build_case("B").generators[1]
    x3c = build_case("C").generators[2]
    b_ansatz = P("k5*t + ln(p(x))/k2")
    assert invariant_surface_check(x2b, b_ansatz, P("x"))
    assert invariant_surface_check(x3c, P("ln(x^2/p(t))/k2"), P("t"))
    assert not invariant_surface_check(x3c, b_ansatz, P("x"))


def test_case_a_similarity_variable_is_invariant():
    gen = VectorField.of("(k4-k2)*x", "2*k4*t", -2)
    assert annihilates(gen, P("x^2*t^(k2/k4 - 1)"))
    assert not annihilates(gen, P("x*t"))


@pytest.mark.parametrize("k2, k4", [(1, 1), (1, 2), (2, 1), (1, 3)])
def test_case_a_factorization(k2, k4):
    sol = reduce_case_a({"k2": k2, "k4": k4})
    assert sol.verified, sol.checks
    assert set(sol.checks) >= {"generator_annihilates_z", "invariant_surface", "reduced_ode_matches",
                               "factorization_symbolic", "factorization_numeric"}


def test_case_a_symbolic_constants():
    sol = reduce_case_a()
    assert sol.verified, sol.checks
    assert is_zero(add(sol.multiplier, P("1/(k2*k4*t)")))


def test_equal_exponents_reduce_to_linear_ode():
    sol = reduce_case_a({"k2": "k", "k4": "k"})
    assert sol.verified
    target = P("4*k1*z*h_zz + 4*k1*h_z + k*k3*h + 1")
    assert same_up_to_constant(sol.reduced_ode, target, "k")


def test_doubled_exponent_reduction():
    sol = reduce_case_a({"k1": 1, "k3": 1, "k4": "2*k2"})
    assert sol.verified
    target = P("8*z*h_zz + (8 + z/h)*h_z + 2*k2*h^2 + 1")
    assert same_up_to_constant(sol.reduced_ode, target, "k2")


def test_ansatz_h1_identity():
    sol = reduce_case_a()
    h1 = mul(P("1/k2"), ln(fn("h")))
    assert is_zero(add(sol.ansatz, P("ln(t)/k4"), mul(-1, h1)))


def test_case_b_reduction():
    sol = reduce_case_b()
    assert sol.verified, sol.checks
    assert is_zero(add(sol.reduced_ode, mul(-1, P("k1*z*p_zz + k1*p_z + k2*k3*z*p"))))
    assert sol.closed_form is not None
    assert is_zero(add(sol.multiplier, P("exp(k2*k5*t)/(k2*x)")))


def test_case_b_negative_bessel_argument():
    sol = reduce_case_b({"k1": 1, "k2": 1, "k3": -1})
    assert sol.closed_form is None
    assert sol.reduced_ode is not None
    assert any("NegativeBesselArgument" in n for n in sol.notes)
    with pytest.raises(NegativeBesselArgument):
        bessel_closed_form({"k1": 1, "k2": 1, "k3": -1})


def test_case_b_bessel_residual():
    p = bessel_closed_form({"k1": 1, "k2": 1, "k3": 1}).numeric({"c1": 1, "c2": 0})
    worst = 0.0
    for xv in np.linspace(0.5, 20, 100):
        val, d1, d2 = p(xv)
        worst = max(worst, abs(xv * d2 + d1 + xv * val))
    assert worst < 1e-9


def test_case_b_bessel_with_second_kind():
    p = bessel_closed_form({"k1": 2, "k2": 3, "k3": 1}).numeric({"c1": 0.3, "c2": -1.1})
    for xv in (0.7, 3.0, 11.0):
        val, d1, d2 = p(xv)
        assert abs(2 * xv * d2 + 2 * d1 + 3 * xv * val) < 1e-9 * max(1.0, abs(val), abs(d2))


def test_case_b_zero_source_gives_log_branch():
    sol = reduce_case_b({"k3": 0})
    assert is_zero(add(sol.reduced_ode, mul(-1, P("k1*z*p_zz + k1*p_z"))))
    assert sol.closed_form == P("c1 + c2*ln(z)")
    assert sol.verified


@pytest.mark.parametrize("which", ["scale", "log"])
def test_case_c(which):
    sol = reduce_case_c(which=which)
    assert sol.verified, sol.checks
    assert sol.checks["closed_form_exact"]


def test_case_c_scale_closed_form():
    sol = reduce_case_c(which="scale")
    assert sol.closed_form == P("-4*k1/(k2*k5) + c1*exp(-k2*k5*z)")
    assert substitute_function(sol.reduced_ode, "p", sol.closed_form) == P("0")


def test_case_c_log_branch_carries_inverse_k2():
    sol = reduce_case_c(which="log")
    assert sol.checks["closed_solution_solves_pde"]
    assert any("1/k2" in n for n in sol.notes)


def test_case_c_unknown_branch():
    with pytest.raises(ValueError):
        reduce_case_c(which="spiral")


def test_example1_bessel_solution_satisfies_reduced_ode():
    """h = J0(sqrt(z)) - 1 solves 4 z h'' + 4 h' + h + 1 = 0; derivatives by 5-point differences."""
    step = 0.01
    worst = 0.0
    for zv in np.geomspace(0.25, 16, 200):
        f = [bessel_j0(np.sqrt(zv + k * step)) - 1 for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step * step)
        worst = max(worst, abs(4 * zv * d2 + 4 * d1 + f[2] + 1))
    assert worst < 1e-8


def test_case_a_ode_helper_matches_reduction():
    sol = reduce_case_a({"k2": Fraction(1, 4), "k4": Fraction(1, 2)})
    p = {k: P(v) for k, v in {"k1": "k1", "k2": "1/4", "k3": "k3", "k4": "1/2"}.items()}
    assert is_zero(add(sol.reduced_ode, mul(-1, case_a_ode(p))))


def test_json_export():
    data = reduce_case_b().to_json()
    assert data["case"] == "B"
    assert all(data["checks"].values())
    assert P(data["reduced_ode"]) == reduce_case_b().reduced_ode
