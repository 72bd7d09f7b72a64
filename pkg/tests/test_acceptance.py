"""Acceptance criteria 1-8, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import contextlib
import io
import json
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from liesym.classifier import build_case, run_controls
from liesym.cli import main
from liesym.determining import matches_up_to_x_monomial, symmetry_condition
from liesym.errors import NumericFailure
from liesym.expr import add, is_zero, mul, parse, substitute_function
from liesym.numerics import CaseAParams, CaseASolution, bessel_all, bessel_j0, solve_example2
from liesym.pde_check import (
    SLOPE_WINDOW, case_b_reference, evolution_ladder, group_action_a, residual_ladder,
)
from liesym.reduction import bessel_closed_form, reduce_case_a, reduce_case_c

from conftest import ACCEPTANCE_LINES
from oracles import bessel_series, log_points

GOLDEN = json.loads((Path(__file__).parent / "data" / "determining_golden.json").read_text())

# case-A surface used by criteria 5 and 6: z = x^2 / sqrt(t) spans [0.707, 5.66]
SURFACE_X, SURFACE_T = (1.0, 2.0), (0.5, 2.0)
SURFACE_RUNGS, SURFACE_BASE = 5, 16


def record(number: int, title: str, ok: bool, started: float, detail: str = "") -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({time.perf_counter() - started:.2f} s)"
    if detail:
        line += f" | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def case_a_f_g(p: CaseAParams):
    k1, k2, k3, k4 = (float(v) for v in (p.k1, p.k2, p.k3, p.k4))
    return (lambda w: k3 * np.exp(k4 * w)), (lambda w: k1 * np.exp(k2 * w))


def surface_report(k2, u=None):
    p = CaseAParams.example2(k2)
    f, g = case_a_f_g(p)
    u = u or CaseASolution(p, 2.0, 2.5, tol=1e-12)
    return residual_ladder(u, SURFACE_X, SURFACE_T, f, g, rungs=SURFACE_RUNGS, base=SURFACE_BASE)


def example1_residual(zv: float, step: float = 0.01) -> float:
    f = [bessel_j0(math.sqrt(zv + k * step)) - 1 for k in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step * step)
    return 4 * zv * d2 + 4 * d1 + f[2] + 1


def test_criterion_1_determining_system():
    t0 = time.perf_counter()
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["determine"])
    data = json.loads(buf.getvalue())
    got = {e["monomial"]: parse(e["equation"]) for e in data["equations"]}
    matched = [
        matches_up_to_x_monomial(got[g["monomial"]], mul(parse(g["factor"]), parse(g["equation"]))) is not None
        for g in GOLDEN["equations"]
    ]
    elapsed = time.perf_counter() - t0
    ok = code == 0 and all(matched) and parse(data["remainder"]) == parse("0") and elapsed < 5
    record(1, "determining-system reproduction", ok, t0, f"{sum(matched)}/{len(matched)} golden equations")
    assert ok


def test_criterion_2_generators_and_controls():
    t0 = time.perf_counter()
    verdicts = []
    for tag in "ABC":
        case = build_case(tag)
        # is_zero raises ProbableZero instead of guessing, so a True here is exact
        verdicts += [is_zero(symmetry_condition(gen, case.pde)) for gen in case.generators]
    controls = run_controls()
    negatives = [c for c, _ in controls if not c.expected]
    controls_ok = all(obs == c.expected for c, obs in controls) and len(negatives) >= 6
    elapsed = time.perf_counter() - t0
    ok = all(verdicts) and controls_ok and elapsed < 10
    record(2, "symmetry generators and negative controls", ok, t0,
           f"{sum(verdicts)}/{len(verdicts)} generators, {len(negatives)} negative controls")
    assert ok


def test_criterion_3_reduction_fidelity():
    t0 = time.perf_counter()
    equal = reduce_case_a({"k2": "k", "k4": "k"})
    doubled = reduce_case_a({"k1": 1, "k3": 1, "k4": "2*k2"})
    linear_target = parse("4*k1*z*h_zz + 4*k1*h_z + k*k3*h + 1")
    doubled_target = parse("8*z*h_zz + (8 + z/h)*h_z + 2*k2*h^2 + 1")
    # the reduced ODE is stored with the multiplier normalization that makes the k2 term equal to k2
    ok_equal = equal.verified and is_zero(add(mul(parse("1/k"), equal.reduced_ode), mul(-1, linear_target)))
    ok_doubled = doubled.verified and is_zero(add(mul(parse("1/k2"), doubled.reduced_ode), mul(-1, doubled_target)))
    ok = ok_equal and ok_doubled
    record(3, "reduction fidelity", ok, t0, f"equal exponents {ok_equal}, doubled exponent {ok_doubled}")
    assert ok


def test_criterion_4_closed_forms():
    t0 = time.perf_counter()
    # (i) h = J0(sqrt z) - 1 against 4 z h'' + 4 h' + h + 1 = 0, derivatives by 5-point differences of J0 alone
    worst_i = max(abs(example1_residual(zv)) for zv in np.linspace(0.25, 16, 400))
    # (ii) exponential relaxation closed form, symbolic
    scale = reduce_case_c(which="scale")
    exact_ii = substitute_function(scale.reduced_ode, "p", scale.closed_form) == parse("0")
    # (iii) Bessel profile at unit parameters
    p = bessel_closed_form({"k1": 1, "k2": 1, "k3": 1}).numeric({"c1": 1, "c2": 0})
    worst_iii = 0.0
    for xv in np.linspace(0.5, 20, 100):
        val, d1, d2 = p(xv)
        worst_iii = max(worst_iii, abs(xv * d2 + d1 + xv * val))
    ok = worst_i < 1e-8 and exact_ii and worst_iii < 1e-9
    record(4, "closed-form checks", ok, t0, f"(i) {worst_i:.1e} (ii) {exact_ii} (iii) {worst_iii:.1e}")
    assert ok


def test_criterion_5_example_surfaces():
    t0 = time.perf_counter()
    details, ok = [], True
    for k2 in (Fraction(1, 4), Fraction(1, 6)):
        try:
            solve_example2(k2, 2.0, 2.5, (0.25, 16.0), tol=1e-10)
            integrated = True
        except NumericFailure as exc:
            integrated = False
            details.append(f"k2={k2}: {type(exc).__name__} ({exc})")
        rep = surface_report(k2)
        details.append(f"k2={k2}: surface slope {rep.slope:.3f} on z in [0.71, 5.66]")
        ok = ok and integrated and rep.passes()
    record(5, "example surfaces over z in [0.25, 16]", ok, t0, "; ".join(details))
    assert ok


def test_criterion_6_group_action():
    t0 = time.perf_counter()
    k2 = Fraction(1, 4)
    p = CaseAParams.example2(k2)
    base = CaseASolution(p, 2.0, 2.5, tol=1e-12)
    x = np.linspace(*SURFACE_X, 33)
    t = np.linspace(*SURFACE_T, 33)
    X, T = np.meshgrid(x, t, indexing="ij")
    identity_err = float(np.max(np.abs(group_action_a(base, 0.0, k2, p.k4)(X, T) - base(X, T))))
    ref = surface_report(k2, base)
    slopes = {}
    for eps in (-0.1, -0.05, 0.05, 0.1):
        slopes[eps] = surface_report(k2, group_action_a(base, eps, k2, p.k4)).slope
    ok = (identity_err <= 1e-14 and ref.passes()
          and all(SLOPE_WINDOW[0] <= s <= SLOPE_WINDOW[1] and abs(s - ref.slope) <= 0.3 for s in slopes.values()))
    detail = f"identity {identity_err:.1e}, base slope {ref.slope:.3f}, " + ", ".join(
        f"eps={e:+}: {s:.3f}" for e, s in slopes.items())
    record(6, "group action preserves residual decay", ok, t0, detail)
    assert ok


def test_criterion_7_evolution():
    t0 = time.perf_counter()
    ladder = evolution_ladder(case_b_reference(), t_end=0.1, rungs=4)
    slopes = [math.log2(ladder[i][2] / ladder[i + 1][2]) for i in range(len(ladder) - 1)]
    elapsed = time.perf_counter() - t0
    ok = slopes[-1] >= 1.7 and elapsed < 60
    record(7, "evolution cross-check", ok, t0,
           "errors " + ", ".join(f"{e:.2e}" for *_, e in ladder) + f"; last slope {slopes[-1]:.3f}")
    assert ok


def test_criterion_8_special_functions():
    t0 = time.perf_counter()
    worst = [0.0] * 4
    worst_w = 0.0
    for xv in log_points(1e-3, 50.0, 500):
        ref = bessel_series(xv)
        got = bessel_all(xv)
        worst = [max(w, abs(g - r) / abs(r)) for w, g, r in zip(worst, got, ref)]
        j0, j1, y0, y1 = got
        worst_w = max(worst_w, abs(j1 * y0 - j0 * y1 - 2 / (math.pi * xv)))
    ok = max(worst) <= 1e-10 and worst_w <= 1e-9
    record(8, "special-function accuracy", ok, t0,
           "max rel err J0 {:.1e} J1 {:.1e} Y0 {:.1e} Y1 {:.1e}; Wronskian {:.1e}".format(*worst, worst_w))
    assert ok


if __name__ == "__main__":
    import sys

    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for fn in tests:
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
