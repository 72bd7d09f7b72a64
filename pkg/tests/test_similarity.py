import io
import math
from fractions import Fraction

import numpy as np
import pytest

from liesym.errors import CoverageGap, NonPositiveH, SingularityApproached
from liesym.numerics import (
    CaseAParams, CaseASolution, SurfaceGrid, ode_defect, read_surface_csv, read_trajectory_csv, solve_case_a,
    solve_example2, surface_case_a, write_surface_csv, write_trajectory_csv,
)
from liesym.numerics.ode import Trajectory

K2 = [Fraction(1, 4), Fraction(1, 6)]


def test_params():
    p = CaseAParams.example2("1/4")
    assert (p.k1, p.k2, p.k3, p.k4) == (1, Fraction(1, 4), 1, Fraction(1, 2))
    assert p.z_exponent == -0.5


@pytest.mark.parametrize("k2", K2)
def test_reduced_ode_defect(k2):
    """Quintic fit through the samples satisfies the ODE to the integrator's tolerance."""
    tol = 1e-12
    p = CaseAParams.example2(k2)
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 16.0), tol=tol)
    zs = np.geomspace(0.6, 16.0, 200)
    res, scale, width = ode_defect(p, tr, zs)
    assert np.all(np.abs(res) <= 50 * tol * scale / width ** 2)


@pytest.mark.parametrize("k2", K2)
def test_backward_branch_reaches_zero_of_h(k2):
    with pytest.raises(SingularityApproached):
        solve_example2(k2)


@pytest.mark.parametrize("k2", K2)
def test_forward_branch_stays_positive(k2):
    tr = solve_example2(k2, zspan=(1.0, 16.0))
    assert tr.span == (1.0, 16.0)
    assert np.all(tr.h > 0.1)
    assert tr.h[0] == 2.0 and tr.h_z[0] == 2.5


def test_solution_at_initial_point():
    p = CaseAParams.example2(Fraction(1, 4))
    sol = CaseASolution(p, 2.0, 2.5)
    assert sol(1.0, 1.0) == pytest.approx(4 * math.log(2), abs=1e-15)
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 16.0))
    grid = surface_case_a(p, tr, (1, 1), (1, 1.5), 1, 3)
    assert grid.u[0, 0] == pytest.approx(4 * math.log(2), abs=1e-14)


def test_unit_time_row_is_the_trajectory():
    p = CaseAParams.example2(Fraction(1, 6))
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 16.0))
    grid = surface_case_a(p, tr, (1.0, 2.0), (1.0, 2.0), 25, 5)
    expected = np.log(tr(grid.x ** 2)[:, 0]) * 6
    assert np.max(np.abs(grid.u[:, 0] - expected)) < 1e-13


def test_exact_landing_agrees_with_dense_output():
    p = CaseAParams.example2(Fraction(1, 4))
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 16.0), tol=1e-12)
    sol = CaseASolution(p, 2.0, 2.5, tol=1e-12)
    a = surface_case_a(p, tr, (1.0, 2.0), (0.5, 2.0), 9, 9)
    b = surface_case_a(p, sol, (1.0, 2.0), (0.5, 2.0), 9, 9)
    assert np.max(np.abs(a.u - b.u)) < 1e-6


def test_coverage_gap():
    p = CaseAParams.example2(Fraction(1, 4))
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 4.0))
    with pytest.raises(CoverageGap):
        surface_case_a(p, tr, (0.5, 2.0), (0.5, 2.0), 8, 8)
    with pytest.raises(CoverageGap):
        CaseASolution(p, 2.0, 2.5, zmin=0.6, zmax=4.0)(3.0, 1.0)


def test_non_positive_h():
    p = CaseAParams.example2(Fraction(1, 4))
    s = np.array([0.5, 1.0, 2.0])
    y = np.array([[-1.0, 0.0], [2.0, 1.0], [3.0, 1.0]])
    tr = Trajectory(s, y, np.zeros_like(y), 1e-10)
    with pytest.raises(NonPositiveH):
        surface_case_a(p, tr, (0.71, 1.0), (0.5, 1.0), 3, 3)


def test_surface_grid_validation():
    with pytest.raises(ValueError):
        SurfaceGrid(np.array([1.0, 2.0]), np.array([1.0]), np.zeros((1, 1)))
    with pytest.raises(ValueError):
        SurfaceGrid(np.array([2.0, 1.0]), np.array([1.0]), np.zeros((2, 1)))
    with pytest.raises(ValueError):
        SurfaceGrid(np.array([1.0]), np.array([1.0]), np.array([[np.nan]]))
    with pytest.raises(ValueError):
        surface_case_a(CaseAParams.example2(1), CaseASolution(CaseAParams.example2(1), 2, 2.5), (0, 1), (1, 2), 3, 3)


def test_trajectory_csv_round_trip(tmp_path):
    p = CaseAParams.example2(Fraction(1, 4))
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 4.0))
    path = tmp_path / "traj.csv"
    write_trajectory_csv(tr, path)
    back = read_trajectory_csv(path, p)
    assert np.array_equal(back.s, tr.s) and np.array_equal(back.y, tr.y)
    assert np.allclose(back.dy, tr.dy, rtol=1e-12, atol=1e-12)
    assert path.read_text().splitlines()[0] == "z,h,h_z"


def test_surface_csv_round_trip(tmp_path):
    p = CaseAParams.example2(Fraction(1, 4))
    tr = solve_case_a(p, 2.0, 2.5, (0.6, 16.0))
    grid = surface_case_a(p, tr, (1.0, 2.0), (0.5, 2.0), 7, 5)
    path = tmp_path / "surf.csv"
    write_surface_csv(grid, path)
    back = read_surface_csv(path)
    assert np.array_equal(back.u, grid.u) and np.array_equal(back.x, grid.x) and np.array_equal(back.t, grid.t)
    buf = io.StringIO()
    write_surface_csv(grid, buf)
    assert buf.getvalue() == path.read_text()
    assert "\r" not in buf.getvalue()
