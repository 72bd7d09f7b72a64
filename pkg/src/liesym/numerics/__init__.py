"""Special functions, ODE integration and solution surfaces."""

from .bessel import bessel_all, bessel_j0, bessel_j1, bessel_y0, bessel_y1
from .ode import Trajectory, integrate
from .similarity import (
    CaseAParams, CaseASolution, SurfaceGrid, case_a_rhs, ode_defect, read_surface_csv, read_trajectory_csv,
    solve_case_a, solve_example2, surface_case_a, write_surface_csv, write_trajectory_csv,
)

__all__ = [
    "bessel_all", "bessel_j0", "bessel_j1", "bessel_y0", "bessel_y1", "Trajectory", "integrate", "CaseAParams",
    "CaseASolution", "SurfaceGrid", "case_a_rhs", "ode_defect", "read_surface_csv", "read_trajectory_csv",
    "solve_case_a", "solve_example2", "surface_case_a", "write_surface_csv", "write_trajectory_csv",
]
