"""Numeric solutions of the case-A reduced ODE and the surfaces u(x, t) built from them."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..errors import CoverageGap, NonPositiveH, SingularityApproached, StepSizeUnderflow
from .ode import Trajectory, integrate

H_FLOOR = 1e-6


@dataclass(frozen=True)
class CaseAParams:
    k1: Fraction
    k2: Fraction
    k3: Fraction
    k4: Fraction

    @classmethod
    def example2(cls, k2) -> "CaseAParams":
        k2 = Fraction(k2)
        return cls(Fraction(1), k2, Fraction(1), 2 * k2)

    @property
    def z_exponent(self) -> float:
        """z = x^2 t^(k2/k4 - 1)."""
        return float(self.k2 / self.k4 - 1)

    def as_dict(self) -> dict:
        return {k: str(getattr(self, k)) for k in ("k1", "k2", "k3", "k4")}


def case_a_rhs(p: CaseAParams):
    """First-order form of 4 k1 k4 z h'' + (4 k1 k4 + (k4 - k2) z/h) h' + k2 k3 k4 h^(k4/k2) + k2 = 0."""
    a = 4 * float(p.k1 * p.k4)
    b = float(p.k4 - p.k2)
    c = float(p.k2 * p.k3 * p.k4)
    e = float(p.k4 / p.k2)
    d = float(p.k2)
    integer_power = e == int(e)

    def rhs(zv, y):
        h, hz = y
        hp = h ** int(e) if integer_power else abs(h) ** e if h > 0 else math.nan
        return np.array((hz, -((a + b * zv / h) * hz + c * hp + d) / (a * zv)))

    return rhs


def _guard(zv, y):
    if abs(y[0]) < H_FLOOR:
        raise SingularityApproached(f"|h| = {abs(y[0]):.3g} < {H_FLOOR} at z = {zv}")


def solve_case_a(p: CaseAParams, h1: float, dh1: float, zspan, z_init: float = 1.0, tol: float = 1e-10,
                 land=None) -> Trajectory:
    """Trajectory over zspan from data at z_init: backward to zspan[0], forward to zspan[1], stitched."""
    z0, z1 = float(zspan[0]), float(zspan[1])
    if z0 <= 0:
        raise ValueError("the reduced ODE is singular at z = 0; need z0 > 0")
    if not z0 <= z_init <= z1 or z0 == z1:
        raise ValueError(f"need z0 <= {z_init} <= z1 with z0 < z1")
    if h1 == 0:
        raise ValueError("h(z_init) must be nonzero")
    rhs = case_a_rhs(p)
    y0 = (float(h1), float(dh1))
    land = [] if land is None else list(land)
    parts = []
    try:
        for end in (z0, z1):
            if end != z_init:
                parts.append(integrate(rhs, y0, (z_init, end), tol=tol, land=land, guard=_guard))
    except StepSizeUnderflow as exc:
        raise SingularityApproached(str(exc)) from exc
    if len(parts) == 2:
        traj = Trajectory.stitch(*parts)
    else:
        traj = parts[0]
    traj.meta.update({"params": p.as_dict(), "h_init": float(h1), "dh_init": float(dh1), "z_init": z_init,
                      "span": [z0, z1], "tol": tol})
    return traj


def solve_example2(k2, h1: float = 2.0, dh1: float = 2.5, zspan=(0.25, 16.0), tol: float = 1e-10) -> Trajectory:
    """8 z h'' + (8 + z/h) h' + 2 k2 h^2 + 1 = 0 through h(1) = h1, h'(1) = dh1."""
    return solve_case_a(CaseAParams.example2(k2), h1, dh1, zspan, 1.0, tol)


def quintic_h(traj: Trajectory, zs):
    """(h, h', h'') at zs from the quintic Hermite fit of h through (h, h_z, h_zz) at the samples."""
    zs = np.asarray(zs, dtype=float)
    lo, hi = traj.span
    if np.any(zs < lo) or np.any(zs > hi):
        raise CoverageGap(f"points outside trajectory coverage [{lo}, {hi}]")
    i = np.clip(np.searchsorted(traj.s, zs, side="right") - 1, 0, len(traj.s) - 2)
    w = traj.s[i + 1] - traj.s[i]
    th = (zs - traj.s[i]) / w
    left = (traj.y[i, 0], traj.y[i, 1] * w, traj.dy[i, 1] * w * w)
    right = (traj.y[i + 1, 0], traj.y[i + 1, 1] * w, traj.dy[i + 1, 1] * w * w)
    # quintic through value, first and second derivative at both ends, as polynomials in th
    basis = np.array([
        [1, 0, 0, -10, 15, -6], [0, 1, 0, -6, 8, -3], [0, 0, 0.5, -1.5, 1.5, -0.5],
        [0, 0, 0, 10, -15, 6], [0, 0, 0, -4, 7, -3], [0, 0, 0, 0.5, -1, 0.5],
    ])
    coef = np.stack([*left, *right], axis=-1) @ basis          # (n, 6) monomial coefficients
    powers = np.arange(6)
    tp = th[:, None] ** powers
    val = np.sum(coef * tp, axis=1)
    d1 = np.sum(coef[:, 1:] * powers[1:] * th[:, None] ** (powers[1:] - 1), axis=1) / w
    d2 = np.sum(coef[:, 2:] * powers[2:] * (powers[2:] - 1) * th[:, None] ** (powers[2:] - 2), axis=1) / w ** 2
    return val, d1, d2


def ode_defect(p: CaseAParams, traj: Trajectory, zs):
    """(residual, local scale, local step width) of the reduced ODE on the quintic fit of h."""
    zs = np.asarray(zs, dtype=float)
    i = np.clip(np.searchsorted(traj.s, zs, side="right") - 1, 0, len(traj.s) - 2)
    width = traj.s[i + 1] - traj.s[i]
    h, h1, h2 = quintic_h(traj, zs)
    a = 4 * float(p.k1 * p.k4)
    terms = (a * zs * h2, (a + float(p.k4 - p.k2) * zs / h) * h1,
             float(p.k2 * p.k3 * p.k4) * np.abs(h) ** float(p.k4 / p.k2), np.full_like(zs, float(p.k2)))
    return sum(terms), sum(np.abs(t) for t in terms), width


class CaseASolution:
    """u(x, t) = (1/k2) ln h(z) - (1/k4) ln t, z = x^2 t^(k2/k4 - 1).

    h is obtained by integrating from the initial data directly onto every
    requested z, so evaluation error stays at the integrator tolerance.
    """

    def __init__(self, p: CaseAParams, h1: float, dh1: float, z_init: float = 1.0, tol: float = 1e-12,
                 zmin: float | None = None, zmax: float | None = None):
        self.p, self.h1, self.dh1, self.z_init, self.tol = p, h1, dh1, z_init, tol
        self.zmin, self.zmax = zmin, zmax

    def h(self, zs) -> np.ndarray:
        zs = np.asarray(zs, dtype=float)
        flat = zs.ravel()
        uniq = np.unique(flat)
        lo, hi = float(uniq[0]), float(uniq[-1])
        if (self.zmin is not None and lo < self.zmin) or (self.zmax is not None and hi > self.zmax):
            raise CoverageGap(f"z range [{lo}, {hi}] outside [{self.zmin}, {self.zmax}]")
        span = (min(lo, self.z_init), max(hi, self.z_init))
        if span[0] == span[1]:
            return np.full(zs.shape, float(self.h1))
        traj = solve_case_a(self.p, self.h1, self.dh1, span, self.z_init, self.tol, land=uniq)
        idx = np.searchsorted(traj.s, uniq)
        if not np.array_equal(traj.s[idx], uniq):
            raise RuntimeError("integration did not land on every requested z")
        vals = traj.y[idx, 0]
        return vals[np.searchsorted(uniq, flat)].reshape(zs.shape)

    def __call__(self, x, t):
        x, t = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
        return _u_from_h(self.p, x, t, self.h)


def _u_from_h(p: CaseAParams, x, t, h_of):
    z = x * x * t ** p.z_exponent
    h = h_of(z)
    if np.any(h <= 0):
        raise NonPositiveH("h(z) <= 0 on the requested nodes; ln h is undefined")
    return np.log(h) / float(p.k2) - np.log(t) / float(p.k4)


@dataclass
class SurfaceGrid:
    x: np.ndarray
    t: np.ndarray
    u: np.ndarray           # shape (len(x), len(t))
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.u.shape != (len(self.x), len(self.t)):
            raise ValueError("u must have shape (len(x), len(t))")
        if not (np.all(np.diff(self.x) > 0) and np.all(np.diff(self.t) > 0)):
            raise ValueError("grid axes must be strictly increasing")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("surface contains non-finite values")


def surface_case_a(p: CaseAParams, source, xrange, trange, nx: int, nt: int) -> SurfaceGrid:
    """Tabulate u on a uniform grid. ``source`` is a Trajectory (dense output) or a CaseASolution."""
    x = np.linspace(float(xrange[0]), float(xrange[1]), nx)
    t = np.linspace(float(trange[0]), float(trange[1]), nt)
    if x[0] <= 0 or t[0] <= 0:
        raise ValueError("surface grids need x > 0 and t > 0")
    X, T = np.meshgrid(x, t, indexing="ij")
    if isinstance(source, Trajectory):
        u = _u_from_h(p, X, T, lambda z: source(z)[..., 0])
    else:
        u = source(X, T)
    return SurfaceGrid(x, t, u, {"params": p.as_dict(), "xrange": list(map(float, xrange)),
                                 "trange": list(map(float, trange)), "nx": nx, "nt": nt})


# ---------------------------------------------------------------- CSV

def _fmt(v: float) -> str:
    return f"{v:.17g}"


class _target:
    """Path or already-open text stream."""

    def __init__(self, dest):
        self.dest, self.fh = dest, None

    def __enter__(self):
        if hasattr(self.dest, "write"):
            return self.dest
        self.fh = open(self.dest, "w", newline="", encoding="utf-8")
        return self.fh

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def write_trajectory_csv(traj: Trajectory, path) -> None:
    with _target(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("z", "h", "h_z"))
        for zv, (h, hz) in zip(traj.s, traj.y):
            w.writerow((_fmt(zv), _fmt(h), _fmt(hz)))


def read_trajectory_csv(path, p: CaseAParams | None = None, tol: float = 0.0) -> Trajectory:
    """Samples back as a Trajectory; slopes come from the ODE when params are given."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    s, y = data[:, 0], data[:, 1:3]
    if p is not None:
        rhs = case_a_rhs(p)
        dy = np.array([rhs(a, b) for a, b in zip(s, y)])
    else:
        dy = np.column_stack([y[:, 1], np.gradient(y[:, 1], s)])
    return Trajectory(s, y, dy, tol)


def write_surface_csv(grid: SurfaceGrid, path) -> None:
    with _target(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x\\t", *map(_fmt, grid.t)])
        for xi, row in zip(grid.x, grid.u):
            w.writerow([_fmt(xi), *map(_fmt, row)])


def read_surface_csv(path) -> SurfaceGrid:
    with open(path, encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    t = np.array([float(v) for v in rows[0][1:]])
    body = np.array([[float(v) for v in r] for r in rows[1:]])
    return SurfaceGrid(body[:, 0], t, body[:, 1:])
