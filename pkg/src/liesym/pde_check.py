"""Finite-difference checks of candidate solutions of u_t = f(u) + (1/x)(x g(u) u_x)_x."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageGap, DomainEscape, NonFiniteSample, NonFiniteState, StabilityViolation
from .expr import JetVar, as_expr, eval_numeric, lambdify, subs

SLOPE_WINDOW = (1.7, 2.3)
STABILITY_C = 0.4


def pde_callables(pde, bindings=None):
    """Vectorized f(u), g(u) from a PDESpec with every constant bound."""
    u = JetVar("u")
    out = []
    for e in (pde.f, pde.g):
        e = subs(e, {k: as_expr(v) for k, v in (bindings or {}).items()}) if bindings else e
        fn = lambdify(e, ["u"])
        out.append(lambda w, fn=fn: np.broadcast_to(np.asarray(fn(w), dtype=float), np.shape(w)))
    del u
    return tuple(out)


def _uniform(nodes) -> float:
    nodes = np.asarray(nodes, dtype=float)
    d = np.diff(nodes)
    if len(nodes) < 3 or not np.allclose(d, d[0], rtol=1e-9, atol=0):
        raise ValueError("nodes must be uniform with at least 3 points")
    return float(d[0])


def diffusion_term(u, x, g):
    """(1/x)(x g(u) u_x)_x at interior x-nodes, conservative form with arithmetic face averages."""
    dx = _uniform(x)
    xf = 0.5 * (x[1:] + x[:-1])
    uf = 0.5 * (u[1:] + u[:-1])
    flux = xf[:, None] * g(uf) * (u[1:] - u[:-1]) / dx if u.ndim == 2 else xf * g(uf) * (u[1:] - u[:-1]) / dx
    xi = x[1:-1][:, None] if u.ndim == 2 else x[1:-1]
    return (flux[1:] - flux[:-1]) / (xi * dx)


@dataclass
class ResidualRung:
    dx: float
    dt: float
    max_norm: float
    l2_norm: float


@dataclass
class ResidualReport:
    rungs: list = field(default_factory=list)

    @property
    def slope(self):
        """log2 of the last max-norm ratio; None with fewer than 3 rungs."""
        if len(self.rungs) < 3:
            return None
        a, b = self.rungs[-2].max_norm, self.rungs[-1].max_norm
        return math.log2(a / b) if a > 0 and b > 0 else None

    @property
    def slopes(self):
        r = self.rungs
        return [math.log2(r[i].max_norm / r[i + 1].max_norm) for i in range(len(r) - 1)]

    def passes(self, window=SLOPE_WINDOW) -> bool:
        s = self.slope
        return s is not None and window[0] <= s <= window[1]

    def to_json(self) -> dict:
        return {
            "rungs": [vars(r) for r in self.rungs],
            "slopes": self.slopes,
            "slope": self.slope,
            "window": list(SLOPE_WINDOW),
            "pass": self.passes(),
        }


def fd_residual_field(values, x, t, f, g) -> np.ndarray:
    """Residual u_t - f(u) - diffusion on interior nodes of a tabulated u[i, j] = u(x_i, t_j)."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteSample("u is not finite on the grid")
    if np.min(x) <= 0:
        raise ValueError("x-nodes must be positive")
    dt = _uniform(t)
    ut = (values[1:-1, 2:] - values[1:-1, :-2]) / (2 * dt)
    diff = diffusion_term(values, np.asarray(x, dtype=float), g)[:, 1:-1]
    return ut - f(values[1:-1, 1:-1]) - diff


def fd_residual(u, x, t, f, g) -> ResidualRung:
    """One rung: max and L2 (node-averaged) norms of the residual of callable u on the grid x by t."""
    x, t = np.asarray(x, dtype=float), np.asarray(t, dtype=float)
    X, T = np.meshgrid(x, t, indexing="ij")
    vals = np.asarray(u(X, T), dtype=float)
    r = fd_residual_field(vals, x, t, f, g)
    return ResidualRung(_uniform(x), _uniform(t), float(np.max(np.abs(r))), float(np.sqrt(np.mean(r * r))))


def residual_ladder(u, xrange, trange, f, g, rungs: int = 4, base: int = 16) -> ResidualReport:
    """Residual norms as dx and dt halve together, starting from ``base`` intervals per axis."""
    rep = ResidualReport()
    for k in range(rungs):
        n = base * 2 ** k + 1
        rep.rungs.append(fd_residual(u, np.linspace(*xrange, n), np.linspace(*trange, n), f, g))
    return rep


def grid_ladder(values, x, t, f, g, rungs: int = 4) -> ResidualReport:
    """Ladder from one tabulated surface by subsampling with strides 2^(rungs-1), ..., 2, 1."""
    values = np.asarray(values, dtype=float)
    rep = ResidualReport()
    for k in reversed(range(rungs)):
        s = 2 ** k
        if (len(x) - 1) % s or (len(t) - 1) % s or (len(x) - 1) // s < 2 or (len(t) - 1) // s < 2:
            raise ValueError(f"grid of {len(x)}x{len(t)} nodes does not support stride {s}")
        xs, ts, vs = x[::s], t[::s], values[::s, ::s]
        r = fd_residual_field(vs, xs, ts, f, g)
        rep.rungs.append(ResidualRung(_uniform(xs), _uniform(ts), float(np.max(np.abs(r))),
                                      float(np.sqrt(np.mean(r * r)))))
    return rep


def evolve(u0, x, f, g, dt: float, steps: int, boundary) -> np.ndarray:
    """Forward Euler with the conservative diffusion operator; returns all time slices.

    ``boundary(t)`` gives the Dirichlet values (left, right) at time t.
    """
    x = np.asarray(x, dtype=float)
    u = np.array(u0, dtype=float)
    dx = _uniform(x)
    out = np.empty((steps + 1, len(u)))
    out[0] = u
    for n in range(steps):
        gmax = float(np.max(np.abs(g(u))))
        if dt > STABILITY_C * dx * dx / gmax:
            raise StabilityViolation(f"dt = {dt:.3g} exceeds {STABILITY_C}*dx^2/max g = {STABILITY_C * dx * dx / gmax:.3g}")
        new = u.copy()
        new[1:-1] = u[1:-1] + dt * (f(u[1:-1]) + diffusion_term(u, x, g))
        new[0], new[-1] = boundary((n + 1) * dt)
        if not np.all(np.isfinite(new)):
            raise NonFiniteState(f"non-finite state at step {n + 1}")
        u = new
        out[n + 1] = u
    return out


def group_action_a(u, epsilon: float, k2: float, k4: float, domain=None):
    """(x, t) -> u(e^((k2-k4) eps) x, e^(-2 k4 eps) t) - 2 eps.

    ``domain`` = ((x0, x1), (t0, t1)) is where u may be sampled; leaving it,
    or hitting a coverage gap of u, raises DomainEscape.
    """
    sx = math.exp((float(k2) - float(k4)) * epsilon)
    st = math.exp(-2 * float(k4) * epsilon)

    def transformed(x, t):
        xs, ts = np.asarray(x, dtype=float) * sx, np.asarray(t, dtype=float) * st
        if domain is not None:
            (x0, x1), (t0, t1) = domain
            if np.min(xs) < x0 or np.max(xs) > x1 or np.min(ts) < t0 or np.max(ts) > t1:
                raise DomainEscape(f"transformed arguments leave {domain}")
        try:
            return u(xs, ts) - 2 * epsilon
        except CoverageGap as exc:
            raise DomainEscape(str(exc)) from exc

    return transformed


# ---------------------------------------------------------------- exact references

@dataclass
class Reference:
    name: str
    u: object
    f: object
    g: object
    xrange: tuple
    trange: tuple
    params: dict


def _exp_g(k1, k2):
    return lambda w: k1 * np.exp(k2 * np.asarray(w, dtype=float))


def case_b_reference(k1=1.0, k2=1.0, k3=1.0, k5=1.0, c1=1.0, c2=0.0, xrange=(1.0, 2.2), trange=(0.0, 0.1)):
    """u = k5 t + ln(c1 J0(s x) + c2 Y0(s x)) / k2 with s^2 = k2 k3 / k1."""
    from .numerics.bessel import j0_array, y0_array

    s = math.sqrt(k2 * k3 / k1)

    def p(x):
        x = np.asarray(x, dtype=float)
        return c1 * j0_array(s * x) + (c2 * y0_array(s * x) if c2 else 0.0)

    def u(x, t):
        pv = p(x)
        if np.any(pv <= 0):
            raise NonFiniteSample("Bessel profile is not positive on the grid")
        return k5 * np.asarray(t, dtype=float) + np.log(pv) / k2

    f = lambda w: k3 * np.exp(k2 * np.asarray(w, dtype=float)) + k5
    return Reference("case-b", u, f, _exp_g(k1, k2), xrange, trange,
                     dict(k1=k1, k2=k2, k3=k3, k5=k5, c1=c1, c2=c2))


def case_c_log_reference(k1=1.0, k2=1.0, k5=1.0, c1=2.0, c2=0.5, xrange=(1.0, 3.0), trange=(0.0, 1.0)):
    """u = k5 t + ln(c1 + c2 ln x) / k2."""
    def u(x, t):
        return k5 * np.asarray(t, dtype=float) + np.log(c1 + c2 * np.log(np.asarray(x, dtype=float))) / k2

    f = lambda w: np.full(np.shape(w), float(k5))
    return Reference("case-c-log", u, f, _exp_g(k1, k2), xrange, trange, dict(k1=k1, k2=k2, k5=k5, c1=c1, c2=c2))


def case_c_scale_reference(k1=1.0, k2=1.0, k5=-1.0, c1=1.0, xrange=(1.0, 2.0), trange=(0.0, 1.0)):
    """u = ln(x^2 / p(t)) / k2 with p = -4 k1/(k2 k5) + c1 exp(-k2 k5 t)."""
    def u(x, t):
        pt = -4 * k1 / (k2 * k5) + c1 * np.exp(-k2 * k5 * np.asarray(t, dtype=float))
        if np.any(pt <= 0):
            raise NonFiniteSample("p(t) is not positive on the grid")
        return np.log(np.asarray(x, dtype=float) ** 2 / pt) / k2

    f = lambda w: np.full(np.shape(w), float(k5))
    return Reference("case-c-scale", u, f, _exp_g(k1, k2), xrange, trange, dict(k1=k1, k2=k2, k5=k5, c1=c1))


REFERENCES = {
    "case-b": case_b_reference,
    "case-c-log": case_c_log_reference,
    "case-c-scale": case_c_scale_reference,
}


def check_reference(name: str, rungs: int = 4, **params) -> ResidualReport:
    ref = REFERENCES[name](**params)
    return residual_ladder(ref.u, ref.xrange, ref.trange, ref.f, ref.g, rungs=rungs)


def evolution_ladder(ref: Reference, t_end: float = 0.1, rungs: int = 4, base: int = 12, ratio: float = 0.25):
    """[(dx, dt, max error at t_end)] for evolve seeded with the reference at t = t0, dt = ratio * dx^2."""
    x0, x1 = ref.xrange
    t0 = ref.trange[0]
    out = []
    for k in range(rungs):
        n = base * 2 ** k
        x = np.linspace(x0, x1, n + 1)
        dx = (x1 - x0) / n
        steps = math.ceil(t_end / (ratio * dx * dx))
        dt = t_end / steps
        u0 = ref.u(x, np.full_like(x, t0))
        edge = np.array([x0, x1])
        field_ = evolve(u0, x, ref.f, ref.g, dt, steps, lambda tt: ref.u(edge, np.full(2, t0 + tt)))
        exact = ref.u(x, np.full_like(x, t0 + t_end))
        out.append((dx, dt, float(np.max(np.abs(field_[-1] - exact)))))
    return out


def eval_constant(e, bindings=None) -> float:
    return float(eval_numeric(as_expr(e), bindings or {}))
