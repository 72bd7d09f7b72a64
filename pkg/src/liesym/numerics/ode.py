"""Adaptive Dormand-Prince 5(4) integration with cubic Hermite dense output."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteState, StepSizeUnderflow

# Dormand-Prince tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = np.array((35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0))
_B4 = np.array((5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40))
_E = _B5 - _B4

MAX_STEPS = 2_000_000


@dataclass
class Trajectory:
    """Accepted steps of an integration, ordered by increasing independent variable."""

    s: np.ndarray           # independent variable, strictly increasing
    y: np.ndarray           # states, shape (n, d)
    dy: np.ndarray          # derivatives at the samples, shape (n, d)
    tol: float
    accepted: int = 0
    rejected: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def z(self) -> np.ndarray:
        return self.s

    @property
    def h(self) -> np.ndarray:
        return self.y[:, 0]

    @property
    def h_z(self) -> np.ndarray:
        return self.y[:, 1]

    @property
    def span(self):
        return float(self.s[0]), float(self.s[-1])

    def __call__(self, s):
        """Dense output: cubic Hermite on the bracketing step. Returns shape (..., d)."""
        s = np.asarray(s, dtype=float)
        lo, hi = self.span
        if np.any(s < lo) or np.any(s > hi):
            from ..errors import CoverageGap

            raise CoverageGap(f"points outside trajectory coverage [{lo}, {hi}]")
        i = np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, len(self.s) - 2)
        s0, s1 = self.s[i], self.s[i + 1]
        w = s1 - s0
        th = ((s - s0) / w)[..., None]
        y0, y1 = self.y[i], self.y[i + 1]
        f0, f1 = self.dy[i] * w[..., None], self.dy[i + 1] * w[..., None]
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th * th * (3 - 2 * th)
        h11 = th * th * (th - 1)
        return h00 * y0 + h10 * f0 + h01 * y1 + h11 * f1

    @classmethod
    def stitch(cls, backward: "Trajectory", forward: "Trajectory") -> "Trajectory":
        """Join two trajectories sharing their boundary sample."""
        if backward.s[-1] != forward.s[0]:
            raise ValueError("trajectories do not meet")
        return cls(
            np.concatenate([backward.s, forward.s[1:]]),
            np.concatenate([backward.y, forward.y[1:]]),
            np.concatenate([backward.dy, forward.dy[1:]]),
            max(backward.tol, forward.tol),
            backward.accepted + forward.accepted,
            backward.rejected + forward.rejected,
            {**backward.meta, **forward.meta},
        )


def _initial_step(rhs, s0, y0, f0, direction, tol):
    sc = tol * (np.abs(y0) + 1)
    d0 = np.max(np.abs(y0) / sc)
    d1 = np.max(np.abs(f0) / sc)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    f1 = np.asarray(rhs(s0 + direction * h0, y0 + direction * h0 * f0), dtype=float)
    d2 = np.max(np.abs(f1 - f0) / sc) / h0
    h1 = max(1e-6, h0 * 1e-3) if max(d1, d2) <= 1e-15 else (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def integrate(rhs, y0, span, tol: float = 1e-10, land=None, guard=None, max_step: float = math.inf) -> Trajectory:
    """Integrate y' = rhs(s, y) from span[0] to span[1].

    A step is accepted when every component of the error estimate is below
    tol * (|y| + 1). ``land`` lists points the integration must step onto
    exactly. ``guard(s, y)`` runs after every accepted step and may raise.
    Integration from right to left is allowed; the returned samples are
    always in increasing order of s.
    """
    a, b = float(span[0]), float(span[1])
    if a == b:
        raise ValueError("empty integration span")
    if not 1e-14 <= tol <= 1e-3:
        raise ValueError(f"tolerance {tol} outside [1e-14, 1e-3]")
    direction = 1.0 if b > a else -1.0
    y = np.array(y0, dtype=float)
    f = np.asarray(rhs(a, y), dtype=float)
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(f))):
        raise NonFiniteState(f"initial state {y} or slope {f} is not finite")
    stops = sorted({float(p) for p in ([] if land is None else land) if (p - a) * direction > 0 and (b - p) * direction > 0},
                   key=lambda p: direction * p)
    stops.append(b)
    s = a
    ss, ys, fs = [s], [y.copy()], [f.copy()]
    step = min(_initial_step(rhs, s, y, f, direction, tol), abs(b - a), max_step)
    accepted = rejected = 0
    k = np.empty((7, y.size))
    target = 0
    while True:
        if accepted + rejected > MAX_STEPS:
            raise StepSizeUnderflow(f"step budget exhausted at s = {s}")
        goal = stops[target]
        remaining = abs(goal - s)
        hit = step >= remaining * (1 - 1e-12)
        h = remaining if hit else step
        if h < 1e-14 * max(abs(s), 1.0) and not hit:
            raise StepSizeUnderflow(f"step size {h:.3g} underflows at s = {s}")
        hs = direction * h
        k[0] = f
        for i in range(1, 7):
            yi = y + hs * (np.asarray(_A[i]) @ k[:i])
            k[i] = rhs(s + _C[i] * hs, yi)
        ynew = y + hs * (_B5 @ k)
        err = hs * (_E @ k)
        scale = tol * (np.maximum(np.abs(y), np.abs(ynew)) + 1)
        with np.errstate(invalid="ignore", over="ignore"):
            ratio = float(np.max(np.abs(err) / scale))
        if not math.isfinite(ratio) or not np.all(np.isfinite(ynew)):
            rejected += 1
            step = h * 0.2
            continue
        if ratio <= 1.0:
            s = goal if hit else s + hs
            y = ynew
            f = k[6].copy()  # first-same-as-last
            accepted += 1
            if guard is not None:
                guard(s, y)
            ss.append(s)
            ys.append(y.copy())
            fs.append(f.copy())
            if hit:
                target += 1
                if target == len(stops):
                    break
            fac = 5.0 if ratio == 0 else min(5.0, max(0.2, 0.9 * ratio ** -0.2))
            step = min(h * fac, max_step) if not hit else max(step, h)
        else:
            rejected += 1
            step = h * max(0.2, 0.9 * ratio ** -0.2)
    order = slice(None) if direction > 0 else slice(None, None, -1)
    return Trajectory(np.array(ss)[order], np.array(ys)[order], np.array(fs)[order], tol, accepted, rejected,
                      {"start": a, "end": b})


def sample(traj: Trajectory, points) -> np.ndarray:
    """States at ``points``, which must coincide with landing points of ``traj``."""
    idx = np.searchsorted(traj.s, points)
    idx = np.clip(idx, 0, len(traj.s) - 1)
    if not np.array_equal(traj.s[idx], np.asarray(points, dtype=float)):
        raise ValueError("points were not landing points of the trajectory")
    return traj.y[idx]
