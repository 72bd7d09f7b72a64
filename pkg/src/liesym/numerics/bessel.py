"""Bessel functions J0, J1, Y0, Y1 of real positive argument.

Three regimes:
  x <= 4        ascending power series (little cancellation this low)
  4 < x <= 25   Miller backward recurrence for J_n, Neumann series for Y0, Y1
  x > 25        Hankel asymptotic expansion, truncated at its smallest term
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError

EULER_GAMMA = 0.57721566490153286061
SERIES_MAX = 4.0
ASYMPTOTIC_MIN = 25.0
_TWO_OVER_PI = 2.0 / math.pi


def _check(x: float, strict: bool) -> float:
    x = float(x)
    if not math.isfinite(x) or x < 0 or (strict and x == 0):
        raise DomainError(f"Bessel argument {x} outside the domain")
    return x


# ---------------------------------------------------------------- series

def _series(x: float):
    """(J0, J1, S0, S1) where S0, S1 are the non-logarithmic parts of Y0, Y1."""
    q = 0.25 * x * x
    term0, term1 = 1.0, 0.5 * x          # (-q)^k/(k!)^2 and (x/2)(-q)^k/(k!(k+1)!)
    j0, j1 = term0, term1
    harm = 0.0                            # H_k
    s0 = 0.0
    s1 = term1 * (-2 * EULER_GAMMA + 1.0)  # psi(1) + psi(2)
    k = 0
    while True:
        k += 1
        term0 *= -q / (k * k)
        term1 *= -q / (k * (k + 1))
        harm += 1.0 / k
        j0 += term0
        j1 += term1
        s0 -= harm * term0
        s1 += term1 * (-2 * EULER_GAMMA + 2 * harm + 1.0 / (k + 1))
        if abs(term0) < 1e-18 * abs(j0) and abs(term1) < 1e-18 * max(abs(j1), 1e-300) and k > 2:
            break
    return j0, j1, s0, s1


def _small(x: float):
    j0, j1, s0, s1 = _series(x)
    lg = math.log(0.5 * x)
    y0 = _TWO_OVER_PI * ((lg + EULER_GAMMA) * j0 + s0)
    y1 = -_TWO_OVER_PI / x + _TWO_OVER_PI * lg * j1 - s1 / math.pi
    return j0, j1, y0, y1


# ---------------------------------------------------------------- Miller

def _miller(x: float):
    """J_n(x) for n = 0..N by backward recurrence, normalized by J0 + 2 sum J_2k = 1."""
    n_top = 2 * ((int(x) + 40 + int(4 * math.sqrt(x))) // 2)
    vals = [0.0] * (n_top + 2)
    vals[n_top] = 1e-30
    for n in range(n_top, 0, -1):
        vals[n - 1] = 2 * n / x * vals[n] - vals[n + 1]
        if abs(vals[n - 1]) > 1e250:
            vals = [v * 1e-250 for v in vals]
    norm = vals[0] + 2 * math.fsum(vals[2:n_top + 1:2])
    return [v / norm for v in vals[: n_top + 1]]


def _middle(x: float):
    j = _miller(x)
    lg = math.log(0.5 * x) + EULER_GAMMA
    n_top = len(j) - 1
    # Y0 = (2/pi)(ln(x/2) + gamma) J0 - (4/pi) sum_{k>=1} (-1)^k J_2k / k
    s0 = math.fsum((-1) ** k * j[2 * k] / k for k in range(1, n_top // 2 + 1))
    y0 = _TWO_OVER_PI * lg * j[0] - 2 * _TWO_OVER_PI * s0
    # Y1 = -Y0' with J_2k' = (J_{2k-1} - J_{2k+1}) / 2
    s1 = math.fsum((-1) ** k * (j[2 * k - 1] - j[2 * k + 1]) / k for k in range(1, n_top // 2))
    y1 = _TWO_OVER_PI * (lg * j[1] - j[0] / x + s1)
    return j[0], j[1], y0, y1


# ---------------------------------------------------------------- asymptotic

def _pq(nu: int, x: float):
    mu = 4.0 * nu * nu
    p, q = 1.0, 0.0
    term = 1.0
    k = 1
    last = math.inf
    while True:
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) >= last or abs(term) < 1e-17:
            break
        last = abs(term)
        if k % 2:
            q += term if (k // 2) % 2 == 0 else -term
        else:
            p += -term if (k // 2) % 2 else term
        k += 1
    return p, q


def _large(x: float):
    amp = math.sqrt(_TWO_OVER_PI / x)
    c, s = math.cos(x), math.sin(x)
    r = math.sqrt(0.5)
    # x - pi/4 and x - 3pi/4 without subtracting a rounded pi
    c0, s0 = r * (c + s), r * (s - c)
    c1, s1 = r * (s - c), -r * (s + c)
    p0, q0 = _pq(0, x)
    p1, q1 = _pq(1, x)
    return (amp * (p0 * c0 - q0 * s0), amp * (p1 * c1 - q1 * s1),
            amp * (p0 * s0 + q0 * c0), amp * (p1 * s1 + q1 * c1))


def _all(x: float):
    if x <= SERIES_MAX:
        return _small(x)
    if x <= ASYMPTOTIC_MIN:
        return _middle(x)
    return _large(x)


def bessel_j0(x: float) -> float:
    x = _check(x, False)
    if x == 0:
        return 1.0
    if x <= SERIES_MAX:
        return _series(x)[0]
    return _all(x)[0]


def bessel_j1(x: float) -> float:
    x = _check(x, False)
    if x == 0:
        return 0.0
    if x <= SERIES_MAX:
        return _series(x)[1]
    return _all(x)[1]


def bessel_y0(x: float) -> float:
    return _all(_check(x, True))[2]


def bessel_y1(x: float) -> float:
    return _all(_check(x, True))[3]


def bessel_all(x: float):
    """(J0, J1, Y0, Y1) at x > 0 in one pass."""
    return _all(_check(x, True))


FUNCTIONS = {"j0": bessel_j0, "j1": bessel_j1, "y0": bessel_y0, "y1": bessel_y1}

j0_array = np.vectorize(bessel_j0, otypes=[float])
j1_array = np.vectorize(bessel_j1, otypes=[float])
y0_array = np.vectorize(bessel_y0, otypes=[float])
y1_array = np.vectorize(bessel_y1, otypes=[float])
