import math

import numpy as np
import pytest

from liesym.errors import DomainError
from liesym.numerics import bessel_all, bessel_j0, bessel_j1, bessel_y0, bessel_y1
from liesym.numerics.bessel import ASYMPTOTIC_MIN, SERIES_MAX, j0_array, y1_array

from oracles import bessel_series, bisect_zero, log_points

POINTS = log_points(1e-3, 50.0, 500)


def test_values_at_origin():
    assert bessel_j0(0) == 1.0
    assert bessel_j1(0) == 0.0


@pytest.mark.parametrize("index, fn", list(enumerate([bessel_j0, bessel_j1, bessel_y0, bessel_y1])))
def test_against_series_oracle(index, fn):
    for x in POINTS:
        ref = bessel_series(x)[index]
        assert abs(fn(x) - ref) <= 1e-10 * abs(ref), x


@pytest.mark.parametrize("x", [SERIES_MAX, ASYMPTOTIC_MIN])
def test_regime_boundaries(x):
    for v in (x * (1 - 1e-12), x, x * (1 + 1e-12)):
        for got, ref in zip(bessel_all(v), bessel_series(v)):
            assert abs(got - ref) <= 1e-10 * abs(ref)


def test_first_zero():
    z = bisect_zero(lambda v: bessel_series(v)[0], 2.0, 3.0)
    assert abs(z - 2.404825557695773) < 1e-10
    assert abs(bessel_j0(2.404825557695773)) < 1e-10


@pytest.mark.parametrize("x", [0.3, 1.0, 3.9, 4.1, 7.5, 12.0, 24.0, 26.0, 40.0])
def test_derivative_relations(x):
    h = 1e-5 * max(1.0, x)
    dj0 = (bessel_j0(x + h) - bessel_j0(x - h)) / (2 * h)
    dy0 = (bessel_y0(x + h) - bessel_y0(x - h)) / (2 * h)
    assert abs(dj0 + bessel_j1(x)) <= 1e-6 * max(abs(bessel_j1(x)), 1e-2)
    assert abs(dy0 + bessel_y1(x)) <= 1e-6 * max(abs(bessel_y1(x)), 1e-2)


@pytest.mark.parametrize("x", [0.5, 1.0, 5.0, 20.0, 30.0, 50.0])
def test_wronskian(x):
    j0, j1, y0, y1 = bessel_all(x)
    # J0 Y0' - J0' Y0 with J0' = -J1, Y0' = -Y1
    assert abs(-j0 * y1 + j1 * y0 - 2 / (math.pi * x)) < 1e-9


def test_bessel_equation_residual():
    for x in np.linspace(0.1, 30, 300):
        j0, j1, _, _ = bessel_all(x)
        d2 = -j0 + j1 / x
        assert abs(x * x * d2 - x * j1 + x * x * j0) < 1e-8 * max(1.0, x)


def test_domain_errors():
    for fn in (bessel_j0, bessel_j1, bessel_y0, bessel_y1):
        with pytest.raises(DomainError):
            fn(-1.0)
        with pytest.raises(DomainError):
            fn(math.nan)
    for fn in (bessel_y0, bessel_y1, bessel_all):
        with pytest.raises(DomainError):
            fn(0.0)


def test_array_versions():
    xs = np.array([0.5, 5.0, 30.0])
    assert np.array_equal(j0_array(xs), [bessel_j0(v) for v in xs])
    assert y1_array(xs).shape == (3,)
