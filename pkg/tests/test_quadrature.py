import math

import numpy as np
import pytest

from hemimirror.core import dipole_pattern
from hemimirror.quadrature import (BallDomain, NonConvergence, QuadratureSpec, QuadResult, cone_pair, control_band,
                                   full_sphere, integrate_ball, integrate_region, mirror_band,
                                   monte_carlo_referee, ratio)


def test_sphere_area():
    assert integrate_region(lambda n: np.ones(n.shape[1:]), full_sphere()).value == pytest.approx(4 * math.pi,
                                                                                                  rel=1e-12)


def test_moment_identity():
    # <n_z^2> - <n_z^2 n_x^2> = 1/3 - 1/15 = 4/15, times 4 pi
    res = integrate_region(lambda n: n[2] ** 2 * (1 - n[0] ** 2), full_sphere())
    assert res.value == pytest.approx(16 * math.pi / 15, rel=1e-12)


def test_bands_tile_the_sphere():
    th = 0.7
    one = lambda n: np.ones(n.shape[1:])
    parts = sum(integrate_region(one, d).value for d in (cone_pair(th), control_band(th), mirror_band(th)))
    assert parts == pytest.approx(4 * math.pi, rel=1e-12)
    assert cone_pair(th).solid_angle == pytest.approx(4 * math.pi * (1 - math.cos(th)))


def test_ball_constant_and_second_moment():
    R0 = 0.7
    vol, _ = integrate_ball(lambda x: np.ones(x.shape[1]), R0)
    assert vol == pytest.approx(4 * math.pi * R0**3 / 3, rel=1e-12)
    n = np.array([0.3, -0.4, math.sqrt(0.75)])
    m2, _ = integrate_ball(lambda x: (n @ x) ** 2, R0)
    assert m2 == pytest.approx(4 * math.pi * R0**5 / 15, rel=1e-12)


def test_ball_odd_function_vanishes():
    val, _ = integrate_ball(lambda x: x[0] * x[1] ** 2 + x[2] ** 3, 1.3)
    assert abs(val) < 1e-12


def test_ball_nonconvergence_is_raised():
    spec = QuadratureSpec(rel_tol=1e-15, abs_tol=1e-300, ball_order=8)
    with pytest.raises(NonConvergence):
        integrate_ball(lambda x: np.exp(5j * x[0]), 3.0, spec)


def test_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(phi_order=2)


def test_ratio_propagates_error():
    r = ratio(QuadResult(2.0, 0.02), QuadResult(4.0, 0.04))
    assert r.value == 0.5
    assert r.error == pytest.approx(0.01)


def test_monte_carlo_agrees_with_quadrature():
    spec = QuadratureSpec(mc_samples=200_000, mc_seed=7)
    mc = monte_carlo_referee(dipole_pattern, full_sphere(), spec)
    assert abs(mc.value - 8 * math.pi / 3) < 3 * mc.stderr


def test_monte_carlo_cap_area():
    spec = QuadratureSpec(mc_samples=100_000, mc_seed=3)
    mc = monte_carlo_referee(lambda n: np.ones(n.shape[1]), cone_pair(math.pi / 3), spec)
    assert abs(mc.value - 2 * math.pi) < 3 * mc.stderr + 1e-12


def test_monte_carlo_ball_second_moment():
    spec = QuadratureSpec(mc_samples=400_000, mc_seed=11)
    R0 = 1.0
    mc = monte_carlo_referee(lambda x: x[2] ** 2, BallDomain(R0), spec)
    assert abs(mc.value - 4 * math.pi / 15) < 3 * mc.stderr


def test_monte_carlo_is_deterministic():
    spec = QuadratureSpec(mc_samples=50_000, mc_seed=42)
    a = monte_carlo_referee(dipole_pattern, full_sphere(), spec)
    b = monte_carlo_referee(dipole_pattern, full_sphere(), spec)
    assert a == b


def test_monte_carlo_requires_seed():
    with pytest.raises(ValueError):
        monte_carlo_referee(dipole_pattern, full_sphere(), QuadratureSpec(mc_samples=10))
