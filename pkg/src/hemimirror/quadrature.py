"""Numerical integration over sphere regions and balls, plus a Monte Carlo referee.

Solid-angle integrals are nested: adaptive Gauss-Kronrod (QUADPACK) in the
polar angle and an equispaced trapezoid rule in the azimuth, which is exact
for trigonometric polynomials of degree below ``phi_order``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .core import unit_vectors


class NonConvergence(RuntimeError):
    """An integral missed its tolerance; the best estimate is attached."""

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_subdivisions: int = 50
    phi_order: int = 256
    ball_order: int = 24
    mc_samples: int = 1_000_000
    mc_seed: int | None = None

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if min(self.phi_order, self.ball_order) < 4:
            raise ValueError("quadrature orders must be >= 4")
        if self.max_subdivisions < 1 or self.mc_samples < 2:
            raise ValueError("max_subdivisions >= 1 and mc_samples >= 2 required")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class MCResult:
    value: float
    stderr: float

    def __float__(self):
        return float(self.value)


def ratio(num: QuadResult, den: QuadResult) -> QuadResult:
    """Quotient with first-order error propagation."""
    r = num.value / den.value
    err = num.error / abs(den.value) + abs(r) * den.error / abs(den.value)
    return QuadResult(r, err)


@dataclass(frozen=True)
class AngularDomain:
    """Union of polar-angle bands, each covering the full azimuth."""

    name: str
    bands: tuple

    @property
    def solid_angle(self) -> float:
        return sum(2 * math.pi * (math.cos(a) - math.cos(b)) for a, b in self.bands)


def cone_pair(theta_h: float) -> AngularDomain:
    """The hole cone around +z and the opposite cone around -z."""
    return AngularDomain("cone_pair", ((0.0, theta_h), (math.pi - theta_h, math.pi)))


def control_band(theta_h: float) -> AngularDomain:
    """Upper-hemisphere band theta in [theta_h, pi/2], the only side light leaves through."""
    return AngularDomain("control_band", ((theta_h, math.pi / 2),))


def mirror_band(theta_h: float) -> AngularDomain:
    """Lower-hemisphere image of :func:`control_band`."""
    return AngularDomain("mirror_band", ((math.pi / 2, math.pi - theta_h),))


def full_sphere() -> AngularDomain:
    return AngularDomain("full_sphere", ((0.0, math.pi),))


def _phi_nodes(order):
    return 2 * math.pi * np.arange(order) / order


def integrate_region(f, domain: AngularDomain, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Integrate ``f(n)`` over ``domain``; ``f`` takes unit vectors shaped ``(3, m)``."""
    phi = _phi_nodes(spec.phi_order)

    def ring(theta):
        vals = np.asarray(f(unit_vectors(theta, phi)), dtype=float)
        return 2 * math.pi * vals.mean() * math.sin(theta)

    total, err = 0.0, 0.0
    for a, b in domain.bands:
        if b <= a:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, e, info = integrate.quad(ring, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
                                          limit=spec.max_subdivisions, full_output=1)[:3]
        total += val
        err += e
        if e > max(spec.abs_tol, spec.rel_tol * abs(val)) * 10:
            raise NonConvergence(f"polar integral on [{a:.6g}, {b:.6g}] did not converge",
                                 estimate=total, error=err)
    return QuadResult(total, err)


def _ball_rule(R0, order):
    r, wr = np.polynomial.legendre.leggauss(order)
    r = 0.5 * R0 * (r + 1)
    wr = 0.5 * R0 * wr * r**2
    mu, wmu = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = _phi_nodes(nphi)
    wphi = np.full(nphi, 2 * math.pi / nphi)
    R, M, P = np.meshgrid(r, mu, phi, indexing="ij")
    W = wr[:, None, None] * wmu[None, :, None] * wphi[None, None, :]
    st = np.sqrt(1 - M**2)
    x = np.stack([R * st * np.cos(P), R * st * np.sin(P), R * M]).reshape(3, -1)
    return x, W.reshape(-1)


def integrate_ball(f, R0: float, spec: QuadratureSpec = DEFAULT_SPEC, center=None):
    """Integrate ``f(x)`` over the ball of radius ``R0``.

    ``f`` receives positions shaped ``(3, m)`` and may return any array whose
    last axis has length ``m``; the result keeps the leading axes. Complex
    integrands are supported. Returns ``(value, error_estimate)``.
    """
    if R0 < 0:
        raise ValueError("R0 must be non-negative")
    if R0 == 0:
        return 0.0, 0.0

    def rule(order):
        x, w = _ball_rule(R0, order)
        if center is not None:
            x = x + np.asarray(center, float).reshape(3, 1)
        return np.asarray(f(x)) @ w

    fine = rule(spec.ball_order)
    coarse = rule(max(4, spec.ball_order - 4))
    err = np.abs(fine - coarse)
    if np.any(err > spec.abs_tol + spec.rel_tol * np.abs(fine)):
        raise NonConvergence("ball quadrature did not converge; raise ball_order",
                             estimate=fine, error=err)
    return fine, err


@dataclass(frozen=True)
class BallDomain:
    R0: float

    @property
    def volume(self) -> float:
        return 4 * math.pi * self.R0**3 / 3


_MC_CHUNK = 1 << 17


def monte_carlo_referee(f, domain, spec: QuadratureSpec) -> MCResult:
    """Plain Monte Carlo estimate with standard error, deterministic per ``mc_seed``."""
    if spec.mc_seed is None:
        raise ValueError("monte_carlo_referee needs an explicit mc_seed")
    rng = np.random.default_rng(spec.mc_seed)
    if isinstance(domain, BallDomain):
        measure = domain.volume

        def draw(m):
            v = rng.standard_normal((3, m))
            v /= np.linalg.norm(v, axis=0)
            return v * domain.R0 * rng.random(m) ** (1 / 3)
    else:
        measure = domain.solid_angle
        lo = np.array([math.cos(b) for _, b in domain.bands])
        hi = np.array([math.cos(a) for a, _ in domain.bands])
        prob = (hi - lo) / (hi - lo).sum()

        def draw(m):
            idx = rng.choice(len(prob), size=m, p=prob)
            mu = lo[idx] + (hi[idx] - lo[idx]) * rng.random(m)
            phi = 2 * math.pi * rng.random(m)
            return unit_vectors(np.arccos(np.clip(mu, -1, 1)), phi)

    sums = []
    sq = []
    remaining = spec.mc_samples
    while remaining > 0:
        m = min(_MC_CHUNK, remaining)
        vals = np.asarray(f(draw(m)), dtype=float)
        sums.append(vals.sum())
        sq.append((vals**2).sum())
        remaining -= m
    n = spec.mc_samples
    mean = math.fsum(sums) / n
    var = max(math.fsum(sq) / n - mean**2, 0.0) * n / (n - 1)
    return MCResult(measure * mean, measure * math.sqrt(var / n))
