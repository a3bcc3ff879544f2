"""Dipole-density models and their integrals against propagation kernels.

Four shapes are supported:

* :class:`PointDipole` - ``rho = p delta(x)``
* :class:`UniformBall` - constant density inside radius ``R0``
* :class:`Displaced` - any of the others translated by ``x0``
* :class:`HarmonicAsymmetry` - an angular density on the unit shell made of
  the ``l = 0`` and ``l = 1`` spherical harmonics, oriented along
  ``(theta1, phi1)``

Two independent routes evaluate ``int rho(x) K(x) d^3x``. :func:`amplitude`
uses closed-form moments of the plane-wave decomposition of the kernel
(ball form factor, shell Bessel functions, polynomial moments), and
:func:`integrate_density` uses numerical quadrature of the pointwise kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb, factorial

import numpy as np
from scipy import special

from .core import DEFAULT_ILLUMINATION, Illumination, as_unit_vectors, unit_vectors
from .greens import GreenKind, plane_wave_terms
from .quadrature import DEFAULT_SPEC, QuadratureSpec, integrate_ball


class UnsupportedScatterer(TypeError):
    pass


@dataclass(frozen=True)
class PointDipole:
    p: float = 1.0


@dataclass(frozen=True)
class UniformBall:
    """Homogeneous sphere. Outside ``R0`` the density is zero."""

    R0: float
    p: float = 1.0

    def __post_init__(self):
        if self.R0 < 0:
            raise ValueError("R0 must be non-negative")

    @classmethod
    def from_density(cls, rho: float, R0: float) -> "UniformBall":
        return cls(R0, 4 * math.pi * rho * R0**3 / 3)

    @property
    def density(self) -> float:
        return 3 * self.p / (4 * math.pi * self.R0**3)


@dataclass(frozen=True)
class Displaced:
    inner: object
    x0: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(c) for c in np.asarray(self.x0, float).reshape(3)))


@dataclass(frozen=True)
class HarmonicAsymmetry:
    """First-order harmonic density ``p/(2 sqrt(pi)) (C00 Y00 + sum_m C1m Y1m)`` on the unit shell.

    The integral of the density is ``p * C00``, so ``C00 = 1`` makes ``p`` the
    total moment and ``c0`` the asymmetry parameter ``c0/C00``. Positivity of
    the density is not enforced.
    """

    p: float = 1.0
    C00: float = 1.0
    c0: float = 0.3
    theta1: float = 0.0
    phi1: float = 0.0

    @property
    def axis(self) -> np.ndarray:
        return unit_vectors(self.theta1, self.phi1)

    @property
    def coefficients(self) -> np.ndarray:
        """``(C_{1,-1}, C_{10}, C_{11})`` for the orientation ``(theta1, phi1)``."""
        s, c = math.sin(self.theta1), math.cos(self.theta1)
        e = np.exp(1j * self.phi1)
        return self.c0 * np.array([s * e / math.sqrt(2), c, -s * np.conj(e) / math.sqrt(2)])

    @property
    def _shell_weights(self):
        # density = a + b (axis . x_hat)
        a = self.p * self.C00 / (4 * math.pi)
        b = self.p * self.c0 * math.sqrt(3) / (4 * math.pi)
        return a, b


def spherical_harmonic(l: int, m: int, theta, phi):
    """Complex ``Y_lm`` for ``l <= 1`` with the Condon-Shortley phase."""
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    if l == 0 and m == 0:
        return np.full(np.broadcast(theta, phi).shape, 0.5 / math.sqrt(math.pi), dtype=complex)
    if l == 1 and m == 0:
        return math.sqrt(3 / (4 * math.pi)) * np.cos(theta) + 0j * phi
    if l == 1 and abs(m) == 1:
        return -m * math.sqrt(3 / (8 * math.pi)) * np.sin(theta) * np.exp(1j * m * phi)
    raise ValueError("only l <= 1 harmonics are modeled")


def shell_density(sc: HarmonicAsymmetry, theta, phi):
    """Evaluate the harmonic density at polar/azimuthal angles."""
    c_m1, c_0, c_p1 = sc.coefficients
    rho = sc.C00 * spherical_harmonic(0, 0, theta, phi)
    rho = rho + c_m1 * spherical_harmonic(1, -1, theta, phi)
    rho = rho + c_0 * spherical_harmonic(1, 0, theta, phi)
    rho = rho + c_p1 * spherical_harmonic(1, 1, theta, phi)
    return (sc.p / (2 * math.sqrt(math.pi)) * rho).real


def decompose_symmetric_antisymmetric(sc: HarmonicAsymmetry):
    """Split the density into its ``Y00`` (even) and ``Y1m`` (odd) parts.

    Returns two callables of unit vectors shaped ``(3, ...)``.
    """
    a, b = sc._shell_weights
    axis = sc.axis

    def symmetric(n):
        n = as_unit_vectors(n)
        return np.full(n.shape[1:], a)

    def antisymmetric(n):
        return b * np.tensordot(axis, as_unit_vectors(n), axes=(0, 0))

    return symmetric, antisymmetric


def total_dipole_moment(sc) -> float:
    if isinstance(sc, (PointDipole, UniformBall)):
        return sc.p
    if isinstance(sc, Displaced):
        return total_dipole_moment(sc.inner)
    if isinstance(sc, HarmonicAsymmetry):
        return sc.p * sc.C00
    raise UnsupportedScatterer(type(sc).__name__)


def gamma_vector(sc, n):
    """Geometric factor ``int grad(rho) (n.x) d^3x`` of a centered symmetric scatterer.

    Integration by parts gives ``-p n`` for any density that vanishes at
    infinity; for the ball it is the surface term ``-rho R0^3 (4 pi/3) n``.
    The point dipole is the ``R0 -> 0`` limit.
    """
    if not isinstance(sc, (PointDipole, UniformBall)):
        raise UnsupportedScatterer("gamma is defined for centered symmetric scatterers only")
    return -sc.p * as_unit_vectors(n)


# --- closed-form moments ---------------------------------------------------

def _ball_form_factor(u):
    u = np.asarray(u, float)
    out = np.empty_like(u)
    small = u < 1e-2
    us = u[small]
    out[small] = 1 - us**2 / 10 + us**4 / 280 - us**6 / 15120
    ul = u[~small]
    out[~small] = 3 * (np.sin(ul) - ul * np.cos(ul)) / ul**3
    return out


def _sinc_j1(u):
    """``j1(u)/u`` with its small-argument limit 1/3."""
    u = np.asarray(u, float)
    out = np.empty_like(u)
    small = u < 1e-2
    out[small] = 1 / 3 - u[small] ** 2 / 30 + u[small] ** 4 / 840
    out[~small] = special.spherical_jn(1, u[~small]) / u[~small]
    return out


def _power_moment(sc, q, j):
    """``int rho(x) (q.x)^j d^3x`` for a centered base scatterer; ``q`` shaped (3, ...)."""
    qn = np.linalg.norm(q, axis=0)
    if isinstance(sc, PointDipole):
        return np.full(qn.shape, sc.p if j == 0 else 0.0)
    if isinstance(sc, UniformBall):
        if j % 2:
            return np.zeros(qn.shape)
        return sc.p * (qn * sc.R0) ** j * 3 / ((j + 1) * (j + 3))
    if isinstance(sc, HarmonicAsymmetry):
        a, b = sc._shell_weights
        if j % 2 == 0:
            return a * 4 * math.pi * qn**j / (j + 1)
        aq = np.tensordot(sc.axis, q, axes=(0, 0))
        return b * 4 * math.pi * qn ** (j - 1) * aq / (j + 2)
    raise UnsupportedScatterer(type(sc).__name__)


def _plane_wave(sc, q):
    """``int rho(x) exp(i q.x) d^3x`` for a centered base scatterer."""
    qn = np.linalg.norm(q, axis=0)
    if isinstance(sc, PointDipole):
        return np.full(qn.shape, sc.p, dtype=complex)
    if isinstance(sc, UniformBall):
        return sc.p * _ball_form_factor(qn * sc.R0) + 0j
    if isinstance(sc, HarmonicAsymmetry):
        a, b = sc._shell_weights
        aq = np.tensordot(sc.axis, q, axes=(0, 0))
        return 4 * math.pi * (a * special.spherical_jn(0, qn) + 1j * b * aq * _sinc_j1(qn))
    raise UnsupportedScatterer(type(sc).__name__)


def _unwrap(sc):
    shift = np.zeros(3)
    while isinstance(sc, Displaced):
        shift = shift + np.asarray(sc.x0)
        sc = sc.inner
    return sc, shift


def _truncated_plane_wave(base, shift, q, order):
    """``int rho(x - shift) T_order(i q.x) d^3x``."""
    if order is None:
        qs = np.tensordot(shift, q, axes=(0, 0))
        return np.exp(1j * qs) * _plane_wave(base, q)
    qs = np.tensordot(shift, q, axes=(0, 0))
    total = 0j
    for j in range(order + 1):
        # (q.(y + shift))^j expanded binomially over moments of the base density
        mj = sum(comb(j, i) * qs ** (j - i) * _power_moment(base, q, i) for i in range(j + 1))
        total = total + (1j) ** j / factorial(j) * mj
    return total


def amplitude(sc, n, kind: GreenKind, ill: Illumination = DEFAULT_ILLUMINATION):
    """Closed-form ``int rho(x) exp(ik.x) g(n, x) d^3x`` for the kernel ``kind``."""
    base, shift = _unwrap(sc)
    return sum(c * _truncated_plane_wave(base, shift, q, order)
               for c, q, order in plane_wave_terms(kind, n, ill))


# --- quadrature route ------------------------------------------------------

def _shell_rule(spec: QuadratureSpec):
    mu, w = np.polynomial.legendre.leggauss(2 * spec.ball_order)
    nphi = spec.phi_order
    phi = 2 * math.pi * np.arange(nphi) / nphi
    M, P = np.meshgrid(mu, phi, indexing="ij")
    W = (w[:, None] * np.full(nphi, 2 * math.pi / nphi)[None, :]).reshape(-1)
    return np.arccos(M).reshape(-1), P.reshape(-1), W


def integrate_density(sc, kern, spec: QuadratureSpec = DEFAULT_SPEC):
    """Numerically evaluate ``int rho(x) kern(x) d^3x``.

    ``kern`` maps positions shaped ``(3, m)`` to arrays whose last axis has
    length ``m``. The harmonic shell is integrated over the unit sphere.
    """
    if isinstance(sc, PointDipole):
        return sc.p * np.asarray(kern(np.zeros((3, 1))))[..., 0]
    if isinstance(sc, UniformBall):
        if sc.R0 == 0:
            return sc.p * np.asarray(kern(np.zeros((3, 1))))[..., 0]
        value, _ = integrate_ball(kern, sc.R0, spec)
        return sc.density * value
    if isinstance(sc, Displaced):
        x0 = np.asarray(sc.x0).reshape(3, 1)
        return integrate_density(sc.inner, lambda x: kern(x + x0), spec)
    if isinstance(sc, HarmonicAsymmetry):
        theta, phi, w = _shell_rule(spec)
        x = unit_vectors(theta, phi)
        return np.asarray(kern(x)) @ (shell_density(sc, theta, phi) * w)
    raise UnsupportedScatterer(type(sc).__name__)
