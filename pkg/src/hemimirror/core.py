"""Directions, illumination, region geometry and the free-space dipole pattern.

Geometry follows the mirror frame used throughout the package: the mirror
axis is z, the illuminating beam travels along +y and is polarized along +x.
Angular functions accept either a :class:`Direction` or an array of unit
vectors with shape ``(3, ...)`` and broadcast over the trailing axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import constants

_UNIT_TOL = 1e-12


class EmptyRegion(ValueError):
    """An angular region that contains no solid angle for the requested aperture."""


@dataclass(frozen=True)
class Direction:
    """A point on the unit sphere, ``theta`` polar and ``phi`` azimuthal (radians)."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi:
            raise ValueError(f"theta={self.theta} outside [0, pi]")
        phi = self.phi % (2 * math.pi)
        if self.theta in (0.0, math.pi):
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @property
    def unit(self) -> np.ndarray:
        st = math.sin(self.theta)
        return np.array([st * math.cos(self.phi), st * math.sin(self.phi), math.cos(self.theta)])

    @classmethod
    def from_vector(cls, v) -> "Direction":
        v = np.asarray(v, dtype=float)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("zero vector has no direction")
        x, y, z = v / norm
        theta = math.acos(min(1.0, max(-1.0, z)))
        if math.hypot(x, y) < _UNIT_TOL:
            return cls(0.0 if z > 0 else math.pi, 0.0)
        return cls(theta, math.atan2(y, x))


def as_unit_vectors(n) -> np.ndarray:
    """Return ``n`` as an array of unit vectors with the Cartesian axis first."""
    if isinstance(n, Direction):
        return n.unit
    return np.asarray(n, dtype=float)


def unit_vectors(theta, phi) -> np.ndarray:
    """Unit vectors for broadcastable ``theta``/``phi`` arrays, shape ``(3, ...)``."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _unit3(v, name):
    v = np.asarray(v, dtype=float).reshape(3)
    if abs(np.linalg.norm(v) - 1.0) > _UNIT_TOL:
        raise ValueError(f"{name} must be a unit vector, got |{name}|={np.linalg.norm(v)}")
    return tuple(float(c) for c in v)


@dataclass(frozen=True)
class Illumination:
    """Plane-wave drive: wavenumber, propagation direction and linear polarization."""

    k_mag: float = 1.0
    k_hat: tuple = (0.0, 1.0, 0.0)
    pol: tuple = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if self.k_mag <= 0:
            raise ValueError("k_mag must be positive")
        k_hat = _unit3(self.k_hat, "k_hat")
        pol = _unit3(self.pol, "pol")
        if abs(np.dot(k_hat, pol)) > _UNIT_TOL:
            raise ValueError("polarization must be transverse to the propagation direction")
        object.__setattr__(self, "k_hat", k_hat)
        object.__setattr__(self, "pol", pol)

    @property
    def k_hat_vec(self) -> np.ndarray:
        return np.array(self.k_hat)

    @property
    def pol_vec(self) -> np.ndarray:
        return np.array(self.pol)

    @property
    def wavevector(self) -> np.ndarray:
        return self.k_mag * self.k_hat_vec

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k_mag


@dataclass(frozen=True)
class ConePairRegion:
    """Two cones of half-angle ``theta_h`` around +z and -z (the hole and its antipode)."""

    theta_h: float

    def __post_init__(self):
        if not 0.0 <= self.theta_h <= math.pi / 2:
            raise ValueError(f"theta_h={self.theta_h} outside [0, pi/2]")

    @classmethod
    def from_na(cls, na: float) -> "ConePairRegion":
        if not 0.0 <= na <= 1.0:
            raise ValueError(f"NA={na} outside [0, 1]")
        return cls(math.asin(na))

    @property
    def na(self) -> float:
        return math.sin(self.theta_h)


@dataclass(frozen=True)
class NormalizationContext:
    """Unit system. Dimensionless mode sets p = c = eps0 = hbar = 1."""

    mode: str = "dimensionless"
    c: float = 1.0
    eps0: float = 1.0
    hbar: float = 1.0
    p: float = 1.0

    def __post_init__(self):
        if self.mode not in ("dimensionless", "physical"):
            raise ValueError(f"unknown normalization mode {self.mode!r}")

    @classmethod
    def physical(cls, p: float, c: float = constants.c, eps0: float = constants.epsilon_0,
                 hbar: float = constants.hbar) -> "NormalizationContext":
        return cls("physical", c=c, eps0=eps0, hbar=hbar, p=p)


DIMENSIONLESS = NormalizationContext()
DEFAULT_ILLUMINATION = Illumination()


def dipole_pattern(n, ill: Illumination = DEFAULT_ILLUMINATION):
    """Angular factor ``1 - (n.p)^2`` of a linearly polarized point dipole."""
    n = as_unit_vectors(n)
    proj = np.tensordot(ill.pol_vec, n, axes=(0, 0))
    return 1.0 - proj**2


def dipole_prefactor(ill: Illumination = DEFAULT_ILLUMINATION,
                     ctx: NormalizationContext = DIMENSIONLESS, p: float | None = None) -> float:
    """Prefactor ``p^2 c |k|^4 / (32 pi^2 eps0)`` multiplying :func:`dipole_pattern`."""
    p = ctx.p if p is None else p
    return p**2 * ctx.c * ill.k_mag**4 / (32 * math.pi**2 * ctx.eps0)


def dipole_power_density(n, ill: Illumination = DEFAULT_ILLUMINATION,
                         ctx: NormalizationContext = DIMENSIONLESS):
    """Free-space dP/dOmega of the point dipole."""
    return dipole_prefactor(ill, ctx) * dipole_pattern(n, ill)


def total_dipole_power(ill: Illumination = DEFAULT_ILLUMINATION,
                       ctx: NormalizationContext = DIMENSIONLESS, p: float | None = None) -> float:
    """P_dip = p^2 c |k|^4 / (12 pi eps0), i.e. the prefactor times 8 pi / 3."""
    p = ctx.p if p is None else p
    return p**2 * ctx.c * ill.k_mag**4 / (12 * math.pi * ctx.eps0)


def solid_angle_fraction(region: ConePairRegion) -> float:
    """Fraction of the full 4 pi covered by both cones."""
    return 1.0 - math.cos(region.theta_h)
