"""Photon-recoil back action and position imprecision with a hollow mirror.

Light leaves only through the two cones of half-angle ``theta_h`` around the
mirror axis, so both the recoil force noise and the collected position
information are integrals over that cone pair. Their angular weights are
reciprocal, which makes the imprecision-back-action product independent of
the aperture and of the displacement direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (DEFAULT_ILLUMINATION, DIMENSIONLESS, EmptyRegion, Illumination, NormalizationContext,
                   as_unit_vectors, dipole_power_density, total_dipole_power)
from .quadrature import DEFAULT_SPEC, QuadratureSpec, cone_pair, integrate_region

AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class SingularDirection(ZeroDivisionError):
    """The direction carries no information about the displacement (``s`` diverges)."""


@dataclass(frozen=True)
class BackActionResult:
    direction: tuple
    theta_h: float
    value: float
    normalized: float
    method: str
    error: float = 0.0


@dataclass(frozen=True)
class ImprecisionResult:
    direction: tuple
    theta_h: float
    value: float
    method: str
    error: float = 0.0


def _direction(x0_hat):
    if isinstance(x0_hat, str):
        x0_hat = AXES[x0_hat]
    v = np.asarray(x0_hat, float).reshape(3)
    if abs(np.linalg.norm(v) - 1) > 1e-12:
        raise ValueError("displacement direction must be a unit vector")
    return v


def shot_noise_psd(dP, ill: Illumination = DEFAULT_ILLUMINATION, ctx: NormalizationContext = DIMENSIONLESS):
    """Shot-noise PSD of the radiated power, ``hbar |k| c dP / (2 pi)``."""
    return ctx.hbar * ill.k_mag * ctx.c / (2 * math.pi) * np.asarray(dP)


def recoil_prefactor(ill: Illumination = DEFAULT_ILLUMINATION, ctx: NormalizationContext = DIMENSIONLESS) -> float:
    return ctx.hbar * ill.k_mag / (2 * math.pi * ctx.c)


def differential_back_action(n, x0_hat, ill: Illumination = DEFAULT_ILLUMINATION,
                             ctx: NormalizationContext = DIMENSIONLESS):
    """Force-noise PSD per solid angle along ``x0_hat`` from light scattered into ``n``."""
    x0 = _direction(x0_hat)
    proj = np.tensordot(x0, as_unit_vectors(n), axes=(0, 0))
    return recoil_prefactor(ill, ctx) * proj**2 * dipole_power_density(n, ill, ctx)


def back_action_normalization(ill: Illumination = DEFAULT_ILLUMINATION,
                              ctx: NormalizationContext = DIMENSIONLESS) -> float:
    """Free-space back action along the axis orthogonal to polarization and beam, ``2 hbar |k| P_dip / (10 pi c)``."""
    return 2 * ctx.hbar * ill.k_mag * total_dipole_power(ill, ctx) / (10 * math.pi * ctx.c)


def total_back_action(x0_hat, theta_h: float, ill: Illumination = DEFAULT_ILLUMINATION,
                      ctx: NormalizationContext = DIMENSIONLESS,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> BackActionResult:
    """Back action integrated over both cones of half-angle ``theta_h``."""
    if not 0.0 <= theta_h <= math.pi / 2:
        raise ValueError("theta_h must lie in [0, pi/2]")
    x0 = _direction(x0_hat)
    if theta_h == 0:
        return BackActionResult(tuple(x0), 0.0, 0.0, 0.0, "quadrature")
    res = integrate_region(lambda n: differential_back_action(n, x0, ill, ctx), cone_pair(theta_h), spec)
    norm = back_action_normalization(ill, ctx)
    return BackActionResult(tuple(x0), theta_h, res.value, res.value / norm, "quadrature", res.error)


def back_action_expansion(axis: str, theta):
    """Small-aperture polynomials of the normalized back action (valid for theta below ~0.5)."""
    t = np.asarray(theta, float)
    if axis == "x":
        return 15 / 16 * t**4
    if axis == "y":
        return 15 / 32 * t**4
    if axis == "z":
        return 15 / 8 * t**2 - 25 / 16 * t**4
    raise ValueError(f"unknown axis {axis!r}")


def back_action_closed_form(axis: str, theta):
    """Published closed forms of the normalized back action, evaluated as printed.

    The x and y expressions repeat the ``cos(theta)`` harmonic and do not
    reproduce the quadrature; :func:`validation_report` quantifies the gap.
    """
    t = np.asarray(theta, float)
    c1, c2, c3 = np.cos(t), np.cos(2 * t), np.cos(3 * t)
    s2 = np.sin(t / 2) ** 2
    if axis == "x":
        return s2 / 32 * (100 + 95 * c1 + 36 * c1 + 9 * c3)
    if axis == "y":
        return s2 / 32 * (140 + 85 * c1 + 12 * c1 + 3 * c3)
    if axis == "z":
        return 1 - c1 * (13 + 3 * c2) / 16
    raise ValueError(f"unknown axis {axis!r}")


def information_density(n, x0_hat, ill: Illumination = DEFAULT_ILLUMINATION,
                        ctx: NormalizationContext = DIMENSIONLESS):
    """Inverse imprecision ``1/s``; finite everywhere, zero where ``n`` is orthogonal to ``x0_hat``."""
    x0 = _direction(x0_hat)
    proj = np.tensordot(x0, as_unit_vectors(n), axes=(0, 0))
    return 32 * math.pi * ill.k_mag / (ctx.hbar * ctx.c) * proj**2 * dipole_power_density(n, ill, ctx)


def imprecision_density(n, x0_hat, ill: Illumination = DEFAULT_ILLUMINATION,
                        ctx: NormalizationContext = DIMENSIONLESS):
    """Minimal position variance per solid angle, ``hbar c / (32 pi |k| (n.x0)^2 dP/dOmega)``."""
    info = np.asarray(information_density(n, x0_hat, ill, ctx))
    if np.any(info <= 0):
        raise SingularDirection("no position information in this direction")
    return 1.0 / info


def total_imprecision(x0_hat, theta_h: float, ill: Illumination = DEFAULT_ILLUMINATION,
                      ctx: NormalizationContext = DIMENSIONLESS,
                      spec: QuadratureSpec = DEFAULT_SPEC) -> ImprecisionResult:
    """Inverse-weighted imprecision over both cones of half-angle ``theta_h``."""
    if not 0.0 < theta_h <= math.pi / 2:
        raise EmptyRegion("imprecision needs a non-empty detection region")
    x0 = _direction(x0_hat)
    res = integrate_region(lambda n: information_density(n, x0, ill, ctx), cone_pair(theta_h), spec)
    if res.value <= 0:
        raise SingularDirection("detection region collects no information along this direction")
    value = 1.0 / res.value
    return ImprecisionResult(tuple(x0), theta_h, value, "quadrature", value * res.error / res.value)


def heisenberg_product(x0_hat, theta_h: float, ill: Illumination = DEFAULT_ILLUMINATION,
                       ctx: NormalizationContext = DIMENSIONLESS, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """``S_imp * S_ba`` for the same detection region."""
    return (total_imprecision(x0_hat, theta_h, ill, ctx, spec).value
            * total_back_action(x0_hat, theta_h, ill, ctx, spec).value)


def pointwise_heisenberg_constant(ctx: NormalizationContext = DIMENSIONLESS) -> float:
    """``s * ds_ba/dOmega``, identical in every direction: ``hbar^2 / (64 pi^2)``."""
    return ctx.hbar**2 / (64 * math.pi**2)


def stated_heisenberg_constant(ctx: NormalizationContext = DIMENSIONLESS) -> float:
    """The literature value ``hbar^2 / (32 pi^2)`` the product is compared against."""
    return ctx.hbar**2 / (32 * math.pi**2)


def suppression_anisotropy(theta_h: float, ill: Illumination = DEFAULT_ILLUMINATION,
                           spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Ratio of axial (z) to transverse (x) back action."""
    if theta_h <= 0:
        raise ValueError("theta_h must be positive")
    return (total_back_action("z", theta_h, ill, spec=spec).value
            / total_back_action("x", theta_h, ill, spec=spec).value)


def power_law_slope(axis: str, thetas, ill: Illumination = DEFAULT_ILLUMINATION,
                    spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Least-squares slope of log S_ba against log theta."""
    thetas = np.asarray(thetas, float)
    vals = [total_back_action(axis, t, ill, spec=spec).normalized for t in thetas]
    return float(np.polyfit(np.log(thetas), np.log(vals), 1)[0])


def quadratic_quartic_fit(axis: str, thetas, ill: Illumination = DEFAULT_ILLUMINATION,
                          spec: QuadratureSpec = DEFAULT_SPEC, weighting: str = "relative"):
    """Least-squares fit of ``a theta^2 + b theta^4`` to the normalized back action; returns ``(a, b)``.

    ``weighting="relative"`` minimizes relative residuals (equivalently fits
    ``S/theta^2`` to ``a + b theta^2``), so the small-aperture points, where
    the curve is orders of magnitude smaller, still constrain the fit.
    ``"none"`` minimizes absolute residuals and lets the largest apertures,
    and therefore the neglected ``theta^6`` term, dominate ``b``.
    """
    if weighting not in ("relative", "none"):
        raise ValueError("weighting must be 'relative' or 'none'")
    thetas = np.asarray(thetas, float)
    vals = np.array([total_back_action(axis, t, ill, spec=spec).normalized for t in thetas])
    design = np.stack([thetas**2, thetas**4], axis=1)
    if weighting == "relative":
        design, vals = design / thetas[:, None] ** 2, vals / thetas**2
    (a, b), *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(a), float(b)


def quartic_coefficient(axis: str, thetas, ill: Illumination = DEFAULT_ILLUMINATION,
                        spec: QuadratureSpec = DEFAULT_SPEC):
    """Fit ``b theta^4 + d theta^6`` to a transverse axis; returns the leading ``b``."""
    thetas = np.asarray(thetas, float)
    vals = np.array([total_back_action(axis, t, ill, spec=spec).normalized for t in thetas])
    design = np.stack([thetas**4, thetas**6], axis=1)
    (b, _), *_ = np.linalg.lstsq(design, vals, rcond=None)
    return float(b)


def validation_report(thetas, ill: Illumination = DEFAULT_ILLUMINATION, spec: QuadratureSpec = DEFAULT_SPEC):
    """Per axis and aperture: quadrature vs small-angle polynomial vs printed closed form."""
    rows = []
    for axis in "xyz":
        for t in thetas:
            quad = total_back_action(axis, float(t), ill, spec=spec).normalized
            exp_ = float(back_action_expansion(axis, t))
            closed = float(back_action_closed_form(axis, t))
            rows.append({"axis": axis, "theta": float(t), "quadrature": quad, "expansion": exp_,
                         "closed_form_appC": closed, "abs_diff": abs(closed - quad),
                         "expansion_abs_diff": abs(exp_ - quad)})
    return rows
