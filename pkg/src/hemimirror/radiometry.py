"""Scattered power: angular densities, closed-form patterns and region totals.

Region powers follow the mirror geometry: the measurement region is the pair
of cones around +-z, the control region is the upper-hemisphere band
``theta in [arcsin(NA), pi/2]`` (light hitting the mirror side is reflected
back and leaves through this band).
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (DEFAULT_ILLUMINATION, DIMENSIONLESS, EmptyRegion, Illumination, NormalizationContext,
                   as_unit_vectors, dipole_pattern, dipole_prefactor, unit_vectors)
from .greens import GreenKind, kernel
from .quadrature import (DEFAULT_SPEC, AngularDomain, QuadratureSpec, QuadResult, cone_pair,
                         control_band, full_sphere, integrate_region, ratio)
from .scatterers import UniformBall, amplitude, integrate_density, total_dipole_moment


def _check_region(region, kind):
    if region is None:
        return
    if region not in ("measurement", "control"):
        raise ValueError(f"unknown region {region!r}")
    if (region == "control") != kind.is_control:
        raise ValueError(f"{kind.value} kernel does not belong to the {region} region")


def relative_power_density(sc, n, kind: GreenKind, ill: Illumination = DEFAULT_ILLUMINATION,
                           region: str | None = None, spec: QuadratureSpec = DEFAULT_SPEC,
                           method: str = "analytic"):
    """``|int rho g exp(ik.x)|^2 / p^2 * (1 - (n.p_hat)^2)``, in units of the dipole prefactor."""
    _check_region(region, kind)
    if method == "analytic":
        amp = amplitude(sc, n, kind, ill)
    elif method == "quadrature":
        amp = integrate_density(sc, kernel(kind, n, ill), spec)
    else:
        raise ValueError(f"unknown method {method!r}")
    p = total_dipole_moment(sc)
    return np.abs(amp / p) ** 2 * dipole_pattern(n, ill)


def scattered_power_density(sc, n, region: str, kind: GreenKind | None = None,
                            ill: Illumination = DEFAULT_ILLUMINATION, spec: QuadratureSpec = DEFAULT_SPEC,
                            ctx: NormalizationContext = DIMENSIONLESS, method: str = "analytic"):
    """dP~/dOmega of ``sc`` in direction ``n``; exact kernels unless ``kind`` is given."""
    kind = GreenKind.for_region(region) if kind is None else kind
    rel = relative_power_density(sc, n, kind, ill, region, spec, method)
    return rel * dipole_prefactor(ill, ctx, p=total_dipole_moment(sc))


def displaced_power_ratio(x0, n, ill: Illumination = DEFAULT_ILLUMINATION):
    """dP~/dP for a small symmetric scatterer displaced by ``x0`` from the center.

    Equals ``4 |k|^2 (n.x0)^2``, the first-order mirror kernel ``2|k| n.x``
    averaged over the displaced density.
    """
    x0 = np.asarray(x0, float)
    if ill.k_mag * np.linalg.norm(x0) > 0.3:
        warnings.warn("|k||x0| > 0.3: small-displacement expansion is unreliable", stacklevel=2)
    proj = np.tensordot(as_unit_vectors(n), x0, axes=(0, 0))
    return 4 * ill.k_mag**2 * proj**2


def asymmetry_pattern(theta, phi, theta1, phi1, c0, ill: Illumination = DEFAULT_ILLUMINATION):
    """dP~/dP of a first-order harmonic asymmetry of size ``c0`` oriented along ``(theta1, phi1)``.

    ``(4 |k|^2 c0^2 / 3) (cos t cos t1 + sin t sin t1 cos(phi - phi1))^2``.
    """
    theta = np.asarray(theta, float)
    phi = np.asarray(phi, float)
    cosang = (np.cos(theta) * math.cos(theta1)
              + np.sin(theta) * math.sin(theta1) * np.cos(phi - phi1))
    return 4 * ill.k_mag**2 * c0**2 / 3 * cosang**2


def _asymmetry_density(theta1, phi1, c0, ill):
    axis = unit_vectors(theta1, phi1)

    def f(n):
        return 4 * ill.k_mag**2 * c0**2 / 3 * np.tensordot(axis, n, axes=(0, 0)) ** 2 * dipole_pattern(n, ill)
    return f


def region_power(sc, domain: AngularDomain, kind: GreenKind, ill: Illumination = DEFAULT_ILLUMINATION,
                 ctx: NormalizationContext = DIMENSIONLESS, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Integral of dP~/dOmega over an arbitrary angular domain."""
    pref = dipole_prefactor(ill, ctx, p=total_dipole_moment(sc))
    res = integrate_region(lambda n: relative_power_density(sc, n, kind, ill), domain, spec)
    return QuadResult(pref * res.value, pref * res.error)


def power_measurement_region(na: float, sc, kind: GreenKind = GreenKind.FREE_EXACT,
                             ill: Illumination = DEFAULT_ILLUMINATION, ctx: NormalizationContext = DIMENSIONLESS,
                             spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """P_m(NA): power escaping through both cones of half-angle arcsin(NA)."""
    if not 0.0 < na <= 1.0:
        raise EmptyRegion(f"measurement region is empty or invalid for NA={na}")
    _check_region("measurement", kind)
    return region_power(sc, cone_pair(math.asin(na)), kind, ill, ctx, spec)


def power_control_region(na: float, sc, kind: GreenKind = GreenKind.CONTROL_EXACT,
                         ill: Illumination = DEFAULT_ILLUMINATION, ctx: NormalizationContext = DIMENSIONLESS,
                         spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """P_c(NA): power leaving through the single control band ``[arcsin(NA), pi/2]``."""
    if not 0.0 <= na < 1.0:
        raise EmptyRegion(f"control region is empty or invalid for NA={na}")
    _check_region("control", kind)
    return region_power(sc, control_band(math.asin(na)), kind, ill, ctx, spec)


def free_space_power(sc, domain: AngularDomain, ill: Illumination = DEFAULT_ILLUMINATION,
                     ctx: NormalizationContext = DIMENSIONLESS, spec: QuadratureSpec = DEFAULT_SPEC,
                     kind: GreenKind = GreenKind.FREE_EXACT) -> QuadResult:
    """Power into ``domain`` with no mirror present anywhere."""
    _check_region("measurement", kind)
    return region_power(sc, domain, kind, ill, ctx, spec)


def free_space_outside_cones(na: float) -> AngularDomain:
    """Everything except the two cones: both hemispheres' bands."""
    th = math.asin(na)
    return AngularDomain("outside_cones", ((th, math.pi - th),))


def _kinds_for_order(order):
    if order in ("exact", None):
        return GreenKind.FREE_EXACT, GreenKind.CONTROL_EXACT
    return GreenKind.for_region("measurement", order), GreenKind.for_region("control", order)


def sphere_ratios(R0: float, na: float, order="exact", ill: Illumination = DEFAULT_ILLUMINATION,
                  spec: QuadratureSpec = DEFAULT_SPEC):
    """``(P_c(0)/P_m(1), P_c(NA)/P_m(NA))`` for a centered uniform ball.

    ``order`` is the Taylor order of the phased kernels in ``|x|/lambda``
    (2 or 4) or ``"exact"``; powers are the squared moduli of the truncated
    amplitudes, hence never negative.
    """
    sc = UniformBall(R0)
    free_kind, ctrl_kind = _kinds_for_order(order)
    seq = ratio(power_control_region(0.0, sc, ctrl_kind, ill, spec=spec),
                power_measurement_region(1.0, sc, free_kind, ill, spec=spec))
    hollow = ratio(power_control_region(na, sc, ctrl_kind, ill, spec=spec),
                   power_measurement_region(na, sc, free_kind, ill, spec=spec))
    return seq, hollow


VALIDITY_LIMIT = 0.25  # R0 / lambda above which the truncated kernels are flagged


def suppression_ratio_curves(radii, na: float = 0.4, orders=(2, 4, "exact"), na_grid=None,
                             fixed_radii=None, ill: Illumination = DEFAULT_ILLUMINATION,
                             spec: QuadratureSpec = DEFAULT_SPEC):
    """Rows for both panels of the sphere-size suppression ratios.

    ``radii`` and ``fixed_radii`` are in units of the wavelength. Panel (a)
    rows: ``r0_over_lambda, order, pc0_over_pm1, pc_na_over_pm_na, warning``.
    Panel (b) rows: ``na, r0_over_lambda, order, ratio, warning``.
    """
    lam = ill.wavelength
    if na_grid is None:
        na_grid = np.round(np.linspace(0.05, 0.95, 19), 10)
    if fixed_radii is None:
        fixed_radii = (0.1, 0.2)
    radii = list(radii)
    if any(r > 0.5 for r in radii) or any(r > 0.5 for r in fixed_radii):
        raise ValueError("radii above lambda/2 are outside the modeled range")

    def note(r):
        return "r0_above_lambda_over_4" if r > VALIDITY_LIMIT else ""

    panel_a = []
    for r in radii:
        for order in orders:
            seq, hollow = sphere_ratios(r * lam, na, order, ill, spec)
            panel_a.append({"r0_over_lambda": float(r), "order": str(order),
                            "pc0_over_pm1": seq.value, "pc_na_over_pm_na": hollow.value,
                            "warning": note(r)})
    panel_b = []
    for r in fixed_radii:
        sc = UniformBall(r * lam)
        for order in orders:
            free_kind, ctrl_kind = _kinds_for_order(order)
            for a in na_grid:
                rr = ratio(power_control_region(float(a), sc, ctrl_kind, ill, spec=spec),
                           power_measurement_region(float(a), sc, free_kind, ill, spec=spec))
                panel_b.append({"na": float(a), "r0_over_lambda": float(r), "order": str(order),
                                "ratio": rr.value, "warning": note(r)})
    return panel_a, panel_b


def crossing_radius(na: float = 0.4, order="exact", bracket=(0.05, 0.45),
                    ill: Illumination = DEFAULT_ILLUMINATION, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Smallest ``R0/lambda`` at which ``P_c(NA)/P_m(NA)`` reaches 1."""
    from scipy.optimize import brentq
    lam = ill.wavelength

    def excess(r):
        return sphere_ratios(r * lam, na, order, ill, spec)[1].value - 1.0

    grid = np.linspace(*bracket, 17)
    vals = [excess(r) for r in grid]
    for lo, hi, vlo, vhi in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if vlo < 0 <= vhi:
            return brentq(excess, lo, hi, xtol=1e-10)
    raise ValueError("ratio does not cross 1 inside the bracket")


def hole_loss_fraction(na: float, theta1: float, phi1: float, c0: float = 0.3,
                       ill: Illumination = DEFAULT_ILLUMINATION, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Share of the asymmetry-scattered power that falls inside both cones."""
    if not 0.0 < na <= 1.0:
        raise ValueError("NA must lie in (0, 1]")
    f = _asymmetry_density(theta1, phi1, c0, ill)
    return ratio(integrate_region(f, cone_pair(math.asin(na)), spec), integrate_region(f, full_sphere(), spec))


def asymmetry_total_power(theta1: float, phi1: float, c0: float = 0.3,
                          ill: Illumination = DEFAULT_ILLUMINATION, spec: QuadratureSpec = DEFAULT_SPEC) -> QuadResult:
    """Full-sphere integral of the asymmetry pattern times the dipole pattern."""
    return integrate_region(_asymmetry_density(theta1, phi1, c0, ill), full_sphere(), spec)


# --- angular maps ----------------------------------------------------------

MAP_COLUMNS = ("theta_rad", "phi_rad", "power_normalized")


@dataclass
class AngularPowerMap:
    """Grid of normalized dP~/dOmega values (row-major, theta outer)."""

    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for i, t in enumerate(self.theta):
            for j, p in enumerate(self.phi):
                yield float(t), float(p), float(self.values[i, j])

    def to_csv(self, header_lines=()) -> str:
        buf = io.StringIO()
        for line in header_lines:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(MAP_COLUMNS)
        for row in self.rows():
            w.writerow([repr(v) for v in row])
        return buf.getvalue()

    def to_json(self, extra_metadata=None) -> str:
        meta = dict(self.metadata)
        if extra_metadata:
            meta.update(extra_metadata)
        doc = {"metadata": meta, "columns": list(MAP_COLUMNS),
               "theta_rad": self.theta.tolist(), "phi_rad": self.phi.tolist(),
               "shape": list(self.values.shape), "values": self.values.reshape(-1).tolist()}
        return json.dumps(doc, indent=1, sort_keys=True)


def region_theta_grid(region: str, theta_h: float, n_theta: int) -> np.ndarray:
    if region == "control":
        return np.linspace(theta_h, math.pi / 2, n_theta)
    if theta_h >= math.pi / 2:
        return np.linspace(0.0, math.pi, n_theta)
    upper = np.linspace(0.0, theta_h, n_theta)
    return np.concatenate([upper, math.pi - upper[::-1]])


def power_map(sc, kind: GreenKind, theta_h: float = 0.0, ill: Illumination = DEFAULT_ILLUMINATION,
              n_theta: int = 181, n_phi: int = 360, spec: QuadratureSpec = DEFAULT_SPEC,
              method: str = "analytic", metadata=None) -> AngularPowerMap:
    """Sample the relative power density on the grid of the region ``kind`` belongs to."""
    region = "control" if kind.is_control else "measurement"
    theta = region_theta_grid(region, theta_h, n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    n = unit_vectors(theta[:, None], phi[None, :])
    values = relative_power_density(sc, n, kind, ill, region, spec, method)
    meta = {"region": region, "kind": kind.value, "theta_h": theta_h, "method": method}
    meta.update(metadata or {})
    return AngularPowerMap(theta, phi, np.asarray(values, float), meta)
