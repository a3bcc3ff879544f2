"""Far-field Green's functions with and without the hemispherical mirror.

Everything is evaluated on the unit measurement sphere with the common
``exp(i|k||x'|)/|x'|`` factor and constant phases dropped; only ``|.|^2``
enters a power, so those factors are irrelevant.

Projections use outer-product broadcasting: ``n`` with shape ``(3, *a)`` and
``x`` with shape ``(3, *b)`` give results of shape ``(*a, *b)``.

Every kernel that includes the illumination phase ``exp(ik.x)`` can be
written as a short sum of plane waves ``coef * T_N(i q.x)`` where ``T_N`` is
the exponential (``N=None``) or its Taylor polynomial of degree ``N``:

* free:    ``exp(i q+ . x)``
* control: ``-i exp(i q+ . x) + i exp(i q- . x)``

with ``q+- = |k| (k_hat +- n)``. :func:`plane_wave_terms` exposes that form,
which the scatterer moments use for closed-form amplitudes.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from .core import DEFAULT_ILLUMINATION, DIMENSIONLESS, Illumination, NormalizationContext, as_unit_vectors


class GreenKind(enum.Enum):
    FREE_EXACT = "free_exact"
    CONTROL_EXACT = "control_exact"
    FREE_ORDER1 = "free_order1"
    CONTROL_ORDER1 = "control_order1"
    FREE_ORDER2 = "free_order2"
    CONTROL_ORDER2 = "control_order2"
    FREE_ORDER4 = "free_order4"
    CONTROL_ORDER4 = "control_order4"

    @property
    def is_control(self) -> bool:
        return self.value.startswith("control")

    @property
    def order(self) -> int | None:
        """Taylor order in |x|/lambda, ``None`` for the exact kernels."""
        tail = self.value.split("_")[1]
        return None if tail == "exact" else int(tail[-1])

    @classmethod
    def for_region(cls, region: str, order=None) -> "GreenKind":
        """Kind for ``region`` in {'measurement', 'control'} at ``order`` in {None, 1, 2, 4}."""
        if region not in ("measurement", "control"):
            raise ValueError(f"unknown region {region!r}")
        prefix = "control" if region == "control" else "free"
        suffix = "exact" if order in (None, "exact") else f"order{int(order)}"
        return cls(f"{prefix}_{suffix}")


def _proj(n, x):
    n = as_unit_vectors(n)
    x = np.asarray(x, dtype=float)
    return np.tensordot(n, x, axes=(0, 0))


def g_free(n, x, ill: Illumination = DEFAULT_ILLUMINATION):
    """Free-space propagator ``exp(i|k| n.x)``."""
    return np.exp(1j * ill.k_mag * _proj(n, x))


def g_control(n, x, ill: Illumination = DEFAULT_ILLUMINATION):
    """Mirror-controlled propagator ``2 sin(|k| n.x)``; zero for an emitter at the center."""
    return 2.0 * np.sin(ill.k_mag * _proj(n, x))


def g_image(n, x, r_phase: float = math.pi, reflectivity: float = 1.0,
            ill: Illumination = DEFAULT_ILLUMINATION):
    """Field of the mirror image, ``-sqrt(R) exp(-i|k| n.x - 2i r_phase)``.

    The image sits on the opposite side of the center of curvature, hence the
    reversed sign of ``x``. ``r_phase`` is ``|k| R_s`` in radians and
    ``reflectivity`` is the field reflection coefficient ``sqrt(R)``. With
    ``reflectivity=1`` and ``r_phase = pi*m`` the sum ``g_free + g_image``
    equals ``2i sin(|k| n.x)``, i.e. :func:`g_control` up to a global phase.
    """
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError("reflectivity must lie in [0, 1]")
    return -reflectivity * np.exp(-1j * ill.k_mag * _proj(n, x) - 2j * r_phase)


def _taylor_exp(z, order):
    if order is None:
        return np.exp(z)
    term = np.ones_like(z, dtype=complex)
    out = term.copy()
    for j in range(1, order + 1):
        term = term * z / j
        out = out + term
    return out


def plane_wave_terms(kind: GreenKind, n, ill: Illumination = DEFAULT_ILLUMINATION):
    """Decompose the phased kernel of ``kind`` into ``(coef, q, order)`` plane-wave terms.

    ``q`` has shape ``(3, *n_shape)``. The leading-order free kernel is the
    constant 1, represented as ``order=0``.
    """
    n = as_unit_vectors(n)
    kh = ill.k_hat_vec.reshape((3,) + (1,) * (n.ndim - 1))
    q_plus = ill.k_mag * (kh + n)
    order = kind.order
    if not kind.is_control:
        return [(1.0, q_plus, 0 if order == 1 else order)]
    q_minus = ill.k_mag * (kh - n)
    return [(-1j, q_plus, order), (1j, q_minus, order)]


def g_expansion(kind: GreenKind, n, x, ill: Illumination = DEFAULT_ILLUMINATION):
    """Small-object expansion of ``exp(ik.x) g(n, x)`` (illumination phase included)."""
    if kind.order is None:
        raise ValueError(f"{kind} is not an expansion kind")
    k = ill.k_mag
    nx = _proj(n, x)
    kx = np.tensordot(ill.k_hat_vec, np.asarray(x, float), axes=(0, 0))
    if kind is GreenKind.FREE_ORDER1:
        return np.ones_like(nx, dtype=complex)
    if kind is GreenKind.CONTROL_ORDER1:
        return (2 * k * nx).astype(complex)
    if kind is GreenKind.FREE_ORDER2:
        s = kx + nx
        return 1 + 1j * k * s - 0.5 * k**2 * s**2
    if kind is GreenKind.CONTROL_ORDER2:
        return 2 * k * nx + 2j * k**2 * kx * nx
    return kernel(kind, n, ill)(x)


def kernel(kind: GreenKind, n, ill: Illumination = DEFAULT_ILLUMINATION):
    """Return ``x -> exp(ik.x) g(n, x)`` for ``kind``, evaluated pointwise."""
    if kind is GreenKind.FREE_EXACT:
        def f(x):
            return g_free(n, x, ill) * np.exp(1j * ill.k_mag * np.tensordot(ill.k_hat_vec, x, axes=(0, 0)))
        return f
    if kind is GreenKind.CONTROL_EXACT:
        def f(x):
            return g_control(n, x, ill) * np.exp(1j * ill.k_mag * np.tensordot(ill.k_hat_vec, x, axes=(0, 0)))
        return f
    if kind.order in (1, 2):
        return lambda x: g_expansion(kind, n, x, ill)

    terms = plane_wave_terms(kind, n, ill)

    def f(x):
        x = np.asarray(x, float)
        return sum(c * _taylor_exp(1j * np.tensordot(q, x, axes=(0, 0)), order) for c, q, order in terms)
    return f


def green_matrix(n, ill: Illumination = DEFAULT_ILLUMINATION,
                 ctx: NormalizationContext = DIMENSIONLESS) -> np.ndarray:
    """Far-field dyadic ``-|k|/(4 pi eps0 c) (I - n n^T)`` for a single direction."""
    n = as_unit_vectors(n).reshape(3)
    pref = -ill.k_mag / (4 * math.pi * ctx.eps0 * ctx.c)
    return pref * (np.eye(3) - np.outer(n, n))


def electric_far_field(n, sc, ill: Illumination = DEFAULT_ILLUMINATION, region: str = "measurement",
                       ctx: NormalizationContext = DIMENSIONLESS, spec=None, method: str = "analytic"):
    """Complex far field ``E(n) = (G(n).p_hat) i c |k| A`` with ``A = int rho g exp(ik.x) d^3x``.

    ``region`` picks the free (measurement) or mirror (control) propagator.
    """
    from .scatterers import amplitude, integrate_density
    kind = GreenKind.for_region(region)
    if method == "analytic":
        amp = amplitude(sc, n, kind, ill)
    else:
        amp = integrate_density(sc, kernel(kind, n, ill), spec)
    field_dir = green_matrix(n, ill, ctx) @ ill.pol_vec
    return field_dir * (1j * ctx.c * ill.k_mag * complex(amp))
