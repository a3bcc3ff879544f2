"""Light scattering, photon-recoil back action and position imprecision of a
dipolar scatterer at the center of curvature of a hollow hemispherical mirror."""

__version__ = "0.1.0"
