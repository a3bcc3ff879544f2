"""Run configuration: a YAML record mirroring :class:`RunConfig` field by field."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field

import yaml

from .core import Illumination, NormalizationContext
from .quadrature import QuadratureSpec
from .scatterers import Displaced, HarmonicAsymmetry, PointDipole, UniformBall

COMMANDS = ("backaction-curves", "asymmetry-map", "sphere-ratios", "heisenberg-check", "pattern")


class ConfigError(ValueError):
    pass


def _default_na_grid():
    return [round(0.02 * i, 10) for i in range(1, 51)]


def _default_radius_grid():
    return [round(0.01 * i, 10) for i in range(1, 51)]


def _default_theta_grid():
    return [0.05, 0.1, 0.2, 0.3, 0.5, 1.0, round(math.pi / 2, 15)]


@dataclass
class RunConfig:
    command: str = "pattern"
    out: str = "out"
    format: str = "csv"
    normalization: dict = field(default_factory=lambda: {"mode": "dimensionless"})
    quadrature: dict = field(default_factory=lambda: {"mc_seed": 20240611})
    illumination: dict = field(default_factory=dict)
    scatterer: dict = field(default_factory=lambda: {"kind": "point", "p": 1.0})
    na_grid: list = field(default_factory=_default_na_grid)
    radius_grid: list = field(default_factory=_default_radius_grid)
    theta_grid: list = field(default_factory=_default_theta_grid)
    na: float = 0.4
    fixed_radii: list = field(default_factory=lambda: [0.1, 0.2])
    asymmetry_ratio: float = 0.3
    region: str = "measurement"
    kernel_order: str = "exact"
    theta_h: float | None = None
    method: str = "analytic"
    n_theta: int = 91
    n_phi: int = 180

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping")
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        try:
            cfg = cls(**data)
            cfg.validate()
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form; output directory excluded."""
        d = self.to_dict()
        d.pop("out")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.region not in ("measurement", "control"):
            raise ConfigError("region must be measurement or control")
        if str(self.kernel_order) not in ("exact", "1", "2", "4"):
            raise ConfigError("kernel_order must be exact, 1, 2 or 4")
        if any(not 0 < a <= 1 for a in self.na_grid):
            raise ConfigError("na_grid values must lie in (0, 1]")
        if any(not 0 < r <= 0.5 for r in list(self.radius_grid) + list(self.fixed_radii)):
            raise ConfigError("radii (in wavelengths) must lie in (0, 0.5]")
        if not 0 < self.na < 1:
            raise ConfigError("na must lie in (0, 1)")
        if self.method not in ("analytic", "quadrature"):
            raise ConfigError("method must be analytic or quadrature")
        if self.theta_h is not None and not 0 <= self.theta_h <= math.pi / 2:
            raise ConfigError("theta_h must lie in [0, pi/2]")
        if self.n_theta < 2 or self.n_phi < 1:
            raise ConfigError("map grids need n_theta >= 2 and n_phi >= 1")
        if not self.asymmetry_ratio >= 0:
            raise ConfigError("asymmetry_ratio must be non-negative")
        try:
            self.quadrature_spec()
            self.normalization_context()
            self.illumination_obj()
            self.scatterer_obj()
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc

    def quadrature_spec(self) -> QuadratureSpec:
        return QuadratureSpec(**self.quadrature)

    def normalization_context(self) -> NormalizationContext:
        norm = dict(self.normalization)
        if norm.get("mode") == "physical":
            norm.pop("mode")
            return NormalizationContext.physical(**norm)
        return NormalizationContext(**norm)

    def illumination_obj(self) -> Illumination:
        ill = dict(self.illumination)
        for key in ("k_hat", "pol"):
            if key in ill:
                ill[key] = tuple(ill[key])
        return Illumination(**ill)

    def scatterer_obj(self):
        return build_scatterer(self.scatterer, self.illumination_obj().wavelength)


def build_scatterer(record: dict, wavelength: float):
    """Scatterer from a tagged record; lengths may be given in wavelengths via ``*_over_lambda``."""
    rec = dict(record)
    kind = rec.pop("kind", None)
    if kind == "point":
        return PointDipole(**rec)
    if kind == "ball":
        if "R0_over_lambda" in rec:
            rec["R0"] = rec.pop("R0_over_lambda") * wavelength
        return UniformBall(**rec)
    if kind == "displaced":
        inner = build_scatterer(rec.pop("inner"), wavelength)
        if "x0_over_lambda" in rec:
            rec["x0"] = [c * wavelength for c in rec.pop("x0_over_lambda")]
        return Displaced(inner, tuple(rec.pop("x0")))
    if kind == "harmonic":
        return HarmonicAsymmetry(**rec)
    raise ConfigError(f"unknown scatterer kind {kind!r}")
