"""Command-line front end: one command per computed result, CSV or JSON out.

Every run writes its data files plus ``discrepancies.json`` into ``--out``.
Exit status is 0 on success, 2 when a quadrature fails to converge (tables
written so far are flushed with a ``FAILED`` marker row) and 3 on a bad
configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, backaction, radiometry
from .config import COMMANDS, ConfigError, RunConfig
from .core import ConePairRegion, dipole_pattern, solid_angle_fraction, unit_vectors
from .greens import GreenKind
from .output import DiscrepancyLedger, csv_text, dumps, write_text
from .quadrature import NonConvergence, cone_pair
from .scatterers import Displaced, HarmonicAsymmetry, PointDipole, UniformBall

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG = 0, 2, 3
FAILED = "FAILED"


class Run:
    """Collects tables for one invocation and writes them deterministically."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.ledger = DiscrepancyLedger()
        self.tables = {}
        self.documents = {}

    @property
    def metadata(self) -> dict:
        return {"artifact_version": __version__, "command": self.cfg.command,
                "config_sha256": self.cfg.digest(), "mc_seed": self.cfg.quadrature.get("mc_seed")}

    def table(self, name, columns):
        rows = []
        self.tables[name] = (tuple(columns), rows)
        return rows

    def document(self, name, doc):
        self.documents[name] = doc

    def write(self, failure: str | None = None):
        out = self.cfg.out
        for name, (columns, rows) in self.tables.items():
            if failure is not None:
                rows.append({columns[0]: FAILED, columns[-1]: failure})
            if self.cfg.format == "csv":
                write_text(os.path.join(out, f"{name}.csv"), csv_text(columns, rows, self.metadata))
            else:
                write_text(os.path.join(out, f"{name}.json"),
                           dumps({"metadata": self.metadata, "columns": list(columns), "rows": rows}))
        for name, doc in self.documents.items():
            if failure is not None:
                doc = dict(doc, failure=failure)
            write_text(os.path.join(out, f"{name}.json"), dumps(dict(doc, metadata=self.metadata)))
        write_text(os.path.join(out, "discrepancies.json"), self.ledger.to_json(self.metadata))


# --- commands ----------------------------------------------------------------

def cmd_backaction_curves(run: Run):
    cfg = run.cfg
    ill, ctx, spec = cfg.illumination_obj(), cfg.normalization_context(), cfg.quadrature_spec()
    rows = run.table("backaction_curves", ("na", "s_x_norm", "s_y_norm", "s_z_norm", "method"))
    for na in cfg.na_grid:
        th = math.asin(na)
        quad = {a: backaction.total_back_action(a, th, ill, ctx, spec).normalized for a in "xyz"}
        rows.append({"na": float(na), **{f"s_{a}_norm": quad[a] for a in "xyz"}, "method": "quadrature"})
        for method, fn in (("expansion", backaction.back_action_expansion),
                           ("closed_form_appC", backaction.back_action_closed_form)):
            rows.append({"na": float(na), **{f"s_{a}_norm": float(fn(a, th)) for a in "xyz"}, "method": method})

    led = run.ledger
    full = {a: backaction.total_back_action(a, math.pi / 2, ill, ctx, spec).normalized for a in "xyz"}
    led.compare("backaction_z_full_aperture", "normalized z back action of the free emitter", 1.0, full["z"],
                abs_tol=1e-9)
    led.compare("backaction_x_full_aperture", "normalized x back action of the free emitter (moment oracle)",
                0.5, full["x"], abs_tol=1e-9)
    fit_thetas = np.linspace(0.02, 0.2, 10)
    for axis in "xyz":
        slope = backaction.power_law_slope(axis, fit_thetas, ill, spec)
        led.compare(f"backaction_{axis}_loglog_slope", f"small-aperture power law of the {axis} back action",
                    2.0 if axis == "z" else 4.0, slope, abs_tol=0.05)
    for axis, stated in (("x", 15 / 16), ("y", 15 / 32)):
        b = backaction.quartic_coefficient(axis, np.linspace(0.02, 0.3, 15), ill, spec)
        led.compare(f"backaction_{axis}_quartic_coefficient", f"theta^4 coefficient of the {axis} back action",
                    stated, b, rel_tol=0.01, note="fit of b theta^4 + d theta^6 to quadrature")
    for weighting in ("relative", "none"):
        a, b = backaction.quadratic_quartic_fit("z", np.linspace(0.02, 0.3, 15), ill, spec, weighting)
        note = f"two-term least squares, {weighting} weighting, 15 points on [0.02, 0.3]"
        led.compare(f"backaction_z_quadratic_coefficient_{weighting}_weights",
                    "theta^2 coefficient of the z back action", 15 / 8, a, rel_tol=0.01, note=note)
        led.compare(f"backaction_z_quartic_coefficient_{weighting}_weights",
                    "theta^4 coefficient of the z back action", -25 / 16, b, rel_tol=0.05, note=note)
    probe = np.linspace(0.1, math.pi / 2, 8)
    for axis in "xyz":
        gap = max(abs(float(backaction.back_action_closed_form(axis, t))
                      - backaction.total_back_action(axis, float(t), ill, ctx, spec).normalized) for t in probe)
        led.compare(f"backaction_{axis}_closed_form", f"printed closed form of the {axis} back action vs quadrature",
                    0.0, gap, abs_tol=1e-6, note="maximum absolute gap over theta in [0.1, pi/2]")
    th = math.asin(cfg.na)
    led.report("backaction_anisotropy", f"z to x back action ratio at NA={cfg.na}", 1e3,
               backaction.suppression_anisotropy(th, ill, spec), note="stated as an order of magnitude")


def _orientations():
    return {"x": (math.pi / 2, 0.0), "y": (math.pi / 2, math.pi / 2), "z": (0.0, 0.0)}


def cmd_asymmetry_map(run: Run):
    cfg = run.cfg
    ill, spec = cfg.illumination_obj(), cfg.quadrature_spec()
    c0 = cfg.asymmetry_ratio
    theta = np.linspace(0.0, math.pi / 2, cfg.n_theta)
    phi = 2 * math.pi * np.arange(cfg.n_phi) / cfg.n_phi
    T, P = np.meshgrid(theta, phi, indexing="ij")
    n = unit_vectors(T, P)
    maps = {axis: radiometry.asymmetry_pattern(T, P, t1, p1, c0, ill) * dipole_pattern(n, ill)
            for axis, (t1, p1) in _orientations().items()}
    peak = max(float(m.max()) for m in maps.values())
    for axis, m in maps.items():
        rows = run.table(f"asymmetry_map_{axis}", radiometry.MAP_COLUMNS)
        vals = m / peak if peak > 0 else m
        for i, t in enumerate(theta):
            for j, p in enumerate(phi):
                rows.append({"theta_rad": float(t), "phi_rad": float(p), "power_normalized": float(vals[i, j])})

    led = run.ledger
    zi = np.unravel_index(np.argmax(maps["z"]), maps["z"].shape)
    led.compare("asymmetry_z_peak_theta", "z-oriented map peaks at theta = 0", 0.0, float(theta[zi[0]]), abs_tol=0.0)
    tot = {a: radiometry.asymmetry_total_power(t1, p1, c0, ill, spec).value
           for a, (t1, p1) in _orientations().items()}
    led.compare("asymmetry_x_over_z_power", "x-oriented total power relative to the maximum orientation",
                0.5, tot["x"] / tot["z"], abs_tol=0.02)
    led.compare("asymmetry_x_over_y_power", "x-oriented total power relative to the y orientation",
                0.5, tot["x"] / tot["y"], abs_tol=0.02)
    loss = radiometry.hole_loss_fraction(cfg.na, math.pi / 2, 0.0, c0, ill, spec).value
    led.within("asymmetry_hole_loss", f"share of x-oriented asymmetry power lost through the NA={cfg.na} hole",
               (0.015, 0.025), loss, note="stated as 2%, read as rounding to the nearest percent")
    probe = unit_vectors(0.0, 0.0)
    sc = HarmonicAsymmetry(c0=c0)
    route = float(radiometry.relative_power_density(sc, probe, GreenKind.CONTROL_ORDER1, ill)
                  / dipole_pattern(probe, ill))
    led.compare("asymmetry_prefactor", "prefactor of the asymmetry pattern, |k|^2 c0^2/3 as printed",
                ill.k_mag**2 * c0**2 / 3, route, rel_tol=1e-9,
                note="computed from the first-order mirror kernel integrated over the harmonic density")


def cmd_sphere_ratios(run: Run):
    cfg = run.cfg
    ill, ctx, spec = cfg.illumination_obj(), cfg.normalization_context(), cfg.quadrature_spec()
    orders = (2, 4, "exact")
    rows_a = run.table("sphere_ratios_panel_a",
                       ("r0_over_lambda", "order", "pc0_over_pm1", "pc_na_over_pm_na", "warning"))
    for r in cfg.radius_grid:
        rows_a.extend(radiometry.suppression_ratio_curves([r], cfg.na, orders, na_grid=[],
                                                          fixed_radii=[], ill=ill, spec=spec)[0])
    rows_b = run.table("sphere_ratios_panel_b", ("na", "r0_over_lambda", "order", "ratio", "warning"))
    panel_na = [a for a in cfg.na_grid if a < 1]
    for r in cfg.fixed_radii:
        for a in panel_na:
            rows_b.extend(radiometry.suppression_ratio_curves([], cfg.na, orders, na_grid=[a],
                                                              fixed_radii=[r], ill=ill, spec=spec)[1])

    led = run.ledger
    for order in orders:
        r = radiometry.crossing_radius(cfg.na, order, ill=ill, spec=spec)
        led.within(f"sphere_crossing_order_{order}", f"radius where P_c/P_m reaches 1 at NA={cfg.na}, in wavelengths",
                   (0.25 * 0.7, 0.25 * 1.3), r, note="stated as about a quarter wavelength")
    small = min(cfg.radius_grid)
    by_order = {row["order"]: row["pc_na_over_pm_na"] for row in rows_a if row["r0_over_lambda"] == small}
    led.compare("sphere_order_convergence", f"order-2 vs order-4 ratio at R0/lambda={small}",
                by_order["4"], by_order["2"], rel_tol=0.05)
    frac = solid_angle_fraction(ConePairRegion.from_na(cfg.na))
    led.compare("solid_angle_fraction", f"measurement region share of 4 pi at NA={cfg.na}", 0.08, frac,
                abs_tol=0.005, note="stated as a rounded percentage")
    pt = PointDipole()
    inside = radiometry.free_space_power(pt, cone_pair(math.asin(cfg.na)), ill, ctx, spec)
    outside = radiometry.free_space_power(pt, radiometry.free_space_outside_cones(cfg.na), ill, ctx, spec)
    led.compare("free_space_outside_over_inside", f"free-space power outside vs inside the NA={cfg.na} cones",
                7.0, outside.value / inside.value, rel_tol=0.05)


def cmd_heisenberg_check(run: Run):
    cfg = run.cfg
    ill, ctx, spec = cfg.illumination_obj(), cfg.normalization_context(), cfg.quadrature_spec()
    stated = backaction.stated_heisenberg_constant(ctx)
    pointwise = backaction.pointwise_heisenberg_constant(ctx)
    rows = []
    doc = {"rows": rows, "stated_constant": stated, "pointwise_constant": pointwise}
    run.document("heisenberg_check", doc)
    for axis in "xyz":
        for na in cfg.na_grid:
            prod = backaction.heisenberg_product(axis, math.asin(na), ill, ctx, spec)
            rows.append({"direction": axis, "na": float(na), "product": prod,
                         "ratio_to_stated": prod / stated, "ratio_to_pointwise": prod / pointwise})
    products = np.array([r["product"] for r in rows])
    spread = float((products.max() - products.min()) / abs(products.mean()))
    doc["relative_spread"] = spread
    led = run.ledger
    led.compare("heisenberg_constancy", "imprecision-back-action product independent of direction and NA",
                0.0, spread, abs_tol=1e-10)
    mean = float(products.mean())
    led.report("heisenberg_vs_stated_constant", "product against hbar^2/(32 pi^2)", stated, mean,
               note=f"ratio {mean / stated:.12g}")
    led.report("heisenberg_vs_pointwise_constant", "product against the pointwise constant hbar^2/(64 pi^2)",
               pointwise, mean, note=f"ratio {mean / pointwise:.12g}")


def _pattern_kind(cfg):
    order = None if str(cfg.kernel_order) == "exact" else int(cfg.kernel_order)
    return GreenKind.for_region(cfg.region, order)


def cmd_pattern(run: Run):
    cfg = run.cfg
    ill, spec = cfg.illumination_obj(), cfg.quadrature_spec()
    sc = cfg.scatterer_obj()
    kind = _pattern_kind(cfg)
    if cfg.theta_h is None:
        theta_h = 0.0 if kind.is_control else math.pi / 2
    else:
        theta_h = cfg.theta_h
    if not kind.is_control and theta_h == 0:
        raise ConfigError("measurement region is empty for theta_h = 0")
    theta = radiometry.region_theta_grid(cfg.region, theta_h, cfg.n_theta)
    phi = 2 * math.pi * np.arange(cfg.n_phi) / cfg.n_phi
    rows = run.table("pattern", radiometry.MAP_COLUMNS)
    values = []
    for t in theta:
        n = unit_vectors(np.full_like(phi, t), phi)
        v = np.asarray(radiometry.relative_power_density(sc, n, kind, ill, cfg.region, spec, cfg.method), float)
        values.append(v)
        rows.extend({"theta_rad": float(t), "phi_rad": float(p), "power_normalized": float(x)}
                    for p, x in zip(phi, v))
    values = np.array(values)
    T, P = np.meshgrid(theta, phi, indexing="ij")
    n = unit_vectors(T, P)
    led = run.ledger
    led.report("pattern_minimum", "smallest map entry (power densities are non-negative)", 0.0,
               float(values.min()))
    prediction = None
    if isinstance(sc, PointDipole) and not kind.is_control:
        prediction, label = dipole_pattern(n, ill), "free dipole pattern"
    elif (isinstance(sc, Displaced) and isinstance(sc.inner, (PointDipole, UniformBall)) and kind.is_control):
        prediction = radiometry.displaced_power_ratio(sc.x0, n, ill) * dipole_pattern(n, ill)
        label = "small-displacement prediction 4|k|^2 (n.x0)^2 times the dipole pattern"
    elif isinstance(sc, HarmonicAsymmetry) and kind.is_control:
        prediction = (radiometry.asymmetry_pattern(T, P, sc.theta1, sc.phi1, sc.c0 / sc.C00, ill)
                      * dipole_pattern(n, ill))
        label = "first-order asymmetry prediction times the dipole pattern"
    if prediction is not None:
        significant = prediction >= 0.01 * prediction.max()
        dev = float(np.max(np.abs(values[significant] / prediction[significant] - 1)))
        led.compare("pattern_vs_prediction", label, 0.0, dev, abs_tol=0.01,
                    note="maximum relative deviation where the prediction exceeds 1% of its peak")


HANDLERS = {
    "backaction-curves": cmd_backaction_curves,
    "asymmetry-map": cmd_asymmetry_map,
    "sphere-ratios": cmd_sphere_ratios,
    "heisenberg-check": cmd_heisenberg_check,
    "pattern": cmd_pattern,
}


# --- entry point -------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hemimirror", description=__doc__.splitlines()[0])
    p.add_argument("command", nargs="?", choices=COMMANDS, help="what to compute (default: from config)")
    p.add_argument("--config", help="YAML file with RunConfig fields")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--rel-tol", type=float, help="quadrature relative tolerance")
    p.add_argument("--phi-order", type=int, help="azimuthal trapezoid nodes")
    p.add_argument("--seed", type=int, help="Monte Carlo seed stored in the config")
    p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    p.add_argument("--version", action="version", version=__version__)
    return p


def resolve_config(args) -> RunConfig:
    data = {}
    if args.config:
        data = RunConfig.load(args.config).to_dict()
    if args.command:
        data["command"] = args.command
    for key in ("out", "format"):
        if getattr(args, key) is not None:
            data[key] = getattr(args, key)
    quad = dict(data.get("quadrature", RunConfig().quadrature))
    for flag, key in (("rel_tol", "rel_tol"), ("phi_order", "phi_order"), ("seed", "mc_seed")):
        if getattr(args, flag) is not None:
            quad[key] = getattr(args, flag)
    data["quadrature"] = quad
    return RunConfig.from_dict(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.print_config:
        sys.stdout.write(cfg.to_yaml())
        return EXIT_OK
    run = Run(cfg)
    try:
        HANDLERS[cfg.command](run)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        run.write(failure=str(exc))
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    run.write()
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
