"""Exit criteria of the build: one test per criterion, each printing a PASS/FAIL line."""

import csv
import json
import math

import numpy as np
import pytest
import yaml

from hemimirror import backaction as ba
from hemimirror import radiometry as rad
from hemimirror.cli import EXIT_OK, main
from hemimirror.core import DEFAULT_ILLUMINATION, ConePairRegion, dipole_pattern, solid_angle_fraction, unit_vectors
from hemimirror.greens import GreenKind, g_control, g_free, g_image, green_matrix, kernel
from hemimirror.quadrature import cone_pair, full_sphere, integrate_region
from hemimirror.scatterers import Displaced, HarmonicAsymmetry, PointDipole, UniformBall, integrate_density

pytestmark = pytest.mark.acceptance

K = DEFAULT_ILLUMINATION.k_mag
LAM = DEFAULT_ILLUMINATION.wavelength


def random_unit(rng, m):
    v = rng.standard_normal((3, m))
    return v / np.linalg.norm(v, axis=0)


def run_cli(tmp_path, name, command, **fields):
    cfg = tmp_path / f"{name}.yaml"
    cfg.write_text(yaml.safe_dump(dict(fields, command=command)))
    out = tmp_path / name
    code = main(["--config", str(cfg), "--out", str(out)])
    return code, out


def ledger_entries(out):
    return {e["id"]: e for e in json.loads((out / "discrepancies.json").read_text())["entries"]}


def test_01_dipole_normalization(verdict):
    val = integrate_region(dipole_pattern, full_sphere()).value
    rel = abs(val / (8 * math.pi / 3) - 1)
    verdict(1, "dipole normalization", rel <= 1e-9, f"integral={val!r}, relative error {rel:.2e} (tol 1e-9)")


def test_02_point_suppression(verdict):
    th = np.linspace(0, math.pi / 2, 91)
    ph = np.linspace(0, 2 * math.pi, 72, endpoint=False)
    n = unit_vectors(th[:, None], ph[None, :])
    dens = rad.scattered_power_density(PointDipole(), n, "control")
    total = rad.power_control_region(0.0, PointDipole()).value
    ok = bool(np.all(dens == 0)) and total == 0
    verdict(2, "point suppression", ok, f"max density {float(np.max(np.abs(dens)))!r} over {dens.size} directions, "
                                        f"control power {total!r}")


def test_03_z_backaction_curve(verdict):
    thetas = np.linspace(0.01, 0.3, 30)
    quad = np.array([ba.total_back_action("z", t).normalized for t in thetas])
    gap = float(np.max(np.abs(quad - ba.back_action_expansion("z", thetas))))
    full = ba.total_back_action("z", math.asin(1.0)).normalized
    ok = gap <= 1e-3 and abs(full - 1.0) <= 1e-9
    verdict(3, "z back-action curve", ok, f"max |quad - polynomial| = {gap:.3e} (tol 1e-3), NA=1 value {full!r}")


def test_04_scaling_exponents(verdict, tmp_path):
    th = np.linspace(0.02, 0.2, 10)
    slopes = {a: ba.power_law_slope(a, th) for a in "xyz"}
    ok = (abs(slopes["z"] - 2) <= 0.05 and abs(slopes["x"] - 4) <= 0.05 and abs(slopes["y"] - 4) <= 0.05)
    code, out = run_cli(tmp_path, "ba", "backaction-curves", na_grid=[0.2, 1.0])
    led = ledger_entries(out)
    coef = {a: led[f"backaction_{a}_quartic_coefficient"] for a in "xy"}
    logged = (code == EXIT_OK and coef["x"]["reference_value"] == 15 / 16
              and coef["y"]["reference_value"] == 15 / 32)
    verdict(4, "scaling exponents", ok and logged,
            f"slopes x={slopes['x']:.4f} y={slopes['y']:.4f} z={slopes['z']:.4f}; ledger quartic "
            f"x={coef['x']['computed_value']:.5f} vs 15/16, y={coef['y']['computed_value']:.5f} vs 15/32")


def test_05_heisenberg_constancy(verdict, tmp_path):
    prods = [ba.heisenberg_product(a, t) for a in "xyz" for t in (0.1, 0.4, math.pi / 2)]
    spread = (max(prods) - min(prods)) / abs(np.mean(prods))
    code, out = run_cli(tmp_path, "hc", "heisenberg-check", na_grid=[0.1, 0.4, 1.0])
    entry = ledger_entries(out)["heisenberg_vs_stated_constant"]
    ok = len(prods) == 9 and spread <= 1e-10 and code == EXIT_OK and entry["status"] == "reported"
    verdict(5, "Heisenberg product constancy", ok,
            f"relative spread {spread:.2e} over 9 combinations (tol 1e-10); ledger {entry['note']} to hbar^2/(32 pi^2)")


def test_06_solid_angle_fraction(verdict):
    frac = solid_angle_fraction(ConePairRegion.from_na(0.4))
    quad = integrate_region(lambda n: np.ones(n.shape[1:]), cone_pair(math.asin(0.4))).value / (4 * math.pi)
    ok = abs(frac - 0.0835) <= 1e-4 and abs(quad - frac) <= 1e-12
    verdict(6, "solid-angle fraction", ok, f"{100 * frac:.4f}% closed form, {100 * quad:.4f}% quadrature "
                                           f"(target 8.35% +- 0.01%)")


def test_07_seven_fold_ratio(verdict):
    inside = rad.free_space_power(PointDipole(), cone_pair(math.asin(0.4))).value
    outside = rad.free_space_power(PointDipole(), rad.free_space_outside_cones(0.4)).value
    r = outside / inside
    verdict(7, "free-space seven-fold ratio", abs(r - 7) <= 0.35, f"outside/inside = {r:.4f} (7 +- 0.35)")


def test_08_hole_loss(verdict, tmp_path):
    frac = rad.hole_loss_fraction(0.4, math.pi / 2, 0.0).value
    code, out = run_cli(tmp_path, "am", "asymmetry-map", n_theta=10, n_phi=8)
    entry = ledger_entries(out)["asymmetry_hole_loss"]
    ok = 0.01 <= frac <= 0.04 and code == EXIT_OK and entry["computed_value"] == pytest.approx(frac)
    verdict(8, "hole-loss fraction", ok, f"fraction {frac:.5f} in [0.01, 0.04]; ledger status {entry['status']} "
                                         f"against the stated 2%")


def test_09_orientation_energy_ratio(verdict):
    tx = rad.asymmetry_total_power(math.pi / 2, 0.0).value
    ty = rad.asymmetry_total_power(math.pi / 2, math.pi / 2).value
    tz = rad.asymmetry_total_power(0.0, 0.0).value
    ok = abs(tx / ty - 0.5) <= 0.02 and abs(tx / tz - 0.5) <= 0.02
    verdict(9, "orientation energy ratio", ok, f"x/y = {tx / ty:.6f}, x/z = {tx / tz:.6f} (0.50 +- 0.02)")


def test_10_sphere_crossover(verdict, tmp_path):
    crossings = {o: rad.crossing_radius(0.4, o) for o in (2, 4, "exact")}
    in_band = all(0.175 <= r <= 0.325 for r in crossings.values())
    code, out = run_cli(tmp_path, "sr", "sphere-ratios", radius_grid=[0.0025, 0.005, 0.01, 0.05, 0.3],
                        fixed_radii=[0.1, 0.2], na_grid=[0.2, 0.4, 0.8])
    rows = {}
    for panel in ("a", "b"):
        lines = (out / f"sphere_ratios_panel_{panel}.csv").read_text().splitlines()
        rows[panel] = list(csv.DictReader(l for l in lines if not l.startswith("#")))
    gaps = []
    for r0 in ("0.05", "0.01", "0.005", "0.0025"):
        vals = {row["order"]: float(row["pc_na_over_pm_na"]) for row in rows["a"] if row["r0_over_lambda"] == r0}
        gaps.append(abs(vals["2"] / vals["4"] - 1))
    converging = all(a > b for a, b in zip(gaps, gaps[1:])) and gaps[-1] < 1e-3
    emitted = code == EXIT_OK and len(rows["a"]) == 15 and len(rows["b"]) == 18
    verdict(10, "sphere crossover", in_band and converging and emitted,
            "crossing R0/lambda " + ", ".join(f"{o}: {r:.4f}" for o, r in crossings.items())
            + f" (band [0.175, 0.325]); order-2 vs order-4 gaps {', '.join(f'{g:.1e}' for g in gaps)}")


def test_11_two_path_equivalence(verdict):
    rng = np.random.default_rng(20240611)
    worst = 0.0
    for i in range(100):
        n = random_unit(rng, 1)[:, 0]
        if i % 2 == 0:
            x0 = random_unit(rng, 1)[:, 0] * rng.uniform(0.01, 0.3) / K
            inner = PointDipole() if i % 4 == 0 else UniformBall(rng.uniform(0.005, 0.05) * LAM)
            sc = Displaced(inner, tuple(x0))
            closed = rad.displaced_power_ratio(x0, n) * dipole_pattern(n)
        else:
            t1, p1, c0 = rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi), rng.uniform(0.05, 0.5)
            sc = HarmonicAsymmetry(c0=c0, theta1=t1, phi1=p1)
            th = math.acos(n[2])
            closed = rad.asymmetry_pattern(th, math.atan2(n[1], n[0]), t1, p1, c0) * dipole_pattern(n)
        amp = integrate_density(sc, kernel(GreenKind.CONTROL_ORDER1, n))
        route = abs(amp) ** 2 * dipole_pattern(n)
        worst = max(worst, abs(route / closed - 1))
    verdict(11, "two-path equivalence", worst <= 1e-6, f"worst relative gap {worst:.2e} over 100 draws (tol 1e-6)")


def test_12_compound_identity(verdict):
    rng = np.random.default_rng(7)
    n = random_unit(rng, 1000)
    x = rng.uniform(-1, 1, (3, 1000)) * LAM
    m = rng.integers(-5, 6, 1000)
    worst = 0.0
    for i in range(1000):
        total = g_free(n[:, i], x[:, i]) + g_image(n[:, i], x[:, i], r_phase=math.pi * m[i], reflectivity=1.0)
        worst = max(worst, abs(abs(total) - abs(g_control(n[:, i], x[:, i]))))
    verdict(12, "compound identity", worst <= 1e-12, f"max ||g_f + g_i| - |g_c|| = {worst:.2e} (tol 1e-12)")


def test_13_green_matrix(verdict):
    rng = np.random.default_rng(13)
    pol = DEFAULT_ILLUMINATION.pol_vec
    pattern_gap, transverse_gap = 0.0, 0.0
    for n in random_unit(rng, 100).T:
        G = green_matrix(n)
        lhs = np.linalg.norm(G @ pol) ** 2
        rhs = K**2 / (16 * math.pi**2) * float(dipole_pattern(n))
        pattern_gap = max(pattern_gap, abs(lhs - rhs))
        transverse_gap = max(transverse_gap, float(np.max(np.abs(G @ n))))
    ok = pattern_gap <= 1e-12 and transverse_gap <= 1e-12
    verdict(13, "Green matrix", ok, f"pattern gap {pattern_gap:.1e}, |G n| max {transverse_gap:.1e} (tol 1e-12)")


def test_14_cli_determinism(verdict, tmp_path):
    configs = {
        "backaction-curves": {"na_grid": [0.1, 0.4, 1.0]},
        "asymmetry-map": {"n_theta": 10, "n_phi": 8},
        "sphere-ratios": {"radius_grid": [0.05, 0.3], "fixed_radii": [0.1], "na_grid": [0.4]},
        "heisenberg-check": {"na_grid": [0.4, 1.0]},
        "pattern": {"scatterer": {"kind": "displaced", "inner": {"kind": "ball", "R0_over_lambda": 0.02},
                                  "x0_over_lambda": [0.0, 0.0, 0.008]},
                    "region": "control", "n_theta": 9, "n_phi": 8},
    }
    mismatched = []
    files = 0
    for command, fields in configs.items():
        outs = []
        for attempt in ("a", "b"):
            code, out = run_cli(tmp_path, f"{command}-{attempt}", command, **fields)
            assert code == EXIT_OK
            outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
        files += len(outs[0])
        if outs[0] != outs[1]:
            mismatched.append(command)
    verdict(14, "CLI determinism", not mismatched,
            f"{files} files from {len(configs)} commands byte-identical across reruns"
            if not mismatched else f"differences in {mismatched}")
