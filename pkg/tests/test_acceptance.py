"""The ten acceptance criteria, each at its stated tolerance and runtime budget.

Every test records a one-line verdict; the lines are repeated in the
pytest terminal summary under "acceptance criteria".  Criteria 3, 4 and 6
run the grid at h = 1/128 and take several minutes in total.
"""
import time

import numpy as np
import pytest

from twophase import detectors as det
from twophase import kernel as kr
from twophase.experiments import run
from twophase.inversion import CauchyPair, forward_dirichlet, poisson_nonuniqueness_demo, reconstruct_radius
from twophase.layered import AnnularConductor, solve_auxiliary_annulus
from twophase.presets import get_preset

SIMULATING_PRESETS = ("concentric-benchmark", "concentric-vs-offset", "ibvp-heating")
_REPORTS = {}


def preset_report(name):
    """Run a preset once per session; criteria 3, 4 and 9 share the simulations."""
    if name not in _REPORTS:
        _REPORTS[name] = run(get_preset(name))
    return _REPORTS[name]


def test_criterion_01_kernel_identities(verdict):
    start = time.perf_counter()
    r = np.geomspace(0.05, 10.0, 200)
    rw = np.geomspace(0.05, 10.0, 50)
    residual = limit = wron = 0.0
    for N in (2, 3):
        for sigma in (0.5, 1.0, 2.0):
            p = kr.OdeParams(N, sigma)
            residual = max(residual,
                           kr.ode_residual(lambda x: kr.eval_f_reg(x, p), r, p).max(),
                           kr.ode_residual(lambda x: kr.f_sing_values(x, p), r, p).max())
            lim = kr.limit_checks(p)
            limit = max(limit, abs(lim["sing_flux_limit"] - 1.0), abs(lim["f_reg_0"] - 1.0),
                        abs(lim["f_reg_prime_0"]))
            assert lim["f_sing_small"] < 0
            wron = max(wron, kr.wronskian_defect(rw, p, scaled=True).max())
    elapsed = time.perf_counter() - start
    ok = residual < 1e-8 and limit < 1e-6 and wron < 1e-8 and elapsed < 2.0
    verdict(1, "kernel identities", ok,
            f"residual {residual:.2e}, limits {limit:.2e}, Wronskian {wron:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_coefficient_roundtrip(verdict):
    start = time.perf_counter()
    err = kr.coefficient_roundtrip(trials=1000, seed=20240601, bound=10.0)
    elapsed = time.perf_counter() - start
    ok = err < 1e-9 and elapsed < 1.0
    verdict(2, "coefficient round trip", ok, f"max error {err:.2e} over 1000 trials, {elapsed:.2f} s")
    assert ok


def test_criterion_03_layered_grid_cross_validation(verdict):
    rep = preset_report("concentric-benchmark")
    rows = rep.metrics["refinement"]
    hs = [row["h"] for row in rows]
    errors = [row["max_error"] for row in rows]
    assert hs == [1 / 32, 1 / 64, 1 / 128]
    decreasing = all(b < a for a, b in zip(errors, errors[1:]))
    ok = errors[-1] <= 5e-2 and decreasing and rep.wall_clock_s < 180
    verdict(3, "layered/grid cross-validation", ok,
            "errors " + ", ".join(f"{e:.2e}" for e in errors) + f", {rep.wall_clock_s:.0f} s")
    assert ok


def test_criterion_04_stationarity_dichotomy(verdict):
    rep = preset_report("concentric-vs-offset")
    cfg = rep.config["params"]
    assert cfg["h"] == 1 / 128 and cfg["offsets"] == [0.0, 0.2]
    defects = rep.metrics["aggregate_defects"]
    conc, off = defects["0.0"], defects["0.2"]
    ok = conc <= 2e-2 and off >= 5 * conc and rep.wall_clock_s < 300
    verdict(4, "stationarity dichotomy", ok,
            f"concentric {conc:.2e}, offset {off:.2e} (ratio {off / conc:.0f}), {rep.wall_clock_s:.0f} s")
    assert ok


ANNULI = [(0.4, 1.0, 2.0, 1.0, 1.0, None), (0.5, 1.0, 0.5, 1.0, 2.0, None), (0.3, 0.8, 3.0, 0.7, 1.5, (0.5, 0.6))]


def test_criterion_05_annulus_rejection(verdict):
    start = time.perf_counter()
    slopes = []
    for a, b, sc, ss, sm, core in ANNULI:
        f = solve_auxiliary_annulus(AnnularConductor(a, b, sc, ss, sm, core))
        slopes.append((f.layers[0].profile.evaluate(a)[1], f.layers[-1].profile.evaluate(b)[1]))
    elapsed = time.perf_counter() - start
    ok = all(inner > 0 > outer for inner, outer in slopes) and elapsed < 1.0
    verdict(5, "annulus rejection", ok,
            "; ".join(f"W'(-) {i:+.3f} W'(+) {o:+.3f}" for i, o in slopes) + f", {elapsed:.2f} s")
    assert ok


def test_criterion_06_overdetermined_defects(verdict):
    start = time.perf_counter()
    rep = run(get_preset("overdetermined-neumann"))
    elapsed = time.perf_counter() - start
    assert rep.config["params"]["h"] == 1 / 128
    rows = {row["offset"]: row for row in rep.metrics["rows"]}
    conc, off = rows[0.0], rows[0.2]
    ok = (conc["neumann_defect"] <= 1e-2 and conc["inner_level_defect"] <= 1e-2
          and off["neumann_defect"] >= 5 * conc["neumann_defect"]
          and off["inner_level_defect"] >= 5 * conc["inner_level_defect"]
          and elapsed < 120)
    verdict(6, "overdetermined defects", ok,
            f"Neumann {conc['neumann_defect']:.2e} vs {off['neumann_defect']:.2e}, "
            f"inner level {conc['inner_level_defect']:.2e} vs {off['inner_level_defect']:.2e}, {elapsed:.1f} s")
    assert ok


def test_criterion_07_inversion(verdict):
    start = time.perf_counter()
    worst = 0.0
    for rho in np.round(np.arange(1, 10) / 10, 1):
        trace = forward_dirichlet(rho, 1.0, 2.0, 1.0, -0.5)
        worst = max(worst, abs(reconstruct_radius(CauchyPair(-0.5, trace), 1.0, 2.0, 1.0).rho - rho))
    rows = poisson_nonuniqueness_demo(np.round(np.arange(1, 10) / 10, 1), 2.0, 1.0)
    spread = max(np.ptp([r.boundary_value for r in rows]), np.ptp([r.boundary_flux for r in rows]))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-3 and spread <= 1e-12 and elapsed < 10
    verdict(7, "inversion", ok, f"round-trip error {worst:.2e}, Poisson spread {spread:.1e}, {elapsed:.1f} s")
    assert ok


def test_criterion_08_comparison_battery(verdict):
    start = time.perf_counter()
    results = kr.random_comparison_battery(per_case=200, seed=20240601, sigma_range=(0.3, 3.0))
    elapsed = time.perf_counter() - start
    per_case = {c: sum(r.case_id == c for r in results) for c in (1, 2, 3)}
    crossings = sum(len(r.reports) for r in results)
    violations = sum(r.violations for r in results)
    ok = violations == 0 and all(n == 200 for n in per_case.values()) and elapsed < 30
    verdict(8, "comparison battery", ok,
            f"{len(results)} configurations, {crossings} crossings, {violations} violations, {elapsed:.1f} s")
    assert ok


def test_criterion_09_maximum_principle(verdict):
    lo, hi = np.inf, -np.inf
    for name in SIMULATING_PRESETS:
        rep = preset_report(name)
        for check in rep.checks:
            if check.name == "values_min":
                lo = min(lo, check.value)
            elif check.name == "values_max":
                hi = max(hi, check.value)
    ok = lo >= -1e-12 and hi <= 1 + 1e-12
    verdict(9, "maximum principle", ok, f"all simulated values in [{lo:.3e}, 1 - {1 - hi:.1e}]")
    assert ok


def test_criterion_10_geometry_checks(verdict):
    start = time.perf_counter()
    circles = det.parallel_curve_check(det.circle((0, 0), 2.0, 256), det.circle((0, 0), 1.0, 256))
    ell = det.parallel_curve_check(det.ellipse(2.0, 1.2, 512), det.ellipse(2.0, 1.2, 512, offset=0.3))
    elapsed = time.perf_counter() - start
    ok = circles.weingarten_defect <= 1e-3 and ell.weingarten_defect >= 0.05 and elapsed < 1.0
    verdict(10, "geometry checks", ok,
            f"circles {circles.weingarten_defect:.1e}, ellipse {ell.weingarten_defect:.3f}, {elapsed:.2f} s")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
