"""Experiment pipelines behind the command line.

``run(config)`` validates a configuration, dispatches on its ``kind`` and
returns a :class:`RunReport` whose checks decide the exit status.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import detectors as det
from . import grid as fd
from . import inversion as inv
from . import kernel as kr
from . import layered as lay
from .config import validate
from .errors import ConfigError
from .presets import DEFAULT_SEED


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    op: str  # "<=", ">=", "<", ">", "=="

    @property
    def passed(self) -> bool:
        v, t = self.value, self.threshold
        return bool({"<=": v <= t, ">=": v >= t, "<": v < t, ">": v > t, "==": v == t}[self.op])

    def as_dict(self):
        return {"name": self.name, "value": _clean(self.value), "threshold": self.threshold,
                "op": self.op, "passed": self.passed}


@dataclass
class RunReport:
    config: dict
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    artifacts: list = field(default_factory=list)
    seed: Optional[int] = None
    wall_clock_s: float = 0.0
    started_at: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self):
        return {"config": self.config, "checks": [c.as_dict() for c in self.checks],
                "metrics": _clean(self.metrics), "artifacts": sorted(self.artifacts),
                "seed": self.seed, "passed": self.passed,
                "wall_clock_s": round(self.wall_clock_s, 3), "started_at": self.started_at}

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else str(x)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class _Context:
    def __init__(self, config, out_dir, seed):
        self.params = config.get("params", {})
        self.thr = config.get("thresholds", {})
        self.out = Path(out_dir) if out_dir is not None else None
        self.seed = seed
        self.report = RunReport(config=config, seed=seed)
    def check(self, name, value, op, key=None, threshold=None):
        if threshold is None:
            try:
                threshold = self.thr[key or name]
            except KeyError:
                raise ConfigError(f"thresholds: missing {key or name!r}") from None
        self.report.checks.append(Check(name, float(value), float(threshold), op))

    def metric(self, name, value):
        self.report.metrics[name] = value

    def path(self, filename):
        if self.out is None:
            return None
        self.out.mkdir(parents=True, exist_ok=True)
        self.report.artifacts.append(filename)
        return self.out / filename


def _conductors(p, **defaults):
    c = dict(sigma_c=2.0, sigma_s=1.0, sigma_m=1.0)
    c.update(defaults)
    c.update(p.get("conductors", {}))
    return c


def _bounds_check(ctx, name, value_range):
    slack = ctx.thr.get("value_bound_slack", 1e-12)
    lo, hi = value_range
    ctx.check(f"{name}_min", lo, ">=", threshold=-slack)
    ctx.check(f"{name}_max", hi, "<=", threshold=1.0 + slack)


# ---------------------------------------------------------------------------
# kernel-eval
# ---------------------------------------------------------------------------

def _run_kernel(ctx):
    p = ctx.params
    dims, sigmas = p.get("dims", [2, 3]), p.get("sigmas", [0.5, 1.0, 2.0])
    r = np.geomspace(p.get("r_min", 0.05), p.get("r_max", 10.0), p.get("residual_points", 200))
    rw = np.geomspace(p.get("r_min", 0.05), p.get("r_max", 10.0), p.get("wronskian_points", 50))
    worst_res = worst_lim = worst_w = 0.0
    rows = []
    for N in dims:
        for s in sigmas:
            prm = kr.OdeParams(N, s)
            res_reg = kr.ode_residual(lambda x: kr.eval_f_reg(x, prm), r, prm)
            res_sing = kr.ode_residual(lambda x: kr.f_sing_values(x, prm), r, prm)
            lim = kr.limit_checks(prm)
            lim_err = max(abs(lim["sing_flux_limit"] - 1.0), abs(lim["f_reg_0"] - 1.0), abs(lim["f_reg_prime_0"]))
            wd = kr.wronskian_defect(rw, prm, scaled=True)
            worst_res = max(worst_res, res_reg.max(), res_sing.max())
            worst_lim = max(worst_lim, lim_err)
            worst_w = max(worst_w, float(wd.max()))
            rows.append({"N": N, "sigma": s, "residual_reg": float(res_reg.max()),
                         "residual_sing": float(res_sing.max()), "limit_error": lim_err,
                         "f_sing_small": lim["f_sing_small"], "wronskian_scaled_defect": float(wd.max())})
            if lim["f_sing_small"] >= 0:
                worst_lim = max(worst_lim, 1.0)
    err = kr.coefficient_roundtrip(p.get("roundtrip_trials", 1000), ctx.seed, p.get("coefficient_bound", 10.0))
    ctx.check("ode_residual", worst_res, "<")
    ctx.check("limit_error", worst_lim, "<")
    ctx.check("wronskian_defect", worst_w, "<")
    ctx.check("roundtrip_error", err, "<")
    ctx.metric("per_parameter", rows)
    path = ctx.path("kernel_checks.csv")
    if path:
        det.write_csv(path, rows)


# ---------------------------------------------------------------------------
# stationary
# ---------------------------------------------------------------------------

def _run_stationary(ctx):
    p = ctx.params
    if p["problem"] == "annulus":
        return _run_annulus(ctx)
    cond = _conductors(p)
    rho, rho0 = p.get("rho", 0.35), p.get("rho_outer", 1.0)
    ref = lay.solve_auxiliary_concentric(lay.LayeredConductor(rho, rho0, cond["sigma_c"], cond["sigma_s"],
                                                              cond["sigma_m"]))
    geom = fd.Geometry2D(fd.Disk((0.0, 0.0), rho0), (fd.Disk((0.0, 0.0), rho),), **cond)
    radii = p.get("radii", [0.1, 0.2, 0.3, 0.5, 0.7, 0.9])
    n_circ = p.get("samples_per_circle", 64)
    T = p.get("T", 12.0)
    errors, rows = [], []
    lo, hi = 1.0, 0.0
    for h in p.get("hs", [1 / 32, 1 / 64, 1 / 128]):
        grid = fd.Grid2D.around(geom, h)
        steps = fd.time_steps(T, p.get("dt_per_h", 2.56) * h, p.get("coarse_after", 4.0), p.get("coarse_factor", 4))
        ts = fd.simulate_cauchy(geom, grid, T, steps, record_times=[])
        lo, hi = min(lo, ts.value_range[0]), max(hi, ts.value_range[1])
        lf = fd.laplace_transform_field(ts)
        err = max(float(np.max(np.abs(lf.on_circle((0.0, 0.0), r, n_circ) - ref(r)))) for r in radii)
        errors.append(err)
        rows.append({"h": h, "steps": ts.step_count, "max_error": err, "tail_bound": float(lf.error_bar.max())})
        if p.get("export_field") and h == p["hs"][-1]:
            path = ctx.path("laplace_field.csv")
            if path:
                fd.write_field_csv(path, grid, lf.values)
    ctx.check("max_error_finest", errors[-1], "<=")
    ctx.check("strictly_decreasing", float(all(b < a for a, b in zip(errors, errors[1:]))), "==",
              threshold=1.0)
    _bounds_check(ctx, "values", (lo, hi))
    ctx.metric("refinement", rows)
    path = ctx.path("refinement.csv")
    if path:
        det.write_csv(path, rows)


def _run_annulus(ctx):
    rows = []
    for a in ctx.params["annuli"]:
        k = lay.AnnularConductor(a["rho_minus"], a["rho_plus"], a.get("sigma_c", 2.0), a.get("sigma_s", 1.0),
                                 a.get("sigma_m", 1.0), tuple(a["core"]) if "core" in a else None)
        f = lay.solve_auxiliary_annulus(k)
        inner = f.layers[0].profile.evaluate(k.rho_minus)[1]
        outer = f.layers[-1].profile.evaluate(k.rho_plus)[1]
        resid = max(max(v, q) for v, q in f.transmission_residuals())
        rows.append({"rho_minus": k.rho_minus, "rho_plus": k.rho_plus, "slope_inner": inner,
                     "slope_outer": outer, "transmission_residual": resid})
        tag = f"{k.rho_minus:g}-{k.rho_plus:g}"
        ctx.check(f"slope_inner_positive[{tag}]", inner, ">", threshold=0.0)
        ctx.check(f"slope_outer_negative[{tag}]", outer, "<", threshold=0.0)
        ctx.check(f"transmission_residual[{tag}]", resid, "<", key="transmission_residual")
    ctx.metric("annuli", rows)
    path = ctx.path("annulus.csv")
    if path:
        det.write_csv(path, rows)


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def _geometry_from(p, cond):
    incl = tuple(fd.Disk(tuple(d.get("center", (0.0, 0.0))), d["radius"]) for d in p.get("inclusions", []))
    return fd.Geometry2D(fd.Disk((0.0, 0.0), p.get("omega_radius", 1.0)), incl, **cond)


def _run_simulate(ctx):
    p = ctx.params
    cond = _conductors(p)
    geom = _geometry_from(p, cond)
    h, T, dt = p.get("h", 1 / 64), p.get("T", 1.0), p.get("dt", 0.01)
    if p.get("problem", "cauchy") == "ibvp":
        grid = fd.Grid2D.covering(geom, h)
        ts = fd.simulate_ibvp(geom, grid, T, dt, scheme=p.get("scheme", "euler"),
                              boundary=p.get("boundary", "cut"), record_every=p.get("record_every", 1))
    else:
        grid = fd.Grid2D.around(geom, h)
        ts = fd.simulate_cauchy(geom, grid, T, dt, scheme=p.get("scheme", "euler"),
                                record_every=p.get("record_every", 1))
    _bounds_check(ctx, "values", ts.value_range)
    frames = np.stack(ts.values)
    step_drop = float(np.max(frames[:-1] - frames[1:])) if len(frames) > 1 else 0.0
    if p.get("problem", "cauchy") == "ibvp":
        ctx.check("monotone_heating", step_drop, "<=", key="monotone_slack")
    probe = p.get("probe_radius")
    if probe is not None:
        curve = det.circle((0.0, 0.0), probe, 256)
        rep = det.stationarity_defect(ts, curve, t_min=0.0)
        ctx.check("angular_spread", rep.aggregate, "<=")
        ctx.metric("probe", rep.records())
    ctx.metric("steps", ts.step_count)
    if p.get("export_frames"):
        path = ctx.path("frames.ndjson")
        if path:
            fd.write_frames_ndjson(path, ts)


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------

def _run_detect(ctx):
    p = ctx.params
    if "circles" in p or "ellipse" in p:
        _run_geometry(ctx)
    if "offsets" in p:
        _run_stationarity(ctx)


def _run_geometry(ctx):
    p = ctx.params
    if "circles" in p:
        c = p["circles"]
        rep = det.parallel_curve_check(det.circle((0, 0), c.get("outer", 2.0), c.get("points", 256)),
                                       det.circle((0, 0), c.get("inner", 1.0), c.get("points", 256)))
        ctx.check("circle_weingarten", rep.weingarten_defect, "<=")
        ctx.metric("circles", rep.summary())
    if "ellipse" in p:
        e = p["ellipse"]
        n = e.get("points", 512)
        outer = det.ellipse(e.get("a", 2.0), e.get("b", 1.2), n)
        inner = det.ellipse(e.get("a", 2.0), e.get("b", 1.2), n, offset=e.get("offset", 0.3))
        rep = det.parallel_curve_check(outer, inner)
        ctx.check("ellipse_weingarten", rep.weingarten_defect, ">=", key="ellipse_weingarten_min")
        ctx.metric("ellipse", rep.summary())


def _run_stationarity(ctx):
    p = ctx.params
    cond = _conductors(p)
    R, rho = p.get("omega_radius", 1.0), p.get("inclusion_radius", 0.35)
    curve = det.circle((0.0, 0.0), p.get("curve_radius", 0.7), p.get("curve_points", 256))
    defects, records = [], []
    lo, hi = 1.0, 0.0
    for off in p["offsets"]:
        geom = fd.Geometry2D(fd.Disk((0.0, 0.0), R), (fd.Disk((off, 0.0), rho),), **cond)
        grid = fd.Grid2D.around(geom, p.get("h", 1 / 64))
        ts = fd.simulate_cauchy(geom, grid, p.get("T", 2.0), p.get("dt", 0.01),
                                record_every=p.get("record_every", 5))
        lo, hi = min(lo, ts.value_range[0]), max(hi, ts.value_range[1])
        rep = det.stationarity_defect(ts, curve, t_min=p.get("t_min", 0.01))
        defects.append(rep.aggregate)
        records += [dict(r, offset=off) for r in rep.records()]
        del ts
    base = defects[0]
    ctx.check("concentric_defect", base, "<=")
    ratio = min(d / base for d in defects[1:]) if base > 0 else float("inf")
    ctx.check("offset_ratio", ratio, ">=")
    _bounds_check(ctx, "values", (lo, hi))
    ctx.metric("aggregate_defects", dict(zip([str(o) for o in p["offsets"]], defects)))
    path = ctx.path("stationarity.ndjson")
    if path:
        det.write_ndjson(path, records)


# ---------------------------------------------------------------------------
# overdetermined
# ---------------------------------------------------------------------------

def _run_overdetermined(ctx):
    p = ctx.params
    cond = _conductors(p)
    alpha, beta, c = p.get("alpha", 1.0), p.get("beta", 1.0), p.get("c", 0.0)
    R, rho = p.get("R", 1.0), p.get("rho", 0.35)
    spec = lay.OverdeterminedSpec(alpha, beta, c, R, rho, cond["sigma_c"], cond["sigma_s"])
    _, d_exact = lay.solve_overdetermined_radial(spec)
    wanted = p.get("detectors", ["neumann", "inner-level"])
    r_in = p.get("inner_radius", 0.7)
    res = {"neumann": [], "inner-level": []}
    rows = []
    for off in p.get("offsets", [0.0, 0.2]):
        geom = fd.Geometry2D(fd.Disk((0.0, 0.0), R), (fd.Disk((off, 0.0), rho),), **cond)
        grid = fd.Grid2D.covering(geom, p.get("h", 1 / 64))
        f = fd.solve_stationary_transmission(geom, grid, "overdetermined", alpha=alpha, beta=beta, c=c,
                                             boundary=p.get("boundary", "cut"))
        row = {"offset": off, "residual": f.residual}
        if "neumann" in wanted:
            tr = fd.neumann_trace(f, (0.0, 0.0), R, conductivity=cond["sigma_s"], boundary_value=c,
                                  n=p.get("trace_points", 256))
            nc = det.neumann_constancy_defect(tr)
            res["neumann"].append(nc)
            row.update(neumann_defect=nc.defect, flux_mean=nc.mean)
            path = ctx.path(f"trace_offset{off:g}.csv")
            if path:
                det.write_csv(path, det.curve_records(tr, f"offset={off:g}"))
        if "inner-level" in wanted:
            il = det.inner_level_defect(f, r_in, c=c)
            res["inner-level"].append(il)
            row.update(inner_level_defect=il.defect, inner_mean=il.mean)
        rows.append(row)
    if res["neumann"]:
        nc0 = res["neumann"][0]
        ctx.check("neumann_defect", nc0.defect, "<=")
        ctx.check("neumann_offset_ratio", min(r.defect for r in res["neumann"][1:]) / nc0.defect, ">=",
                  key="offset_ratio")
        ctx.check("flux_negative", float(nc0.sign_ok), "==", threshold=1.0)
        if "flux_vs_layered" in ctx.thr:
            ctx.check("flux_vs_layered", abs(nc0.mean - d_exact), "<=")
    if res["inner-level"]:
        il0 = res["inner-level"][0]
        ctx.check("inner_level_defect", il0.defect, "<=")
        ctx.check("inner_level_offset_ratio", min(r.defect for r in res["inner-level"][1:]) / il0.defect, ">=",
                  key="offset_ratio")
        ctx.check("inner_mean_above_c", float(il0.sign_ok), "==", threshold=1.0)
    ctx.metric("layered_d", d_exact)
    ctx.metric("rows", rows)
    path = ctx.path("overdetermined.csv")
    if path:
        det.write_csv(path, rows, sorted({k for r in rows for k in r}))


# ---------------------------------------------------------------------------
# invert
# ---------------------------------------------------------------------------

def _run_invert(ctx):
    p = ctx.params
    R, g, N = p.get("R", 1.0), p.get("g", -0.5), p.get("N", 2)
    sc, ss = p.get("sigma_c", 2.0), p.get("sigma_s", 1.0)
    rhos = p.get("rhos", [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    if p.get("mode", "roundtrip") == "contrast":
        table = inv.identifiability_table(rhos, R, sc, ss, g, N)
        pv = [r["poisson_value"] for r in table]
        pf = [r["poisson_flux"] for r in table]
        mv = [r["modified_value"] for r in table]
        ctx.check("poisson_value_spread", max(pv) - min(pv), "<=", key="poisson_spread")
        ctx.check("poisson_flux_spread", max(pf) - min(pf), "<=", key="poisson_spread")
        ctx.check("modified_spread", max(mv) - min(mv), ">", key="modified_spread_min")
        ctx.metric("table", table)
        path = ctx.path("contrast.csv")
        if path:
            det.write_csv(path, table)
        return
    rows = []
    worst = 0.0
    for s_c, s_s in [(sc, ss)] + [tuple(x) for x in p.get("pairs", [])]:
        scan = inv.scan_forward_map(R, s_c, s_s, g, N)
        ctx.check(f"monotone[{s_c:g},{s_s:g}]", float(inv.is_strictly_monotone(scan)), "==", threshold=1.0)
        if (s_c, s_s) != (sc, ss):
            continue
        for rho in rhos:
            trace = inv.forward_dirichlet(rho, R, s_c, s_s, g, N)
            rec = inv.reconstruct_radius(inv.CauchyPair(g, trace), R, s_c, s_s, N)
            worst = max(worst, abs(rec.rho - rho))
            rows.append({"rho": rho, "trace": trace, "recovered": rec.rho, "residual": rec.residual})
        path = ctx.path("forward_map.csv")
        if path:
            det.write_csv(path, [{"rho": s.rho, "boundary_value": s.boundary_value} for s in scan])
    ctx.check("roundtrip_error", worst, "<=")
    ctx.metric("roundtrip", rows)


# ---------------------------------------------------------------------------
# compare-lemma
# ---------------------------------------------------------------------------

def _run_compare(ctx):
    p = ctx.params
    results = kr.random_comparison_battery(p.get("per_case", 200), ctx.seed, tuple(p.get("sigma_range", (0.3, 3.0))),
                                           tuple(p.get("dims", (2, 3))), p.get("panels", 2048))
    per_case = {}
    records = []
    for res in results:
        c = per_case.setdefault(res.case_id, {"configs": 0, "crossings": 0, "violations": 0})
        c["configs"] += 1
        c["crossings"] += len(res.reports)
        c["violations"] += res.violations
        for rep in res.reports:
            records.append({"case": res.case_id, "rho": res.rho, "side": rep.side, "crossing": rep.crossing_radius,
                            "slope_f1": rep.slope_f1, "slope_f2": rep.slope_f2, "holds": rep.assertion_holds})
    ctx.check("violations", sum(c["violations"] for c in per_case.values()), "<=")
    ctx.metric("per_case", per_case)
    path = ctx.path("crossings.ndjson")
    if path:
        det.write_ndjson(path, records)


_DISPATCH = {
    "kernel-eval": _run_kernel,
    "stationary": _run_stationary,
    "simulate": _run_simulate,
    "detect": _run_detect,
    "invert": _run_invert,
    "compare-lemma": _run_compare,
    "overdetermined": _run_overdetermined,
}


def run(config: dict, out_dir=None, seed: Optional[int] = None) -> RunReport:
    """Validate, execute and (when ``out_dir`` is given) write ``report.json``."""
    validate(config)
    seed = seed if seed is not None else config.get("seed", DEFAULT_SEED)
    ctx = _Context(config, out_dir, seed)
    started = time.perf_counter()
    ctx.report.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    _DISPATCH[config["kind"]](ctx)
    ctx.report.wall_clock_s = time.perf_counter() - started
    if ctx.out is not None:
        ctx.out.mkdir(parents=True, exist_ok=True)
        (ctx.out / "report.json").write_text(ctx.report.to_json() + "\n", encoding="utf-8")
    return ctx.report
