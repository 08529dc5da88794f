"""Numerical defects for the overdetermined hypotheses.

Every detector returns a nonnegative number that vanishes on exactly
symmetric input; the thresholds separating "symmetric" from "not" live in
the CLI presets, not here.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    CircleIntersectsInclusion,
    CurveOutsideGrid,
    DegenerateCurve,
    GeometryError,
    HypothesisViolation,
)

MIN_CURVE_POINTS = 16


# ---------------------------------------------------------------------------
# curves
# ---------------------------------------------------------------------------

def _segments_cross(points, closed):
    """True if two non-adjacent segments of the polyline intersect."""
    p = points
    q = np.roll(points, -1, axis=0) if closed else points[1:]
    p = p[: len(q)]
    m = len(p)
    a, b = p[:, None, :], q[:, None, :]
    c, d = p[None, :, :], q[None, :, :]

    def orient(u, v, w):
        return np.sign((v[..., 0] - u[..., 0]) * (w[..., 1] - u[..., 1])
                       - (v[..., 1] - u[..., 1]) * (w[..., 0] - u[..., 0]))

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    hit = (o1 * o2 < 0) & (o3 * o4 < 0)
    i, j = np.indices((m, m))
    adjacent = (np.abs(i - j) <= 1)
    if closed:
        adjacent |= (np.abs(i - j) == m - 1)
    return bool(np.any(hit & ~adjacent))


@dataclass(frozen=True)
class CurveSamples:
    """Ordered points on a curve, optionally carrying one value per point."""

    points: np.ndarray
    closed: bool = True
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise GeometryError("points must have shape (n, 2)")
        if len(pts) < MIN_CURVE_POINTS:
            raise GeometryError(f"need at least {MIN_CURVE_POINTS} points, got {len(pts)}")
        object.__setattr__(self, "points", pts)
        if self.values is not None:
            vals = np.asarray(self.values, dtype=float)
            if vals.shape != (len(pts),):
                raise GeometryError("one value per point is required")
            object.__setattr__(self, "values", vals)
        if self.closed and _segments_cross(pts, True):
            raise GeometryError("closed curve intersects itself")

    def __len__(self):
        return len(self.points)

    def weights(self):
        """Arclength quadrature weights (trapezoid)."""
        seg = np.linalg.norm(np.diff(self.points, axis=0, append=self.points[:1]), axis=1)
        if not self.closed:
            seg = seg[:-1]
            w = np.zeros(len(self.points))
            w[:-1] += 0.5 * seg
            w[1:] += 0.5 * seg
            return w
        return 0.5 * (seg + np.roll(seg, 1))

    def mean(self, values=None):
        vals = self.values if values is None else np.asarray(values, dtype=float)
        w = self.weights()
        return float(np.dot(w, vals) / w.sum())


def circle(center=(0.0, 0.0), radius: float = 1.0, n: int = 256) -> CurveSamples:
    t = 2.0 * np.pi * np.arange(n) / n
    return CurveSamples(np.column_stack([center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]))


def ellipse(a: float, b: float, n: int = 512, center=(0.0, 0.0), offset: float = 0.0) -> CurveSamples:
    """Ellipse with semi-axes ``a``, ``b``; ``offset > 0`` moves each point inward along the normal."""
    t = 2.0 * np.pi * np.arange(n) / n
    x, y = a * np.cos(t), b * np.sin(t)
    nx, ny = b * np.cos(t), a * np.sin(t)
    norm = np.hypot(nx, ny)
    x = x - offset * nx / norm
    y = y - offset * ny / norm
    return CurveSamples(np.column_stack([center[0] + x, center[1] + y]))


def _point_polyline_distance(points, poly):
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    out = np.empty(len(points))
    denom = np.einsum("ij,ij->i", ab, ab)
    for k, p in enumerate(points):
        ap = p - a
        t = np.clip(np.einsum("ij,ij->i", ap, ab) / denom, 0.0, 1.0)
        d = ap - t[:, None] * ab
        out[k] = np.sqrt(np.min(np.einsum("ij,ij->i", d, d)))
    return out


def arclength_resample(curve: CurveSamples, n: Optional[int] = None) -> np.ndarray:
    """Points equally spaced in arclength along a periodic spline through the curve."""
    pts = curve.points
    n = len(pts) if n is None else n
    closed = np.vstack([pts, pts[:1]])
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(closed, axis=0), axis=1))])
    if np.any(np.diff(s) <= 0):
        raise DegenerateCurve("repeated consecutive points")
    spline = CubicSpline(s, closed, bc_type="periodic", axis=0)
    # refine the arclength table on the spline itself
    fine = np.linspace(0.0, s[-1], 8 * len(pts) + 1)
    fp = spline(fine)
    sf = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(fp, axis=0), axis=1))])
    target = np.linspace(0.0, sf[-1], n, endpoint=False)
    return spline(np.interp(target, sf, fine))


def discrete_curvature(points: np.ndarray) -> np.ndarray:
    """Signed curvature of the circumcircle through each point and its neighbours.

    Positive for counter-clockwise convex arcs.
    """
    prev = np.roll(points, 1, axis=0)
    nxt = np.roll(points, -1, axis=0)
    a = np.linalg.norm(points - prev, axis=1)
    b = np.linalg.norm(nxt - points, axis=1)
    c = np.linalg.norm(nxt - prev, axis=1)
    u, v = points - prev, nxt - points
    cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    denom = a * b * c
    if np.any(denom == 0):
        raise DegenerateCurve("coincident points in a curvature triple")
    return 2.0 * cross / denom


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class StationarityReport:
    times: list
    mean: list
    defect: list
    aggregate: float

    def records(self):
        return [{"t": t, "mean": a, "defect": d} for t, a, d in zip(self.times, self.mean, self.defect)]


@dataclass
class GeometryReport:
    R: float
    distance_defect: float
    curvature: np.ndarray
    weingarten_defect: float
    violations: int

    def summary(self):
        return {"R": self.R, "distance_defect": self.distance_defect,
                "weingarten_defect": self.weingarten_defect, "violations": self.violations,
                "kappa_min": float(self.curvature.min()), "kappa_max": float(self.curvature.max())}


@dataclass
class ConstancyReport:
    """Spread of a trace about its mean plus the accompanying sign check."""

    defect: float
    mean: float
    sign_ok: bool

    def __float__(self):
        return self.defect


# ---------------------------------------------------------------------------
# detectors
# ---------------------------------------------------------------------------

def stationarity_defect(ts, curve: CurveSamples, t_min: float = 0.01, times=None) -> StationarityReport:
    """Spread of ``u(., t)`` along ``curve`` for every recorded time ``t >= t_min``."""
    grid = ts.grid
    lo = np.array([grid.x[0], grid.y[0]])
    hi = np.array([grid.x[-1], grid.y[-1]])
    if np.any(curve.points < lo) or np.any(curve.points > hi):
        raise CurveOutsideGrid("curve leaves the interpolation range of the grid")
    wanted = None if times is None else np.asarray(times, dtype=float)
    out_t, out_a, out_d = [], [], []
    interp_pts = curve.points[:, ::-1]
    for t, frame in zip(ts.times, ts.values):
        if t < t_min:
            continue
        if wanted is not None and not np.any(np.isclose(wanted, t, rtol=0, atol=1e-12)):
            continue
        u = grid.interpolator(frame)(interp_pts)
        a = curve.mean(u)
        out_t.append(float(t))
        out_a.append(a)
        out_d.append(float(np.max(np.abs(u - a))))
    if not out_t:
        raise ValueError("no recorded time falls in the requested window")
    return StationarityReport(out_t, out_a, out_d, max(out_d))


def parallel_curve_check(gamma: CurveSamples, Gamma: CurveSamples, tol: float = 1e-9) -> GeometryReport:
    """Test whether the inner curve ``Gamma`` sits at constant distance from ``gamma``.

    ``R`` is the mean distance from ``Gamma`` to ``gamma``; the curvature is
    sampled along ``gamma`` after arclength resampling.
    """
    if not (gamma.closed and Gamma.closed):
        raise GeometryError("both curves must be closed")
    dist = _point_polyline_distance(Gamma.points, gamma.points)
    R = float(dist.mean())
    if R <= tol:
        raise DegenerateCurve("curves coincide (R = 0)")
    pts = arclength_resample(gamma)
    kappa = discrete_curvature(pts)
    if np.all(np.abs(kappa) < tol):
        raise DegenerateCurve("all curvature triples are collinear")
    if np.mean(kappa) < 0:
        kappa = -kappa  # clockwise orientation
    w = 1.0 / R - kappa
    return GeometryReport(R, float(dist.max() - dist.min()), kappa, float(w.max() - w.min()),
                          int(np.sum(kappa >= 1.0 / R - tol)))


def neumann_constancy_defect(trace: CurveSamples) -> ConstancyReport:
    """``max |trace - mean|``; the flux mean should be negative."""
    if trace.values is None:
        raise ValueError("trace carries no values")
    m = trace.mean()
    return ConstancyReport(float(np.max(np.abs(trace.values - m))), m, m < 0)


def inner_level_defect(field_, r: float, *, center=(0.0, 0.0), geometry=None, c: Optional[float] = None,
                       n: int = 256) -> ConstancyReport:
    """Spread of ``u`` on the circle of radius ``r``; its mean should exceed ``c``."""
    geometry = geometry if geometry is not None else field_.meta.get("geometry")
    if geometry is not None:
        for d in geometry.inclusions:
            gap = math.hypot(d.center[0] - center[0], d.center[1] - center[1])
            if gap + d.radius >= r:
                raise CircleIntersectsInclusion(f"circle of radius {r} does not enclose the inclusion")
        if r >= geometry.omega.radius:
            raise CircleIntersectsInclusion("circle is not inside omega")
    c = field_.meta.get("c", 0.0) if c is None else c
    curve = circle(center, r, n)
    u = field_.sample(curve.points)
    m = curve.mean(u)
    return ConstancyReport(float(np.max(np.abs(u - m))), m, m > c)


# ---------------------------------------------------------------------------
# integral comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonHypotheses:
    """Data for comparing a sub-solution ``v1`` with a super-solution ``v2``.

    For radial fields ``d1``/``d2`` are the radii of the concentric sets
    ``D1 ⊂ D2`` (0 for empty) and ``omega`` the outer radius.  For grid
    fields they are :class:`~twophase.grid.Geometry2D` objects whose
    inclusions define the sets.
    """

    omega: object
    d1: object
    d2: object
    sigma_c: float
    sigma_s: float
    tol: float = 1e-9
    samples: int = 4000
    N: int = 2


@dataclass
class ComparisonCheckReport:
    margins: dict
    min_difference: float
    argmin: object
    holds: bool

    def summary(self):
        return {"margins": self.margins, "min_difference": self.min_difference,
                "argmin": self.argmin, "holds": self.holds}


def _violation(name, margin, where, tol):
    if margin < -tol:
        raise HypothesisViolation(f"{name} fails by {-margin:.3g}", location=where)


def _radial_checks(v1, v2, hyp: ComparisonHypotheses):
    R, r1, r2 = float(hyp.omega), float(hyp.d1), float(hyp.d2)
    tol = hyp.tol
    if not 0.0 <= r1 <= r2 < R:
        raise HypothesisViolation("need D1 ⊂ D2 ⊂⊂ omega", location=(r1, r2, R))
    margins = {}
    r = np.linspace(R / hyp.samples, R, hyp.samples)
    for name, v, rad, sign in (("v1", v1, r1, -1.0), ("v2", v2, r2, 1.0)):
        expected = np.where(r < rad, hyp.sigma_c, hyp.sigma_s)
        bad = np.nonzero(~np.isclose(v.conductivity(r), expected))[0]
        if bad.size:
            raise HypothesisViolation(f"{name}: conductivity does not match its set", location=float(r[bad[0]]))
        inner = v.layers[0]
        if inner.r_in == 0.0 and (inner.profile.c_sing != 0.0 or inner.profile.c_decay != 0.0):
            raise HypothesisViolation(f"{name}: singular at the origin (not H1)", location=0.0)
        # bulk: sign * (div(sigma grad v) - (v - 1)) >= 0, per layer
        worst_bulk, where_bulk = math.inf, None
        for layer in v.layers:
            lo, hi = max(layer.r_in, 0.0), min(layer.r_out, R)
            if hi <= lo:
                continue
            rr = np.linspace(lo, hi, 200)[1:-1]
            prof = layer.profile
            val = np.asarray(prof(rr))
            lv = layer.conductivity * (val - prof.offset) / prof.params.sigma - (val - 1.0)
            m = sign * lv / max(1.0, float(np.max(np.abs(val))))
            k = int(np.argmin(m))
            if m[k] < worst_bulk:
                worst_bulk, where_bulk = float(m[k]), float(rr[k])
        _violation(f"{name}: bulk inequality", worst_bulk, where_bulk, tol)
        margins[f"{name}_bulk"] = worst_bulk
        # interfaces: continuity and the sign of the flux jump
        worst_jump, worst_cont = math.inf, 0.0
        for a, b in zip(v.layers[:-1], v.layers[1:]):
            rho = a.r_out
            if rho >= R:
                continue
            va, da = a.profile.evaluate(rho)
            vb, db = b.profile.evaluate(rho)
            cont = abs(va - vb)
            if cont > 1e3 * tol:
                raise HypothesisViolation(f"{name}: value jump {cont:.3g} (not H1)", location=rho)
            worst_cont = max(worst_cont, cont)
            jump = sign * (b.conductivity * db - a.conductivity * da)
            _violation(f"{name}: interface flux jump", jump, rho, tol)
            worst_jump = min(worst_jump, jump)
        margins[f"{name}_flux_jump"] = worst_jump
        margins[f"{name}_continuity"] = worst_cont
    b_margin = float(v1(R) - v2(R))
    _violation("boundary ordering v1 >= v2", b_margin, R, tol)
    margins["boundary"] = b_margin
    if r2 > r1:
        rr = np.linspace(r1, r2, hyp.samples)[1:-1]
        if rr.size:
            _, g1 = v1.evaluate(rr)
            _, g2 = v2.evaluate(rr)
            gc = (hyp.sigma_c * g2 - hyp.sigma_s * g1) * (g2 - g1)
            k = int(np.argmin(gc))
            _violation("gradient condition on D2 \\ D1", float(gc[k]), float(rr[k]), tol)
            margins["gradient"] = float(gc[k])
    diff = v1(r) - v2(r)
    k = int(np.argmin(diff))
    return margins, float(diff[k]), float(r[k])


def _discrete_div(values, sigma, h):
    """Flux-form ``div(sigma grad v)`` at interior cells (edges set to nan)."""
    out = np.full(values.shape, np.nan)
    c = values[1:-1, 1:-1]
    sc = sigma[1:-1, 1:-1]
    acc = np.zeros_like(c)
    for sl in ((slice(2, None), slice(1, -1)), (slice(None, -2), slice(1, -1)),
               (slice(1, -1), slice(2, None)), (slice(1, -1), slice(None, -2))):
        sn = sigma[sl]
        acc += 2.0 * sc * sn / (sc + sn) * (values[sl] - c)
    out[1:-1, 1:-1] = acc / (h * h)
    return out


def _grid_checks(v1, v2, hyp: ComparisonHypotheses):
    grid = v1.grid
    if v2.grid != grid:
        raise HypothesisViolation("fields live on different grids")
    X, Y = grid.mesh()
    tol = hyp.tol
    omega = hyp.omega.in_omega(X, Y)
    in1 = hyp.d1.in_inclusion(X, Y) if hyp.d1 is not None else np.zeros_like(omega)
    in2 = hyp.d2.in_inclusion(X, Y) if hyp.d2 is not None else np.zeros_like(omega)
    if np.any(in1 & ~in2):
        raise HypothesisViolation("D1 is not contained in D2", location=_first(in1 & ~in2, X, Y))
    margins = {}
    # cells whose whole 5-point stencil is in omega
    interior = omega.copy()
    for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        interior &= np.roll(np.roll(omega, -dj, 0), -di, 1)
    ring = omega & ~interior
    for name, v, inside, sign in (("v1", v1, in1, -1.0), ("v2", v2, in2, 1.0)):
        sigma = np.where(inside, hyp.sigma_c, hyp.sigma_s)
        lv = _discrete_div(v.values, sigma, grid.h) - (v.values - 1.0)
        m = np.where(interior, sign * lv, np.inf)
        k = np.unravel_index(np.argmin(m), m.shape)
        _violation(f"{name}: discrete inequality", float(m[k]), (float(X[k]), float(Y[k])), tol)
        margins[f"{name}_bulk"] = float(m[k])
    bd = np.where(ring, v1.values - v2.values, np.inf)
    k = np.unravel_index(np.argmin(bd), bd.shape)
    _violation("boundary ordering v1 >= v2", float(bd[k]), (float(X[k]), float(Y[k])), tol)
    margins["boundary"] = float(bd[k])
    shell = in2 & ~in1 & interior
    if shell.any():
        g1y, g1x = np.gradient(v1.values, grid.h)
        g2y, g2x = np.gradient(v2.values, grid.h)
        gc = ((hyp.sigma_c * g2x - hyp.sigma_s * g1x) * (g2x - g1x)
              + (hyp.sigma_c * g2y - hyp.sigma_s * g1y) * (g2y - g1y))
        gc = np.where(shell, gc, np.inf)
        k = np.unravel_index(np.argmin(gc), gc.shape)
        _violation("gradient condition on D2 \\ D1", float(gc[k]), (float(X[k]), float(Y[k])), tol)
        margins["gradient"] = float(gc[k])
    diff = np.where(omega, v1.values - v2.values, np.inf)
    k = np.unravel_index(np.argmin(diff), diff.shape)
    return margins, float(diff[k]), (float(X[k]), float(Y[k]))


def _first(mask, X, Y):
    k = np.argwhere(mask)[0]
    return float(X[tuple(k)]), float(Y[tuple(k)])


def integral_comparison_check(v1, v2, hyp: ComparisonHypotheses) -> ComparisonCheckReport:
    """Verify the comparison hypotheses for ``(v1, v2)`` and then ``v1 >= v2``.

    Works on two radial fields or on two grid fields.

    Raises
    ------
    HypothesisViolation
        On the first failed hypothesis, with the offending radius or point.
    """
    if hasattr(v1, "layers"):
        margins, mind, where = _radial_checks(v1, v2, hyp)
    else:
        margins, mind, where = _grid_checks(v1, v2, hyp)
    return ComparisonCheckReport(margins, mind, where, mind >= -hyp.tol)


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(type(obj).__name__)


def write_ndjson(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, default=_jsonable, sort_keys=True) + "\n")


def write_csv(path, rows: list, fieldnames=None):
    fieldnames = fieldnames or list(rows[0].keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for row in rows:
            w.writerow(row)


def curve_records(curve: CurveSamples, label: str = "curve"):
    vals = curve.values if curve.values is not None else [None] * len(curve)
    return [{"curve": label, "index": i, "x": float(p[0]), "y": float(p[1]),
             "value": None if v is None else float(v)} for i, (p, v) in enumerate(zip(curve.points, vals))]


def pieced_supersolution(shell, rho_max: float, rho_outer: float, R: float, sigma_c: float,
                         sigma_s: float):
    """Radial super-solution glued from a regular cap, an inward shot and the shell profile.

    ``shell`` is a profile with interior maximum at ``rho_max``.  Inside
    ``rho_outer`` the conductivity is ``sigma_c``: the shell is continued
    inward by the ``sigma_c`` solution ``g`` with matching value and flux,
    and below ``rho_max`` replaced by ``1 - beta f_reg`` with ``beta``
    fixed by continuity.  Returns ``(field, info)``.
    """
    from .kernel import OdeParams, RadialProfile, eval_f_reg, shoot_interface
    from .layered import Layer, RadialField

    pc = OdeParams(shell.params.N, sigma_c)
    uv, ud = shell.evaluate(rho_outer)
    g = shoot_interface(rho_outer, uv, sigma_s * ud / sigma_c, pc, offset=1.0)
    gv, gd = g.evaluate(rho_max)
    f, _ = eval_f_reg(rho_max, pc)
    beta = (1.0 - gv) / f
    field_ = RadialField((
        Layer(0.0, rho_max, RadialProfile(pc, c_reg=-beta, offset=1.0), sigma_c, "cap"),
        Layer(rho_max, rho_outer, g, sigma_c, "inward"),
        Layer(rho_outer, R, shell, sigma_s, "shell"),
    ))
    rr = np.linspace(rho_max, rho_outer, 2001)[:-1]
    _, dg = g.evaluate(rr)
    uv_, du = shell.evaluate(rr)
    key = (sigma_c * dg - sigma_s * du) * (dg - du)
    info = {"beta": float(beta), "inward_slope_at_max": float(gd),
            "min_key_product": float(key.min()), "min_shell_minus_inward": float(np.min(uv_ - g(rr))),
            "inward_profile": g}
    return field_, info
