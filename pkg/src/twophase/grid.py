"""Finite-difference diffusion on a uniform cell-centred grid in the plane.

Conductivity is piecewise constant and sampled at cell centres; face
conductances use the harmonic mean of the two neighbouring cells so the
flux ``sigma du/dn`` stays conservative across material interfaces.  The
unknown inside the solvers is the heat deficit ``e = 1 - u`` (zero far
away), which keeps round-off from pushing ``u`` above 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import ndimage
from scipy.interpolate import RegularGridInterpolator

from .errors import (
    CurveOutsideGrid,
    GeometryError,
    InstabilityError,
    InsufficientHorizonError,
    SolverDivergence,
)

MAX_PRINCIPLE_SLACK = 1e-9
LAPLACE_MIN_HORIZON = 12.0


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Disk:
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def signed_distance(self, x, y):
        return np.hypot(x - self.center[0], y - self.center[1]) - self.radius

    @property
    def outer_radius(self):
        return self.radius


@dataclass(frozen=True)
class Annulus:
    center: tuple = (0.0, 0.0)
    r_minus: float = 0.5
    r_plus: float = 1.0

    def __post_init__(self):
        if not 0 < self.r_minus < self.r_plus:
            raise GeometryError("annulus needs 0 < r_minus < r_plus")

    def signed_distance(self, x, y):
        r = np.hypot(x - self.center[0], y - self.center[1])
        return np.maximum(r - self.r_plus, self.r_minus - r)

    @property
    def radius(self):
        return self.r_plus

    @property
    def outer_radius(self):
        return self.r_plus


Omega = Union[Disk, Annulus]


@dataclass(frozen=True)
class Geometry2D:
    """Domain ``omega`` with disk inclusions; three conductivities."""

    omega: Omega
    inclusions: tuple = ()
    sigma_c: float = 2.0
    sigma_s: float = 1.0
    sigma_m: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "inclusions", tuple(self.inclusions))
        if min(self.sigma_c, self.sigma_s, self.sigma_m) <= 0:
            raise GeometryError("conductivities must be positive")
        for i, d in enumerate(self.inclusions):
            # closure of the inclusion inside omega: the whole disk at positive depth
            dist = math.hypot(d.center[0] - self.omega.center[0], d.center[1] - self.omega.center[1])
            if isinstance(self.omega, Disk):
                inside = dist + d.radius < self.omega.radius
            else:
                inside = (dist + d.radius < self.omega.r_plus
                          and dist - d.radius > self.omega.r_minus)
            if not inside:
                raise GeometryError(f"inclusion {i} is not compactly contained in omega")
            for j in range(i):
                e = self.inclusions[j]
                if math.hypot(d.center[0] - e.center[0], d.center[1] - e.center[1]) <= d.radius + e.radius:
                    raise GeometryError(f"inclusions {j} and {i} overlap")

    @property
    def circumradius(self) -> float:
        """Radius of omega's outer circle (about its own centre)."""
        return self.omega.outer_radius

    def in_omega(self, x, y):
        return self.omega.signed_distance(x, y) < 0

    def in_inclusion(self, x, y):
        out = np.zeros(np.broadcast(x, y).shape, dtype=bool)
        for d in self.inclusions:
            out |= d.signed_distance(x, y) < 0
        return out

    def conductivity(self, x, y):
        sig = np.where(self.in_omega(x, y), self.sigma_s, self.sigma_m)
        return np.where(self.in_inclusion(x, y), self.sigma_c, sig)

    def check_connected(self, grid: "Grid2D"):
        """Flood-fill check that omega minus the inclusions is one component."""
        X, Y = grid.mesh()
        shell = self.in_omega(X, Y) & ~self.in_inclusion(X, Y)
        _, count = ndimage.label(shell)
        if count != 1:
            raise GeometryError(f"omega minus inclusions has {count} components on the grid")


@dataclass(frozen=True)
class Grid2D:
    """Cell-centred grid: cell ``(j, i)`` has centre ``origin + ((i+1/2) h, (j+1/2) h)``."""

    origin: tuple
    h: float
    nx: int
    ny: int
    truncation_radius: float

    @classmethod
    def around(cls, geom: Geometry2D, h: float, factor: float = 3.0) -> "Grid2D":
        """Square of half-width ``factor * circumradius`` centred on omega."""
        half = factor * geom.circumradius
        n_half = round(half / h)
        if not math.isclose(n_half * h, half, rel_tol=1e-9, abs_tol=1e-12):
            raise GeometryError(f"h = {h} does not divide the half-width {half}")
        cx, cy = geom.omega.center
        return cls((cx - half, cy - half), h, 2 * n_half, 2 * n_half, half)

    @classmethod
    def covering(cls, geom: Geometry2D, h: float, margin_cells: int = 2) -> "Grid2D":
        """Smallest grid covering omega plus a few cells, for bounded problems."""
        R = geom.circumradius
        n_half = math.ceil(R / h) + margin_cells
        cx, cy = geom.omega.center
        half = n_half * h
        return cls((cx - half, cy - half), h, 2 * n_half, 2 * n_half, half)

    @property
    def x(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.h

    @property
    def y(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.h

    def mesh(self):
        return np.meshgrid(self.x, self.y)

    @property
    def shape(self):
        return (self.ny, self.nx)

    def interpolator(self, values, fill_value=None):
        """Bilinear interpolant of a cell-centred array."""
        return RegularGridInterpolator((self.y, self.x), values, method="linear",
                                       bounds_error=fill_value is None, fill_value=fill_value)

    def sample(self, values, points):
        """Bilinear interpolation at ``points`` of shape ``(m, 2)`` (x, y)."""
        points = np.asarray(points, dtype=float)
        try:
            return self.interpolator(values)(points[:, ::-1])
        except ValueError as exc:
            raise CurveOutsideGrid(str(exc)) from exc


def circle_points(center, radius, n: int = 256):
    theta = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])


def omega_fraction(geom: Geometry2D, grid: Grid2D, sub: int = 16):
    """Area fraction of omega in every cell (subsampled near the boundary)."""
    X, Y = grid.mesh()
    d = geom.omega.signed_distance(X, Y)
    frac = (d < 0).astype(float)
    edge = np.abs(d) < grid.h
    if edge.any():
        offs = (np.arange(sub) + 0.5) / sub - 0.5
        ox, oy = np.meshgrid(offs * grid.h, offs * grid.h)
        xs = X[edge][:, None] + ox.ravel()[None, :]
        ys = Y[edge][:, None] + oy.ravel()[None, :]
        frac[edge] = np.mean(geom.omega.signed_distance(xs, ys) < 0, axis=1)
    return frac


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------

@dataclass
class TimeSeriesField:
    """Snapshots of ``u`` at recorded times.

    ``laplace_sum`` holds the trapezoidal sum of ``exp(-t) (1 - u)`` over
    every time step taken (not only the recorded ones), so the transform
    does not require keeping all frames in memory.
    """

    grid: Grid2D
    times: list
    values: list
    mask: Optional[np.ndarray] = None
    final_time: float = 0.0
    final_values: Optional[np.ndarray] = None
    laplace_sum: Optional[np.ndarray] = None
    value_range: tuple = (0.0, 1.0)
    step_count: int = 0

    def frame(self, t: float):
        i = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        return self.times[i], self.values[i]


@dataclass
class StationaryField:
    grid: Grid2D
    values: np.ndarray
    equation: str
    mask: Optional[np.ndarray] = None
    conductivity: Optional[np.ndarray] = None
    error_bar: Optional[np.ndarray] = None
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def sample(self, points):
        return self.grid.sample(self.values, points)

    def on_circle(self, center, radius, n: int = 256):
        return self.sample(circle_points(center, radius, n))


# ---------------------------------------------------------------------------
# discretisation
# ---------------------------------------------------------------------------

_DIRECTIONS = ((1, 0), (-1, 0), (0, 1), (0, -1))


def _shift(arr, di, dj, fill):
    """``out[j, i] = arr[j + dj, i + di]`` with ``fill`` past the edge."""
    out = np.full_like(arr, fill)
    ny, nx = arr.shape
    src_j = slice(max(dj, 0), ny + min(dj, 0))
    dst_j = slice(max(-dj, 0), ny + min(-dj, 0))
    src_i = slice(max(di, 0), nx + min(di, 0))
    dst_i = slice(max(-di, 0), nx + min(-di, 0))
    out[dst_j, dst_i] = arr[src_j, src_i]
    return out


def _circle_crossing(px, py, ex, ey, h, center, radius):
    """Smallest t in (0, 1] with |p + t h e - center| = radius, else inf."""
    ax, ay = px - center[0], py - center[1]
    b = 2.0 * h * (ax * ex + ay * ey)
    c = ax * ax + ay * ay - radius * radius
    a = h * h
    disc = b * b - 4 * a * c
    out = np.full(np.shape(px), np.inf)
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    for root in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)):
        good = ok & (root > 0) & (root <= 1.0 + 1e-12)
        out = np.where(good & (root < out), root, out)
    return out


def _boundary_fraction(geom, px, py, ex, ey, h):
    om = geom.omega
    if isinstance(om, Disk):
        t = _circle_crossing(px, py, ex, ey, h, om.center, om.radius)
    else:
        t = np.minimum(_circle_crossing(px, py, ex, ey, h, om.center, om.r_plus),
                       _circle_crossing(px, py, ex, ey, h, om.center, om.r_minus))
    t = np.where(np.isfinite(t), t, 1.0)
    return np.clip(t, 1e-2, 1.0)


@dataclass
class _System:
    matrix: sp.csc_matrix
    rhs_boundary: np.ndarray
    index: np.ndarray
    active: np.ndarray
    sigma: np.ndarray


def _assemble(geom: Geometry2D, grid: Grid2D, active: np.ndarray, *, boundary: str = "cut",
              dirichlet_value: float = 0.0, neumann_flux: Optional[float] = None) -> _System:
    """``-div(sigma grad)`` on the active cells.

    Inactive neighbours and the outer edge of the grid carry Dirichlet data
    ``dirichlet_value`` (placed at the neighbour centre for ``"stair"``, at
    the true circle crossing for ``"cut"``) unless ``neumann_flux`` is
    given, in which case faces towards inactive cells carry the outward flux
    density ``neumann_flux`` projected on the face normal.
    """
    X, Y = grid.mesh()
    h = grid.h
    sigma = geom.conductivity(X, Y)
    n = int(active.sum())
    index = np.full(active.shape, -1, dtype=np.int64)
    index[active] = np.arange(n)
    diag = np.zeros(n)
    rhs = np.zeros(n)
    rows, cols, vals = [], [], []
    for di, dj in _DIRECTIONS:
        sig_nb = _shift(sigma, di, dj, np.nan)
        act_nb = _shift(active, di, dj, False)
        idx_nb = _shift(index, di, dj, -1)
        edge = np.isnan(sig_nb)
        both = active & act_nb
        k = 2.0 * sigma * sig_nb / (sigma + sig_nb) / (h * h)
        rows.append(index[both])
        cols.append(idx_nb[both])
        vals.append(-k[both])
        np.add.at(diag, index[both], k[both])
        out = active & ~act_nb
        if not out.any():
            continue
        if neumann_flux is not None and not np.all(edge[out]):
            px, py = X[out], Y[out]
            mx, my = px + 0.5 * h * di, py + 0.5 * h * dj
            cx, cy = geom.omega.center
            rx, ry = mx - cx, my - cy
            rr = np.hypot(rx, ry)
            nx_, ny_ = rx / rr, ry / rr
            if isinstance(geom.omega, Annulus):
                inner = rr < 0.5 * (geom.omega.r_minus + geom.omega.r_plus)
                nx_ = np.where(inner, -nx_, nx_)
                ny_ = np.where(inner, -ny_, ny_)
            proj = np.abs(nx_ * di + ny_ * dj)
            np.add.at(rhs, index[out], neumann_flux * proj / h)
            continue
        sig_out = sigma[out]
        if boundary == "cut":
            theta = np.where(edge[out], 1.0, _boundary_fraction(geom, X[out], Y[out], di, dj, h))
        else:
            theta = np.ones(int(out.sum()))
        w = sig_out / (theta * h * h)
        np.add.at(diag, index[out], w)
        np.add.at(rhs, index[out], w * dirichlet_value)
    rows.append(np.arange(n))
    cols.append(np.arange(n))
    vals.append(diag)
    A = sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return _System(A, rhs, index, active, sigma)


def _solve(matrix, rhs, method: str = "direct", tol: float = 1e-10):
    if method == "direct":
        x = spla.spsolve(matrix.tocsc(), rhs)
    elif method == "cg":
        inv_diag = 1.0 / matrix.diagonal()
        precond = sp.diags(inv_diag)
        x, info = spla.cg(matrix, rhs, rtol=tol, atol=0.0, M=precond, maxiter=20 * matrix.shape[0])
        if info != 0:
            raise SolverDivergence(f"conjugate gradients did not converge (info={info})")
    else:
        raise ValueError(f"unknown linear solver {method!r}")
    res = np.linalg.norm(matrix @ x - rhs) / max(np.linalg.norm(rhs), 1e-300)
    return x, res


# ---------------------------------------------------------------------------
# time stepping
# ---------------------------------------------------------------------------

def _step_sizes(T: float, dt) -> np.ndarray:
    if np.isscalar(dt):
        n = max(1, math.ceil(T / dt - 1e-9))
        return np.full(n, T / n)
    steps = np.asarray(dt, dtype=float)
    if np.any(steps <= 0):
        raise ValueError("time steps must be positive")
    return steps


def _march(matrix_for, e0, steps, scheme, record_every, record_times, full_values, t_min_record=0.0):
    times, frames = [], []
    record_times = None if record_times is None else np.sort(np.asarray(record_times, float))
    t = 0.0
    e = e0.copy()
    factor_cache = {}
    laplace = 0.5 * steps[0] * e  # trapezoid weight at t = 0 (exp(0) = 1)
    lo, hi = 1.0, 0.0

    def record(t_now, e_now):
        u = full_values(e_now)
        times.append(t_now)
        frames.append(u)

    if record_times is None or np.any(np.isclose(record_times, 0.0)):
        record(0.0, e)
    next_rec = 0
    for n, dt in enumerate(steps):
        key = round(float(dt), 14)
        if key not in factor_cache:
            factor_cache.clear()
            A = matrix_for
            I = sp.identity(A.shape[0], format="csc")
            if scheme == "euler":
                factor_cache[key] = (spla.splu((I + dt * A).tocsc()), None)
            elif scheme == "cn":
                factor_cache[key] = (spla.splu((I + 0.5 * dt * A).tocsc()), (I - 0.5 * dt * A).tocsr())
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
        lu, explicit = factor_cache[key]
        e = lu.solve(e if explicit is None else explicit @ e)
        t += dt
        lo_n, hi_n = float(e.min()), float(e.max())
        lo, hi = min(lo, 1.0 - hi_n), max(hi, 1.0 - lo_n)
        if lo_n < -MAX_PRINCIPLE_SLACK or hi_n > 1.0 + MAX_PRINCIPLE_SLACK:
            raise InstabilityError(
                f"step {n + 1} (t = {t:.4g}) left [0, 1] by "
                f"{max(-lo_n, hi_n - 1.0):.3g}; reduce dt or use implicit Euler"
            )
        w_next = steps[n + 1] if n + 1 < len(steps) else 0.0
        laplace += 0.5 * (dt + w_next) * math.exp(-t) * e
        if record_times is None:
            if (n + 1) % record_every == 0 or n + 1 == len(steps):
                record(t, e)
        else:
            while next_rec < record_times.size and record_times[next_rec] <= t + 1e-12:
                if record_times[next_rec] > 0:
                    record(t, e)
                next_rec += 1
    return times, frames, e, t, laplace, (lo, hi)


def simulate_cauchy(geom: Geometry2D, grid: Grid2D, T: float, dt, *, scheme: str = "euler",
                    record_every: int = 1, record_times=None) -> TimeSeriesField:
    """``u_t = div(sigma grad u)`` in the truncated plane, ``u = 1`` at its edge.

    The initial datum is the cell-averaged indicator of the complement of
    omega.  ``dt`` is a step size or an explicit sequence of step sizes.

    Raises
    ------
    InstabilityError
        If a step leaves ``[0, 1]`` by more than 1e-9 (Crank-Nicolson with
        too large a step does this near the initial discontinuity).
    """
    geom.check_connected(grid)
    active = np.ones(grid.shape, dtype=bool)
    system = _assemble(geom, grid, active)
    e0 = omega_fraction(geom, grid).ravel()
    steps = _step_sizes(T, dt)
    shape = grid.shape

    def full(e):
        return 1.0 - e.reshape(shape)

    times, frames, e, t, laplace, rng = _march(system.matrix, e0, steps, scheme, record_every,
                                               record_times, full)
    return TimeSeriesField(grid, times, frames, None, t, full(e), laplace.reshape(shape), rng, len(steps))


def simulate_ibvp(geom: Geometry2D, grid: Grid2D, T: float, dt, *, scheme: str = "euler",
                  boundary: str = "cut", record_every: int = 1, record_times=None) -> TimeSeriesField:
    """Diffusion in omega only, ``u = 1`` on its boundary and ``u = 0`` initially.

    Cells whose centres lie outside omega are held at 1; ``boundary``
    selects where the Dirichlet datum sits (neighbour centre or the true
    crossing of the circle).
    """
    geom.check_connected(grid)
    X, Y = grid.mesh()
    active = geom.in_omega(X, Y)
    system = _assemble(geom, grid, active, boundary=boundary, dirichlet_value=0.0)
    e0 = np.ones(int(active.sum()))
    steps = _step_sizes(T, dt)

    def full(e):
        u = np.ones(grid.shape)
        u[active] = 1.0 - e
        return u

    times, frames, e, t, laplace, rng = _march(system.matrix, e0, steps, scheme, record_every,
                                               record_times, full)
    lap = np.zeros(grid.shape)
    lap[active] = laplace
    return TimeSeriesField(grid, times, frames, active, t, full(e), lap, rng, len(steps))


def laplace_transform_field(ts: TimeSeriesField) -> StationaryField:
    """Trapezoidal approximation of ``int_0^T exp(-t) (1 - u) dt`` per cell.

    The neglected tail is bounded by ``exp(-T) (1 - u(x, T))`` and returned
    as ``error_bar``.

    Raises
    ------
    InsufficientHorizonError
        If the series stops before ``t = 12``.
    """
    if ts.final_time < LAPLACE_MIN_HORIZON - 1e-9:
        raise InsufficientHorizonError(
            f"horizon T = {ts.final_time:g} < {LAPLACE_MIN_HORIZON:g}; the exp(-T) tail is too large"
        )
    if ts.laplace_sum is not None:
        values = ts.laplace_sum.copy()
    else:
        t = np.asarray(ts.times)
        stack = 1.0 - np.stack(ts.values)
        values = np.trapezoid(np.exp(-t)[:, None, None] * stack, t, axis=0)
    final = ts.final_values if ts.final_values is not None else ts.values[-1]
    tail = math.exp(-ts.final_time) * (1.0 - final)
    return StationaryField(ts.grid, values, "auxiliary", ts.mask, error_bar=tail)


# ---------------------------------------------------------------------------
# stationary problems
# ---------------------------------------------------------------------------

EQUATIONS = ("auxiliary", "overdetermined", "modified-neumann")


def solve_stationary_transmission(geom: Geometry2D, grid: Grid2D, equation: str, *,
                                  alpha: float = 1.0, beta: float = 1.0, c: float = 0.0,
                                  g: float = 0.0, boundary: str = "cut",
                                  method: str = "direct", tol: float = 1e-10) -> StationaryField:
    """Five-point solve of one of the elliptic transmission problems.

    ``"auxiliary"``
        ``div(sigma grad U) = U - 1_omega`` on the truncated plane, ``U = 0``
        at the edge (the unit-frequency Laplace transform of ``1 - u``).
    ``"overdetermined"``
        ``div(sigma grad u) = alpha u - beta`` in omega, ``u = c`` on its boundary.
    ``"modified-neumann"``
        ``div(sigma grad v) = v - 1`` in omega, ``sigma_s dv/dn = g`` on its boundary.

    Raises
    ------
    SolverDivergence
        If conjugate gradients fail or the final residual exceeds ``tol``.
    """
    if equation not in EQUATIONS:
        raise ValueError(f"equation must be one of {EQUATIONS}")
    geom.check_connected(grid)
    X, Y = grid.mesh()
    if equation == "auxiliary":
        active = np.ones(grid.shape, dtype=bool)
        system = _assemble(geom, grid, active)
        shift = 1.0
        source = omega_fraction(geom, grid).ravel()
    elif equation == "overdetermined":
        active = geom.in_omega(X, Y)
        system = _assemble(geom, grid, active, boundary=boundary, dirichlet_value=c)
        shift = alpha
        source = np.full(int(active.sum()), beta)
    else:
        active = geom.in_omega(X, Y)
        system = _assemble(geom, grid, active, neumann_flux=g)
        shift = 1.0
        source = np.ones(int(active.sum()))
    n = system.matrix.shape[0]
    M = system.matrix + shift * sp.identity(n, format="csc")
    rhs = source + system.rhs_boundary
    x, res = _solve(M, rhs, method, tol)
    if res > tol:
        raise SolverDivergence(f"relative residual {res:.3g} exceeds {tol:g}")
    fill = {"auxiliary": 0.0, "overdetermined": c, "modified-neumann": np.nan}[equation]
    values = np.full(grid.shape, float(fill))
    values[active] = x
    if equation == "modified-neumann":
        values = _extend_outward(values, active)
    meta = {"alpha": alpha, "beta": beta, "c": c, "g": g, "boundary": boundary, "geometry": geom}
    return StationaryField(grid, values, equation, active, system.sigma, residual=res, meta=meta)


def _extend_outward(values, active, layers: int = 3):
    """Fill a few inactive rings with neighbour averages so interpolation works at the boundary."""
    vals = values.copy()
    known = active.copy()
    for _ in range(layers):
        acc = np.zeros_like(vals)
        cnt = np.zeros_like(vals)
        for di, dj in _DIRECTIONS:
            nb_known = _shift(known, di, dj, False)
            nb_vals = _shift(np.where(known, vals, 0.0), di, dj, 0.0)
            acc += np.where(nb_known, nb_vals, 0.0)
            cnt += nb_known
        new = ~known & (cnt > 0)
        vals[new] = acc[new] / cnt[new]
        known |= new
    return vals


def neumann_trace(field_: StationaryField, center, radius: float, *, conductivity: float,
                  boundary_value: Optional[float] = None, n: int = 256, delta: Optional[float] = None):
    """``conductivity * du/dr`` on the circle, by one-sided second-order differences.

    With a known Dirichlet ``boundary_value`` the stencil uses ``u(R)``,
    ``u(R - delta)``, ``u(R - 2 delta)``; otherwise three interior points.
    ``delta`` defaults to ``2 h`` so every bilinear stencil stays inside.
    """
    from .detectors import CurveSamples

    h = field_.grid.h
    delta = 2.0 * h if delta is None else delta
    theta = 2.0 * np.pi * np.arange(n) / n
    dirs = np.column_stack([np.cos(theta), np.sin(theta)])
    c = np.asarray(center, dtype=float)

    def at(r):
        return field_.sample(c + r * dirs)

    if boundary_value is not None:
        u0 = np.full(n, float(boundary_value))
        u1, u2 = at(radius - delta), at(radius - 2 * delta)
        du = (3.0 * u0 - 4.0 * u1 + u2) / (2.0 * delta)
    else:
        u1, u2, u3 = at(radius - delta), at(radius - 2 * delta), at(radius - 3 * delta)
        # derivative at R of the quadratic through the three interior samples
        du = (5.0 * u1 - 8.0 * u2 + 3.0 * u3) / (2.0 * delta)
    points = c + radius * dirs
    return CurveSamples(points, closed=True, values=conductivity * du)


def time_steps(T: float, dt: float, coarse_after: Optional[float] = None, coarse_factor: int = 1) -> np.ndarray:
    """Uniform steps of size ``dt``, optionally ``coarse_factor`` times larger after ``coarse_after``.

    The coarse phase is where ``exp(-t)`` weights make late-time error cheap.
    """
    if coarse_after is None or coarse_factor == 1 or coarse_after >= T:
        return _step_sizes(T, dt)
    fine = _step_sizes(coarse_after, dt)
    coarse = _step_sizes(T - coarse_after, dt * coarse_factor)
    return np.concatenate([fine, coarse])


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def write_field_csv(path, grid: Grid2D, values, mask=None):
    """``x,y,value`` rows, skipping cells outside ``mask``."""
    X, Y = grid.mesh()
    keep = np.ones(grid.shape, dtype=bool) if mask is None else mask
    data = np.column_stack([X[keep], Y[keep], np.asarray(values)[keep]])
    np.savetxt(path, data, delimiter=",", header="x,y,value", comments="", fmt="%.10g")


def write_frames_ndjson(path, ts: TimeSeriesField, stride: int = 1):
    """One JSON object per recorded frame (row-major values)."""
    import json

    g = ts.grid
    with open(path, "w", encoding="utf-8") as fh:
        for t, frame in list(zip(ts.times, ts.values))[::stride]:
            rec = {"t": float(t), "origin": list(g.origin), "h": g.h, "nx": g.nx, "ny": g.ny,
                   "values": np.round(frame, 12).ravel().tolist()}
            fh.write(json.dumps(rec) + "\n")
