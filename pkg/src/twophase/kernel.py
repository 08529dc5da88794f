"""Fundamental solutions of the radial modified Helmholtz equation.

Every radially symmetric solution of ``sigma * Laplace(f) = f`` in ``R^N``
solves the ordinary differential equation

    f'' + (N - 1) / r * f' - f / sigma = 0,    r > 0,

whose solution space is spanned by a regular solution ``f_reg`` (an entire
power series with ``f_reg(0) = 1``) and a singular companion ``f_sing``
obtained by reduction of order with base point ``r = 1``.  A third,
decaying solution (a scaled modified Bessel function of the second kind) is
provided for exterior layers.

All routines accept scalars or numpy arrays and return the same shape.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy import integrate, optimize

from .errors import (
    HypothesisViolation,
    QuadratureError,
    TruncationError,
    UnderflowError,
)

__all__ = [
    "OdeParams",
    "SeriesControl",
    "RadialProfile",
    "CrossingReport",
    "ComparisonResult",
    "eval_f_reg",
    "eval_f_sing",
    "f_sing_values",
    "eval_decaying",
    "wronskian",
    "wronskian_defect",
    "extract_coefficients",
    "shoot_interface",
    "check_comparison_case",
    "ode_residual",
    "random_comparison_battery",
    "limit_checks",
    "coefficient_roundtrip",
]


@dataclass(frozen=True)
class OdeParams:
    """Space dimension ``N`` and conductivity ``sigma`` of the radial ODE."""

    N: int = 2
    sigma: float = 1.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.N}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class SeriesControl:
    """Truncation control for the power series of ``f_reg``."""

    rel_tolerance: float = 1e-15
    max_terms: int = 600

    def __post_init__(self):
        if not 0 < self.rel_tolerance <= 1e-6:
            raise ValueError("rel_tolerance must lie in (0, 1e-6]")
        if self.max_terms < 10:
            raise ValueError("max_terms must be >= 10")


DEFAULT_CONTROL = SeriesControl()


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    return arr, arr.ndim == 0


def _shape_like(values, scalar):
    if scalar:
        return tuple(float(v) for v in values)
    return values


# ---------------------------------------------------------------------------
# regular solution
# ---------------------------------------------------------------------------

def _reg_terms_needed(r_max: float, params: OdeParams, ctl: SeriesControl) -> int:
    """Number of series terms after which the geometric tail bound holds at ``r_max``.

    Both relative tails grow with ``r``, so the largest radius decides.
    """
    N, sigma = params.N, params.sigma
    r2 = r_max * r_max
    term, value, deriv = 1.0, 1.0, 0.0
    tol = ctl.rel_tolerance
    for k in range(1, ctl.max_terms):
        # a_k / a_{k-1} for a_k = (N-2)!! / ((N+2k-2)!! k! 2^k sigma^k)
        term *= r2 / (2.0 * sigma * k * (N + 2 * k - 2))
        dterm = 2.0 * k * term / r_max if r_max > 0 else 0.0
        value += term
        deriv += dterm
        q = r2 / (2.0 * sigma * (k + 1) * (N + 2 * k))
        qd = q * (k + 1) / k
        if qd < 0.5:
            tail = term * q / (1.0 - q)
            dtail = dterm * qd / (1.0 - qd)
            if tail <= tol * value and dtail <= tol * abs(deriv):
                return k
    raise TruncationError(
        f"f_reg series did not converge in {ctl.max_terms} terms "
        f"(max r = {r_max:g}, sigma = {sigma:g})"
    )


def _reg_series(r: np.ndarray, params: OdeParams, ctl: SeriesControl):
    N, sigma = params.N, params.sigma
    r = np.atleast_1d(r)
    if np.any(r < 0):
        raise ValueError("f_reg is evaluated for r >= 0 only")
    n_terms = _reg_terms_needed(float(r.max()) if r.size else 0.0, params, ctl)
    r2 = r * r
    inv_r = np.where(r > 0, 1.0 / np.where(r > 0, r, 1.0), 0.0)
    term = np.ones_like(r)
    value = np.ones_like(r)
    deriv = np.zeros_like(r)
    for k in range(1, n_terms + 1):
        term = term * r2 / (2.0 * sigma * k * (N + 2 * k - 2))
        value += term
        deriv += (2.0 * k) * term
    return value, deriv * inv_r


def eval_f_reg(r, params: OdeParams, ctl: SeriesControl = DEFAULT_CONTROL):
    """Value and derivative of the regular solution.

    The series is summed term by term until a geometric bound on the tail
    drops below ``ctl.rel_tolerance`` times the partial sum.

    Raises
    ------
    TruncationError
        If ``ctl.max_terms`` terms do not reach the tolerance.
    """
    arr, scalar = _as_array(r)
    value, deriv = _reg_series(arr.ravel(), params, ctl)
    value = value.reshape(arr.shape)
    deriv = deriv.reshape(arr.shape)
    return _shape_like((value, deriv), scalar)


# ---------------------------------------------------------------------------
# singular solution
# ---------------------------------------------------------------------------

def _log_integrand(t, params, ctl):
    s = np.exp(t)
    f, _ = _reg_series(np.atleast_1d(s), params, ctl)
    return np.exp((2 - params.N) * t) / f ** 2


def _sing_integral_adaptive(r: float, params: OdeParams, ctl: SeriesControl) -> float:
    # substitute s = exp(t): the integrand s^(1-N) / f_reg(s)^2 ds becomes smooth
    upper = math.log(r)
    if upper == 0.0:
        return 0.0

    def g(t):
        return float(_log_integrand(t, params, ctl)[0])

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, _ = integrate.quad(g, 0.0, upper, epsabs=1e-14, epsrel=1e-13, limit=400)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(f"quadrature failed for r = {r:g}: {exc}") from exc
    return val


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


def _sing_integral_composite(r: np.ndarray, params: OdeParams, ctl: SeriesControl):
    """Integral from 1 to r of s^(1-N)/f_reg(s)^2 by composite Gauss-Legendre.

    Panels live in log r; their width shrinks where 1/f_reg^2 decays fast.
    """
    t = np.log(r)
    knots, inverse = np.unique(np.concatenate([[0.0], t]), return_inverse=True)
    zero = int(np.searchsorted(knots, 0.0))
    lo, hi = knots[:-1], knots[1:]
    rate = 1.0 + np.exp(hi) / math.sqrt(params.sigma) + abs(params.N - 2)
    counts = np.maximum(1, np.ceil((hi - lo) * rate / 0.15).astype(int))
    gap_of_panel = np.repeat(np.arange(lo.size), counts)
    offsets = np.arange(gap_of_panel.size) - np.repeat(np.cumsum(counts) - counts, counts)
    width = (hi - lo) / counts
    a = lo[gap_of_panel] + offsets * width[gap_of_panel]
    w = width[gap_of_panel]
    nodes = a[:, None] + 0.5 * w[:, None] * (_GL_NODES[None, :] + 1.0)
    vals = _log_integrand(nodes.ravel(), params, ctl).reshape(nodes.shape)
    panel = 0.5 * w * (vals @ _GL_WEIGHTS)
    gap_int = np.bincount(gap_of_panel, weights=panel, minlength=lo.size)
    cum = np.concatenate([[0.0], np.cumsum(gap_int)])
    cum -= cum[zero]
    return cum[inverse[1:]]


def _check_positive(arr):
    if np.any(arr <= 0):
        raise ValueError("f_sing is defined for r > 0 only")


def eval_f_sing(r, params: OdeParams, ctl: SeriesControl = DEFAULT_CONTROL):
    """Value and derivative of the singular solution via adaptive quadrature.

    ``f_sing(r) = f_reg(r) * integral_1^r ds / (s^(N-1) f_reg(s)^2)``; the
    integral is signed, so ``f_sing < 0`` for ``r < 1``.

    Raises
    ------
    QuadratureError
        If the adaptive Gauss-Kronrod refinement exhausts its budget.
    """
    arr, scalar = _as_array(r)
    flat = arr.ravel()
    _check_positive(flat)
    integral = np.array([_sing_integral_adaptive(float(x), params, ctl) for x in flat])
    value, deriv = _sing_from_integral(flat, integral, params, ctl)
    return _shape_like((value.reshape(arr.shape), deriv.reshape(arr.shape)), scalar)


def f_sing_values(r, params: OdeParams, ctl: SeriesControl = DEFAULT_CONTROL):
    """Vectorised ``f_sing`` (value, derivative) using composite quadrature.

    Same quantity as :func:`eval_f_sing`, but every requested radius shares
    one set of Gauss-Legendre panels, which is much faster on dense grids.
    """
    arr, scalar = _as_array(r)
    flat = arr.ravel()
    _check_positive(flat)
    integral = _sing_integral_composite(flat, params, ctl)
    value, deriv = _sing_from_integral(flat, integral, params, ctl)
    return _shape_like((value.reshape(arr.shape), deriv.reshape(arr.shape)), scalar)


def _sing_from_integral(r, integral, params, ctl):
    f, fp = _reg_series(r, params, ctl)
    value = f * integral
    deriv = fp * integral + r ** (1 - params.N) / f
    return value, deriv


# ---------------------------------------------------------------------------
# decaying solution
# ---------------------------------------------------------------------------

def _riccati_seed(r: float, params: OdeParams) -> float:
    # log-derivative of r^(-nu) K_nu(r / sqrt(sigma)), three asymptotic terms
    s = math.sqrt(params.sigma)
    x = r / s
    mu = (params.N - 2) ** 2
    return -(params.N - 1) / (2.0 * r) - (1.0 + (mu - 1.0) / (8.0 * x * x)) / s


def eval_decaying(r, params: OdeParams):
    """Decaying solution normalised to 1 at ``r = 1``.

    Integrates the Riccati equation ``q' = 1/sigma - (N-1) q / r - q^2`` for
    ``q = f'/f`` inward from a far radius, seeded with the large-``r``
    asymptotics.  Inward integration is stable because perturbations of
    ``q`` decay like ``exp(-2 (r_far - r) / sqrt(sigma))``.  ``log f`` is
    carried along so the value only underflows when the result itself does.

    Raises
    ------
    UnderflowError
        If the requested value is below the smallest positive double.
    """
    arr, scalar = _as_array(r)
    flat = arr.ravel()
    if np.any(flat <= 0):
        raise ValueError("decaying solution is evaluated for r > 0 only")
    s = math.sqrt(params.sigma)
    r_top = float(flat.max())
    # leading asymptotics of log f; skip the long integration when it is hopeless
    if r_top > 1.0 and -(r_top - 1.0) / s - 0.5 * (params.N - 1) * math.log(r_top) < -760.0:
        raise UnderflowError("decaying solution underflows at the requested radius")
    r_far = max(60.0 * s, 1.5 * r_top, 2.0)
    r_lo = min(float(flat.min()), 1.0)

    def rhs(x, y):
        q = y[0]
        return [1.0 / params.sigma - (params.N - 1) * q / x - q * q, q]

    sol = integrate.solve_ivp(
        rhs,
        (r_far, r_lo),
        [_riccati_seed(r_far, params), 0.0],
        method="DOP853",
        rtol=1e-13,
        atol=1e-14,
        dense_output=True,
    )
    if not sol.success:
        raise QuadratureError(f"decaying-solution integration failed: {sol.message}")
    q, logf = sol.sol(flat)
    logf = logf - sol.sol(1.0)[1]
    if np.any(logf < -745.0):
        raise UnderflowError("decaying solution underflows at the requested radius")
    value = np.exp(logf)
    deriv = q * value
    return _shape_like((value.reshape(arr.shape), deriv.reshape(arr.shape)), scalar)


# ---------------------------------------------------------------------------
# Wronskian and coefficient extraction
# ---------------------------------------------------------------------------

def wronskian(rho, params: OdeParams, ctl: SeriesControl = DEFAULT_CONTROL):
    """``f_sing'(rho) f_reg(rho) - f_sing(rho) f_reg'(rho)``."""
    fs, fsp = eval_f_sing(rho, params, ctl)
    fr, frp = eval_f_reg(rho, params, ctl)
    return fsp * fr - fs * frp


def wronskian_defect(rho, params: OdeParams, ctl: SeriesControl = DEFAULT_CONTROL, scaled: bool = False):
    """Distance of the Wronskian from ``rho^(1-N)``.

    With ``scaled`` the distance is divided by ``|f_sing' f_reg| + |f_sing f_reg'|``,
    the size of the two products whose difference is the Wronskian.  Both
    grow like ``exp(2 r / sqrt(sigma))`` while their difference decays, so
    the unscaled defect is bounded below by rounding (about 1e-5 at
    ``r = 10, sigma = 0.5``) however accurate the basis is.
    """
    fs, fsp = eval_f_sing(rho, params, ctl)
    fr, frp = eval_f_reg(rho, params, ctl)
    expected = np.asarray(rho, dtype=float) ** (1 - params.N)
    defect = np.abs(fsp * fr - fs * frp - expected)
    if scaled:
        defect = defect / (np.abs(fsp * fr) + np.abs(fs * frp))
    return float(defect) if np.ndim(defect) == 0 else defect


def extract_coefficients(f_value, f_slope, rho, params: OdeParams,
                         ctl: SeriesControl = DEFAULT_CONTROL):
    """Coordinates ``(c1, c2)`` of a solution in the ``(f_sing, f_reg)`` basis.

    ``c1`` is the Wronskian quotient; ``c2`` follows by back-substitution in
    the value equation (or the slope equation where ``f_reg`` is tiny).
    """
    if not np.all(np.asarray(rho) > 0):
        raise ValueError("rho must be positive")
    fs, fsp = f_sing_values(rho, params, ctl)
    fr, frp = eval_f_reg(rho, params, ctl)
    w = fsp * fr - fs * frp
    c1 = (f_slope * fr - f_value * frp) / w
    c2 = (f_value - c1 * fs) / fr
    return c1, c2


@dataclass(frozen=True)
class RadialProfile:
    """``c_sing f_sing + c_reg f_reg + c_decay f_decay + offset``.

    ``f_decay`` is the decaying solution of :func:`eval_decaying`; it is a
    linear combination of the other two but is kept as its own coordinate
    because that combination cancels catastrophically at large ``r``.
    """

    params: OdeParams
    c_sing: float = 0.0
    c_reg: float = 0.0
    offset: float = 0.0
    c_decay: float = 0.0

    def evaluate(self, r, ctl: SeriesControl = DEFAULT_CONTROL):
        """Return ``(value, derivative)`` at ``r``."""
        arr, scalar = _as_array(r)
        flat = arr.ravel()
        value = np.full(flat.shape, float(self.offset))
        deriv = np.zeros(flat.shape)
        if self.c_reg != 0.0:
            f, fp = _reg_series(flat, self.params, ctl)
            value += self.c_reg * f
            deriv += self.c_reg * fp
        if self.c_sing != 0.0:
            f, fp = f_sing_values(flat, self.params, ctl)
            value += self.c_sing * f
            deriv += self.c_sing * fp
        if self.c_decay != 0.0:
            f, fp = eval_decaying(flat, self.params)
            value += self.c_decay * f
            deriv += self.c_decay * fp
        return _shape_like((value.reshape(arr.shape), deriv.reshape(arr.shape)), scalar)

    def __call__(self, r):
        return self.evaluate(r)[0]

    def second_derivative(self, r, ctl: SeriesControl = DEFAULT_CONTROL):
        """``f''`` read off the ODE itself rather than by differencing."""
        value, deriv = self.evaluate(r, ctl)
        value, deriv = np.asarray(value), np.asarray(deriv)
        r = np.asarray(r, dtype=float)
        out = (value - self.offset) / self.params.sigma - (self.params.N - 1) * deriv / r
        return float(out) if out.ndim == 0 else out

    def flux(self, r, conductivity: float):
        return conductivity * np.asarray(self.evaluate(r)[1])

    def negated_singular(self) -> "RadialProfile":
        return replace(self, c_sing=-self.c_sing)


def ode_residual(func, r, params: OdeParams, step: float = 1e-3) -> np.ndarray:
    """Relative residual of the radial ODE for ``func(r) -> (value, deriv)``.

    The second derivative comes from a fourth-order central difference of
    the (analytic) first derivative, so the check is independent of the
    ODE-based ``second_derivative``.
    """
    r = np.asarray(r, dtype=float)
    h = step * r
    d = [np.asarray(func(r + k * h)[1]) for k in (-2, -1, 1, 2)]
    second = (d[0] - 8.0 * d[1] + 8.0 * d[2] - d[3]) / (12.0 * h)
    value, deriv = (np.asarray(v) for v in func(r))
    terms = np.abs(second) + (params.N - 1) * np.abs(deriv) / r + np.abs(value) / params.sigma
    resid = second + (params.N - 1) * deriv / r - value / params.sigma
    return np.abs(resid) / terms


def shoot_interface(rho: float, value: float, slope: float, params: OdeParams,
                    offset: float = 0.0, ctl: SeriesControl = DEFAULT_CONTROL) -> RadialProfile:
    """Profile with the given offset matching ``(value, slope)`` at ``rho``.

    Used for the inward continuations across an interface, where the caller
    has already converted the outer slope with the conductivity ratio.
    """
    c1, c2 = extract_coefficients(value - offset, slope, rho, params, ctl)
    return RadialProfile(params, c_sing=c1, c_reg=c2, offset=offset)


# ---------------------------------------------------------------------------
# comparison of two solutions with different conductivities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingReport:
    crossing_radius: float
    slope_f1: float
    slope_f2: float
    assertion_holds: bool
    side: str = "inner"


@dataclass(frozen=True)
class ComparisonResult:
    case_id: int
    rho: float
    inner: Optional[CrossingReport] = None
    outer: Optional[CrossingReport] = None

    @property
    def reports(self):
        return [rep for rep in (self.inner, self.outer) if rep is not None]

    @property
    def violations(self) -> int:
        return sum(not rep.assertion_holds for rep in self.reports)


# expected sign of d = f1 - f2 next to rho, and of both slopes at the crossing
_CASE_TABLE = {
    1: {"inner": (-1, -1), "outer": (+1, -1)},
    2: {"inner": (+1, +1), "outer": (-1, +1)},
    3: {"inner": (-1, -1), "outer": (-1, +1)},
}


def _verify_case_hypotheses(case_id, p1, p2, f1, f2, rho, tol):
    v1, d1 = f1.evaluate(rho)
    v2, d2 = f2.evaluate(rho)
    scale = max(1.0, abs(v1), abs(v2))
    if abs(v1 - v2) > tol * scale:
        raise HypothesisViolation(f"values differ at rho: {v1!r} vs {v2!r}", location=rho)
    if case_id in (1, 2):
        flux1, flux2 = p1.sigma * d1, p2.sigma * d2
        if abs(flux1 - flux2) > tol * max(1.0, abs(flux1)):
            raise HypothesisViolation("sigma_1 f_1' != sigma_2 f_2' at rho", location=rho)
        sign = 1 if case_id == 1 else -1
        if not sign * flux1 > 0:
            raise HypothesisViolation(f"case {case_id} needs flux sign {sign:+d}", location=rho)
    else:
        if abs(d1) > tol * scale or abs(d2) > tol * scale:
            raise HypothesisViolation("case 3 needs vanishing slopes at rho", location=rho)
        if not v1 < 0:
            raise HypothesisViolation("case 3 needs a negative common value", location=rho)


def _first_crossing(diff, grid):
    """Index of the first strict sign change walking along ``grid``."""
    signs = np.sign(diff)
    ref = signs[0]
    if ref == 0:
        return ref, None
    change = np.nonzero(signs != ref)[0]
    for idx in change:
        if signs[idx] == -ref:
            return ref, idx
    return ref, None


def check_comparison_case(params1: OdeParams, params2: OdeParams, rho: float, case_id: int,
                          profiles, r_min: Optional[float] = None, r_max: Optional[float] = None,
                          panels: int = 2048, tol: float = 1e-8) -> ComparisonResult:
    """Locate the crossings of two profiles nearest to ``rho`` and test the sign claims.

    ``profiles`` is a pair ``(f1, f2)`` solving the radial ODE with
    ``params1.sigma < params2.sigma`` and meeting the case hypotheses at
    ``rho``.  Each side is scanned with ``panels`` uniform panels; a sign
    change of ``f1 - f2`` is refined by bisection to 1e-10.  Tangential
    contact without a sign change is reported as no crossing.

    Raises
    ------
    HypothesisViolation
        If the matching conditions at ``rho`` fail beyond ``tol``, or the
        observed ordering next to ``rho`` contradicts the case.
    """
    if case_id not in _CASE_TABLE:
        raise ValueError("case_id must be 1, 2 or 3")
    if not params1.sigma < params2.sigma:
        raise HypothesisViolation("need params1.sigma < params2.sigma")
    f1, f2 = profiles
    _verify_case_hypotheses(case_id, params1, params2, f1, f2, rho, tol)
    r_min = 1e-3 * rho if r_min is None else r_min
    r_max = 4.0 * rho if r_max is None else r_max
    table = _CASE_TABLE[case_id]
    found = {}
    for side, grid in (
        ("inner", np.linspace(rho, r_min, panels + 1)[1:]),
        ("outer", np.linspace(rho, r_max, panels + 1)[1:]),
    ):
        diff = np.asarray(f1(grid)) - np.asarray(f2(grid))
        ref, idx = _first_crossing(diff, grid)
        want_order, want_slope = table[side]
        if ref != want_order:
            raise HypothesisViolation(
                f"ordering next to rho on the {side} side is {ref:+.0f}, expected {want_order:+d}",
                location=float(grid[0]),
            )
        if idx is None:
            found[side] = None
            continue
        a, b = sorted((float(grid[idx - 1]), float(grid[idx])))
        root = optimize.brentq(lambda x: f1(x) - f2(x), a, b, xtol=1e-10, rtol=4 * np.finfo(float).eps)
        s1 = f1.evaluate(root)[1]
        s2 = f2.evaluate(root)[1]
        holds = bool(np.sign(s1) == want_slope and np.sign(s2) == want_slope)
        found[side] = CrossingReport(root, s1, s2, holds, side)
    return ComparisonResult(case_id, rho, found["inner"], found["outer"])


def random_comparison_battery(per_case: int = 200, seed: int = 20240601,
                              sigma_range=(0.3, 3.0), dims=(2, 3), panels: int = 2048):
    """Randomized sign checks of the two-conductivity comparison, ``per_case`` draws per case.

    Each draw picks ``sigma_1 < sigma_2`` from ``sigma_range``, an interface
    radius, a common value and (cases 1-2) a common flux of the prescribed
    sign, then shoots both profiles from that radius.
    """
    rng = np.random.default_rng(seed)
    lo, hi = sigma_range
    results = []
    for case_id in (1, 2, 3):
        for _ in range(per_case):
            s1, s2 = np.sort(rng.uniform(lo, hi, size=2))
            while s2 - s1 < 1e-3:
                s1, s2 = np.sort(rng.uniform(lo, hi, size=2))
            N = int(rng.choice(dims))
            rho = float(rng.uniform(0.2, 2.0))
            p1, p2 = OdeParams(N, float(s1)), OdeParams(N, float(s2))
            if case_id == 3:
                value = -float(rng.uniform(0.1, 2.0))
                f1 = shoot_interface(rho, value, 0.0, p1)
                f2 = shoot_interface(rho, value, 0.0, p2)
            else:
                value = float(rng.uniform(-2.0, 2.0))
                flux = float(rng.uniform(0.1, 2.0)) * (1.0 if case_id == 1 else -1.0)
                f1 = shoot_interface(rho, value, flux / s1, p1)
                f2 = shoot_interface(rho, value, flux / s2, p2)
            results.append(check_comparison_case(p1, p2, rho, case_id, (f1, f2), panels=panels))
    return results


def limit_checks(params: OdeParams, r0: float = 1e-3, levels: int = 3) -> dict:
    """Behaviour at the origin, each limit estimated by Richardson extrapolation in ``r^2``.

    Returns the extrapolated ``r^(N-1) f_sing'(r)``, ``f_reg(0)``, ``f_reg'(0)``
    and ``f_sing`` at the smallest sample (which must be large and negative).
    """
    rs = r0 / 2.0 ** np.arange(levels)
    fs, fsp = f_sing_values(rs, params)
    flux = rs ** (params.N - 1) * fsp
    table = list(flux)
    # successive elimination of the r^2 and r^4 terms
    for k in range(1, levels):
        table = [(4 ** k * table[i + 1] - table[i]) / (4 ** k - 1) for i in range(len(table) - 1)]
    fr0, frp0 = eval_f_reg(0.0, params)
    return {"sing_flux_limit": float(table[0]), "f_reg_0": fr0, "f_reg_prime_0": frp0,
            "f_sing_small": float(fs[-1]), "r_small": float(rs[-1])}


def coefficient_roundtrip(trials: int = 1000, seed: int = 20240601, bound: float = 10.0,
                          rho_range=(0.1, 2.0), sigmas=(0.5, 1.0, 2.0), dims=(2, 3)) -> float:
    """Worst ``|c - extract(c)|`` over random coefficient pairs in ``[-bound, bound]^2``.

    Interface radii beyond a few units are avoided: there ``f_reg`` and
    ``f_sing`` grow together and the recovery of ``c2`` loses digits.
    """
    rng = np.random.default_rng(seed)
    dims_drawn = rng.choice(dims, size=trials)
    sigmas_drawn = rng.choice(sigmas, size=trials)
    rho = rng.uniform(*rho_range, size=trials)
    c = rng.uniform(-bound, bound, size=(trials, 2))
    worst = 0.0
    for N in np.unique(dims_drawn):
        for sigma in np.unique(sigmas_drawn):
            pick = (dims_drawn == N) & (sigmas_drawn == sigma)
            if not pick.any():
                continue
            params = OdeParams(int(N), float(sigma))
            r, c1, c2 = rho[pick], c[pick, 0], c[pick, 1]
            fs, fsp = f_sing_values(r, params)
            fr, frp = eval_f_reg(r, params)
            e1, e2 = extract_coefficients(c1 * fs + c2 * fr, c1 * fsp + c2 * frp, r, params)
            worst = max(worst, float(np.max(np.abs(e1 - c1))), float(np.max(np.abs(e2 - c2))))
    return float(worst)
