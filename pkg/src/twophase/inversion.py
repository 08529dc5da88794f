"""Recover the radius of a concentric inclusion from one Cauchy pair.

The forward map sends ``rho`` to the Dirichlet trace of the two-layer
solution of ``div(sigma grad v) = v - 1`` with constant Neumann datum.
Monotonicity of that map is checked numerically before every inversion.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import NotMonotone, OutOfRange
from .kernel import OdeParams, eval_f_reg
from .layered import _LayerSpec, poisson_reference, solve_layers

SCAN_POINTS = 100
BISECTION_TOL = 1e-10


@dataclass(frozen=True)
class CauchyPair:
    neumann_g: float
    dirichlet_trace: float

    def __post_init__(self):
        if self.neumann_g == 0:
            raise ValueError("the Neumann datum must be nonzero")


@dataclass(frozen=True)
class ForwardMapSample:
    rho: float
    boundary_value: float


@dataclass(frozen=True)
class Reconstruction:
    rho: float
    residual: float
    bracket: tuple
    roots: tuple = ()
    monotone: bool = True


def forward_dirichlet(rho: float, R: float, sigma_c: float, sigma_s: float, g: float, N: int = 2) -> float:
    """``v(R)`` for a core of radius ``rho`` and flux ``sigma_s v'(R) = g``."""
    if not 0 < rho < R:
        raise ValueError(f"need 0 < rho < R, got rho={rho}, R={R}")
    if g == 0:
        raise ValueError("g must be nonzero")
    specs = [
        _LayerSpec(rho, sigma_c, sigma_c, 1.0, "core"),
        _LayerSpec(R, sigma_s, sigma_s, 1.0, "shell"),
    ]
    field = solve_layers(specs, N, ("neumann", g))
    return field(R)


def no_inclusion_value(R: float, sigma_s: float, g: float, N: int = 2) -> float:
    """Boundary value of the single-phase solution ``1 + a f_reg``."""
    f, fp = eval_f_reg(R, OdeParams(N, sigma_s))
    return 1.0 + g * f / (sigma_s * fp)


def scan_forward_map(R, sigma_c, sigma_s, g, N=2, n: int = SCAN_POINTS) -> list:
    rhos = R * (np.arange(1, n + 1) / (n + 1))
    return [ForwardMapSample(float(r), forward_dirichlet(float(r), R, sigma_c, sigma_s, g, N)) for r in rhos]


def is_strictly_monotone(samples: Sequence[ForwardMapSample]) -> bool:
    d = np.diff([s.boundary_value for s in samples])
    return bool(np.all(d > 0) or np.all(d < 0))


def reconstruct_radius(pair: CauchyPair, R: float, sigma_c: float, sigma_s: float, N: int = 2,
                       scan_points: int = SCAN_POINTS, tol: float = BISECTION_TOL) -> Reconstruction:
    """Solve ``forward_dirichlet(rho) = pair.dirichlet_trace`` for ``rho``.

    Raises
    ------
    OutOfRange
        If the trace lies outside the scanned range of the forward map.
    NotMonotone
        If the scan is not strictly monotone and more than one bracketing
        interval holds a root; all roots are attached.  A non-monotone scan
        with a single root is returned with ``monotone=False``.
    """
    g, target = pair.neumann_g, pair.dirichlet_trace
    samples = scan_forward_map(R, sigma_c, sigma_s, g, N, scan_points)
    rhos = np.array([s.rho for s in samples])
    vals = np.array([s.boundary_value for s in samples]) - target

    def F(r):
        return forward_dirichlet(r, R, sigma_c, sigma_s, g, N) - target

    brackets = []
    for i in range(len(rhos) - 1):
        if vals[i] == 0.0:
            brackets.append((rhos[i], rhos[i]))
        elif vals[i] * vals[i + 1] < 0:
            brackets.append((rhos[i], rhos[i + 1]))
    if vals[-1] == 0.0:
        brackets.append((rhos[-1], rhos[-1]))
    if not brackets:
        lo, hi = float(np.min(vals + target)), float(np.max(vals + target))
        raise OutOfRange(f"trace {target:.12g} outside the scanned range [{lo:.12g}, {hi:.12g}]")

    def solve_on(a, b):
        if a == b:
            return a
        return brentq(F, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)

    roots = tuple(solve_on(a, b) for a, b in brackets)
    monotone = is_strictly_monotone(samples)
    if not monotone and len(roots) > 1:
        raise NotMonotone(f"forward map has {len(roots)} numeric roots", roots=roots)
    rho = roots[0]
    res = abs(F(rho))
    if res >= tol:
        # bisection on the bracket until the residual target is met
        a, b = brackets[0]
        fa = F(a)
        for _ in range(200):
            m = 0.5 * (a + b)
            fm = F(m)
            if abs(fm) < tol or b - a < 1e-16:
                rho, res = m, abs(fm)
                break
            if fa * fm < 0:
                b = m
            else:
                a, fa = m, fm
    return Reconstruction(float(rho), float(res), tuple(map(float, brackets[0])), roots, monotone)


@dataclass(frozen=True)
class PoissonRow:
    rho: float
    boundary_value: float
    boundary_flux: float


def poisson_nonuniqueness_demo(rhos: Sequence[float], sigma_c: float, sigma_s: float, N: int = 2) -> list:
    """Cauchy data at ``r = 1`` of the explicit Poisson solutions, one row per ``rho``.

    ``boundary_flux`` is ``sigma_s v'(1)``.
    """
    rows = []
    for rho in rhos:
        ref = poisson_reference(float(rho), sigma_c, sigma_s, N)
        rows.append(PoissonRow(float(rho), float(ref.v(1.0)), float(sigma_s * ref.dv(1.0))))
    return rows


def sensitivity(rho: float, R: float, sigma_c: float, sigma_s: float, g: float, N: int = 2,
                step: float = 1e-5) -> float:
    """Central-difference ``dF/drho``."""
    step = min(step, 0.5 * rho, 0.5 * (R - rho))
    return (forward_dirichlet(rho + step, R, sigma_c, sigma_s, g, N)
            - forward_dirichlet(rho - step, R, sigma_c, sigma_s, g, N)) / (2 * step)


def identifiability_table(rhos, R, sigma_c, sigma_s, g, N=2) -> list:
    """Rows contrasting the modified-equation forward map with the Poisson control."""
    out = []
    for row in poisson_nonuniqueness_demo(rhos, sigma_c, sigma_s, N):
        out.append({"rho": row.rho, "poisson_value": row.boundary_value,
                    "poisson_flux": row.boundary_flux,
                    "modified_value": forward_dirichlet(row.rho, R, sigma_c, sigma_s, g, N)})
    return out


__all__ = [
    "CauchyPair", "ForwardMapSample", "Reconstruction", "PoissonRow", "forward_dirichlet",
    "no_inclusion_value", "scan_forward_map", "is_strictly_monotone", "reconstruct_radius",
    "poisson_nonuniqueness_demo", "sensitivity", "identifiability_table",
]
