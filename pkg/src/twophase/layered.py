"""Concentric transmission problems solved exactly in the radial basis.

A radial field is a stack of layers; inside each layer it is one
:class:`~twophase.kernel.RadialProfile`.  Coefficients come from a small
dense linear system expressing continuity of value and of flux
``conductivity * f'`` at every interface, regularity at the origin, and an
outer condition (decay at infinity, a Dirichlet value or a Neumann flux).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import SingularSystemError
from .kernel import (
    OdeParams,
    RadialProfile,
    eval_decaying,
    eval_f_reg,
    f_sing_values,
    ode_residual,
)

CASE_TOLERANCE = 1e-9


@dataclass(frozen=True)
class LayeredConductor:
    """Core disk of radius ``rho_core`` inside a disk of radius ``rho_outer``."""

    rho_core: float
    rho_outer: float = 1.0
    sigma_c: float = 2.0
    sigma_s: float = 1.0
    sigma_m: float = 1.0
    N: int = 2
    allow_single_phase: bool = False

    def __post_init__(self):
        if not 0 < self.rho_core < self.rho_outer:
            raise ValueError("need 0 < rho_core < rho_outer")
        if min(self.sigma_c, self.sigma_s, self.sigma_m) <= 0:
            raise ValueError("conductivities must be positive")
        if self.sigma_c == self.sigma_s and not self.allow_single_phase:
            raise ValueError("sigma_c must differ from sigma_s")
        if self.N < 2:
            raise ValueError("N must be >= 2")


@dataclass(frozen=True)
class AnnularConductor:
    """Annulus ``rho_minus < r < rho_plus`` with an optional annular core.

    The cavity ``r < rho_minus`` and the exterior ``r > rho_plus`` are filled
    with the medium of conductivity ``sigma_m``.
    """

    rho_minus: float
    rho_plus: float
    sigma_c: float = 2.0
    sigma_s: float = 1.0
    sigma_m: float = 1.0
    core: Optional[tuple] = None
    N: int = 2

    def __post_init__(self):
        if not 0 < self.rho_minus < self.rho_plus:
            raise ValueError("need 0 < rho_minus < rho_plus")
        if self.core is not None:
            a, b = self.core
            if not self.rho_minus < a < b < self.rho_plus:
                raise ValueError("annular core must sit strictly inside the annulus")


@dataclass(frozen=True)
class OverdeterminedSpec:
    """Data of ``div(sigma grad u) = alpha u - beta`` in ``B_R`` with ``u = c`` on the sphere."""

    alpha: float
    beta: float
    c: float
    R: float
    rho: float
    sigma_c: float
    sigma_s: float
    N: int = 2

    def __post_init__(self):
        if self.alpha < 0 or self.beta <= 0:
            raise ValueError("need alpha >= 0 and beta > 0")
        if not 0 < self.rho < self.R:
            raise ValueError("need 0 < rho < R")
        if self.alpha > 0 and not self.c < self.beta / self.alpha:
            raise ValueError("need c < beta/alpha so that alpha u - beta < 0")


@dataclass(frozen=True)
class Layer:
    r_in: float
    r_out: float
    profile: RadialProfile
    conductivity: float
    name: str


@dataclass(frozen=True)
class CaseLabel:
    label: str
    c1_star: float


@dataclass(frozen=True)
class RadialField:
    layers: tuple
    conductor: object = None

    @property
    def interfaces(self):
        return [layer.r_out for layer in self.layers[:-1]]

    def layer(self, name: str) -> Layer:
        """Outermost layer with the given name."""
        for layer in reversed(self.layers):
            if layer.name == name:
                return layer
        raise KeyError(name)

    def evaluate(self, r):
        """Piecewise ``(value, derivative)``; interfaces belong to the outer layer."""
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        flat = np.atleast_1d(r).ravel()
        value = np.empty_like(flat)
        deriv = np.empty_like(flat)
        for layer in self.layers:
            mask = (flat >= layer.r_in) & (flat < layer.r_out)
            if layer is self.layers[-1]:
                mask |= flat >= layer.r_out
            if mask.any():
                v, d = layer.profile.evaluate(flat[mask])
                value[mask], deriv[mask] = v, d
        if scalar:
            return float(value[0]), float(deriv[0])
        return value.reshape(r.shape), deriv.reshape(r.shape)

    def __call__(self, r):
        return self.evaluate(r)[0]

    def conductivity(self, r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        for layer in self.layers:
            mask = (r >= layer.r_in) & (r < layer.r_out)
            out[mask] = layer.conductivity
        out[r >= self.layers[-1].r_out] = self.layers[-1].conductivity
        return out

    def transmission_residuals(self):
        """``(value jump, flux jump)`` at every interface."""
        out = []
        for inner, outer in zip(self.layers[:-1], self.layers[1:]):
            rho = inner.r_out
            v1, d1 = inner.profile.evaluate(rho)
            v2, d2 = outer.profile.evaluate(rho)
            out.append((abs(v1 - v2), abs(inner.conductivity * d1 - outer.conductivity * d2)))
        return out

    def pde_residual(self, samples: int = 1000, r_far: float = 4.0) -> float:
        """Largest relative ODE residual over per-layer sample grids."""
        worst = 0.0
        for layer in self.layers:
            hi = layer.r_out if np.isfinite(layer.r_out) else layer.r_in + r_far
            lo = layer.r_in if layer.r_in > 0 else 1e-2 * hi
            pad = 1e-3 * (hi - lo)
            grid = np.linspace(lo + pad, hi - pad, samples)
            prof = layer.profile
            homogeneous = RadialProfile(prof.params, prof.c_sing, prof.c_reg, 0.0, prof.c_decay)
            res = ode_residual(homogeneous.evaluate, grid, prof.params, step=1e-4)
            worst = max(worst, float(np.max(res)))
        return worst


# ---------------------------------------------------------------------------
# generic assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _LayerSpec:
    r_out: float
    ode_sigma: float
    conductivity: float
    offset: float
    name: str


def _basis(kind: str, r: float, params: OdeParams):
    if kind == "reg":
        return eval_f_reg(r, params)
    if kind == "sing":
        v, d = f_sing_values(np.array([r]), params)
        return float(v[0]), float(d[0])
    return eval_decaying(r, params)


def solve_layers(specs: Sequence[_LayerSpec], N: int, outer: tuple = ("decay",),
                 conductor=None) -> RadialField:
    """Assemble and solve the interface system.

    ``outer`` is ``("decay",)`` when the last layer extends to infinity,
    ``("dirichlet", value)`` or ``("neumann", flux)`` when it ends at its
    ``r_out``; a Neumann datum is ``conductivity * f'`` at the boundary.
    """
    n = len(specs)
    kinds = []
    for i, spec in enumerate(specs):
        if i == 0:
            kinds.append(("reg",))
        elif i == n - 1 and outer[0] == "decay":
            kinds.append(("decay",))
        else:
            kinds.append(("sing", "reg"))
    cols = []
    for i, ks in enumerate(kinds):
        cols.extend((i, k) for k in ks)
    index = {c: j for j, c in enumerate(cols)}
    params = [OdeParams(N, s.ode_sigma) for s in specs]
    rows, rhs = [], []
    for i in range(n - 1):
        rho = specs[i].r_out
        val_row = np.zeros(len(cols))
        flux_row = np.zeros(len(cols))
        for side, sign in ((i, 1.0), (i + 1, -1.0)):
            for k in kinds[side]:
                v, d = _basis(k, rho, params[side])
                val_row[index[(side, k)]] += sign * v
                flux_row[index[(side, k)]] += sign * specs[side].conductivity * d
        rows += [val_row, flux_row]
        rhs += [specs[i + 1].offset - specs[i].offset, 0.0]
    if outer[0] in ("dirichlet", "neumann"):
        last = n - 1
        R = specs[last].r_out
        row = np.zeros(len(cols))
        for k in kinds[last]:
            v, d = _basis(k, R, params[last])
            row[index[(last, k)]] = v if outer[0] == "dirichlet" else specs[last].conductivity * d
        rows.append(row)
        rhs.append(outer[1] - specs[last].offset if outer[0] == "dirichlet" else outer[1])
    A = np.array(rows)
    b = np.array(rhs)
    if A.shape[0] != A.shape[1]:
        raise SingularSystemError(f"interface system is {A.shape[0]}x{A.shape[1]}")
    # column scaling keeps the conditioning estimate meaningful
    scale = np.max(np.abs(A), axis=0)
    scale[scale == 0] = 1.0
    As = A / scale
    if np.linalg.cond(As) > 1e13:
        raise SingularSystemError("interface matrix is numerically singular")
    coef = np.linalg.solve(As, b) / scale
    layers = []
    r_in = 0.0
    for i, spec in enumerate(specs):
        c = {k: coef[index[(i, k)]] for k in kinds[i]}
        prof = RadialProfile(
            params[i],
            c_sing=float(c.get("sing", 0.0)),
            c_reg=float(c.get("reg", 0.0)),
            offset=spec.offset,
            c_decay=float(c.get("decay", 0.0)),
        )
        layers.append(Layer(r_in, spec.r_out, prof, spec.conductivity, spec.name))
        r_in = spec.r_out
    return RadialField(tuple(layers), conductor)


# ---------------------------------------------------------------------------
# public solves
# ---------------------------------------------------------------------------

def solve_auxiliary_concentric(conductor: LayeredConductor) -> RadialField:
    """Unit-frequency Laplace transform of ``1 - u`` for the concentric Cauchy problem.

    Core ``V = 1 + a f_reg``, shell ``U = 1 + b f_sing + c f_reg``, exterior
    ``W = d f_decay`` with all solutions taken at the layer's conductivity.
    """
    k = conductor
    specs = [
        _LayerSpec(k.rho_core, k.sigma_c, k.sigma_c, 1.0, "core"),
        _LayerSpec(k.rho_outer, k.sigma_s, k.sigma_s, 1.0, "shell"),
        _LayerSpec(np.inf, k.sigma_m, k.sigma_m, 0.0, "medium"),
    ]
    return solve_layers(specs, k.N, ("decay",), conductor)


def solve_auxiliary_annulus(conductor: AnnularConductor) -> RadialField:
    """Same system when the conductor is an annulus around a cavity of medium."""
    k = conductor
    specs = [_LayerSpec(k.rho_minus, k.sigma_m, k.sigma_m, 0.0, "cavity")]
    if k.core is None:
        specs.append(_LayerSpec(k.rho_plus, k.sigma_s, k.sigma_s, 1.0, "shell"))
    else:
        a, b = k.core
        specs += [
            _LayerSpec(a, k.sigma_s, k.sigma_s, 1.0, "shell"),
            _LayerSpec(b, k.sigma_c, k.sigma_c, 1.0, "core"),
            _LayerSpec(k.rho_plus, k.sigma_s, k.sigma_s, 1.0, "shell"),
        ]
    specs.append(_LayerSpec(np.inf, k.sigma_m, k.sigma_m, 0.0, "medium"))
    return solve_layers(specs, k.N, ("decay",), conductor)


def classify_case(field: RadialField, tol: float = CASE_TOLERANCE) -> CaseLabel:
    """Sign of the singular coefficient of the (outermost) shell profile."""
    c1 = field.layer("shell").profile.c_sing
    if abs(c1) < tol:
        return CaseLabel("case_i", c1)
    return CaseLabel("case_ii" if c1 < 0 else "case_iii", c1)


def find_rho_max(field: RadialField, r_min: Optional[float] = None, samples: int = 4000):
    """Zero of ``U'`` for the shell profile continued inward, or ``None``.

    The shell solution extends to every ``r > 0``, so the search runs over
    ``(r_min, rho_outer)`` with ``r_min`` defaulting to ``1e-4 rho_outer``.
    Only a change from ``U' > 0`` to ``U' < 0`` (an interior maximum) counts.
    """
    shell = field.layer("shell")
    prof = shell.profile
    hi = shell.r_out
    lo = 1e-4 * hi if r_min is None else r_min
    grid = np.geomspace(lo, hi, samples)
    slope = np.asarray(prof.evaluate(grid)[1])
    sign = np.sign(slope)
    idx = np.nonzero((sign[:-1] > 0) & (sign[1:] <= 0))[0]
    if idx.size == 0:
        return None
    from scipy.optimize import brentq

    i = idx[0]
    if sign[i + 1] == 0:
        return float(grid[i + 1])
    return float(brentq(lambda x: prof.evaluate(x)[1], grid[i], grid[i + 1], xtol=1e-13))


def solve_overdetermined_radial(spec: OverdeterminedSpec):
    """Radial solution of the two-phase Dirichlet problem and its Neumann datum.

    With ``alpha > 0`` every layer is ``beta/alpha + (basis at sigma/alpha)``.
    Returns ``(field, d)`` with ``d = sigma_s u'(R)``.
    """
    if not spec.alpha > 0:
        raise ValueError("alpha must be positive; use poisson_reference for alpha = 0")
    a, b = spec.alpha, spec.beta
    specs = [
        _LayerSpec(spec.rho, spec.sigma_c / a, spec.sigma_c, b / a, "core"),
        _LayerSpec(spec.R, spec.sigma_s / a, spec.sigma_s, b / a, "shell"),
    ]
    field = solve_layers(specs, spec.N, ("dirichlet", spec.c), spec)
    d = spec.sigma_s * field.layer("shell").profile.evaluate(spec.R)[1]
    return field, d


@dataclass(frozen=True)
class PoissonReference:
    """Explicit radial solutions of ``div(sigma grad v) = -1`` in the unit ball."""

    rho: float
    sigma_c: float
    sigma_s: float
    N: int = 2

    def u(self, r):
        r = np.asarray(r, dtype=float)
        return (1.0 - r * r) / (2.0 * self.N * self.sigma_s)

    def du(self, r):
        return -np.asarray(r, dtype=float) / (self.N * self.sigma_s)

    def v(self, r):
        r = np.asarray(r, dtype=float)
        inside = self.sigma_s / self.sigma_c * (self.u(r) - self.u(self.rho)) + self.u(self.rho)
        return np.where(r < self.rho, inside, self.u(r))

    def dv(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < self.rho, self.sigma_s / self.sigma_c * self.du(r), self.du(r))

    def conductivity(self, r):
        return np.where(np.asarray(r) < self.rho, self.sigma_c, self.sigma_s)


def poisson_reference(rho: float, sigma_c: float, sigma_s: float, N: int = 2) -> PoissonReference:
    if not 0 < rho < 1:
        raise ValueError("need 0 < rho < 1")
    return PoissonReference(rho, sigma_c, sigma_s, N)
