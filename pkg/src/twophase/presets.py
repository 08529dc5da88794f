"""Named experiment configurations.

Every threshold used to decide pass/fail lives here.  The ``description``
records where each number comes from: either an exact identity (tolerance
set by floating point) or a refinement study run with this code.
"""
from __future__ import annotations

import copy

from .config import SCHEMA_VERSION
from .errors import ConfigError

DEFAULT_SEED = 20240601

PRESETS = {
    "kernel-checks": {
        "schema": SCHEMA_VERSION,
        "kind": "kernel-eval",
        "description": "ODE residual, origin limits, Wronskian and coefficient round trip of the radial basis",
        "params": {"dims": [2, 3], "sigmas": [0.5, 1.0, 2.0], "r_min": 0.05, "r_max": 10.0,
                   "residual_points": 200, "wronskian_points": 50, "roundtrip_trials": 1000,
                   "coefficient_bound": 10.0},
        "thresholds": {"ode_residual": 1e-8, "limit_error": 1e-6, "wronskian_defect": 1e-8,
                       "roundtrip_error": 1e-9},
    },
    "concentric-benchmark": {
        "schema": SCHEMA_VERSION,
        "kind": "stationary",
        "description": ("Laplace transform of the simulated Cauchy problem against the layered solution; "
                        "dt = 2.56 h up to t = 4, 4x coarser after.  Observed errors 2.3e-2, 1.0e-2, 3.5e-3 "
                        "(truncation floor about 3e-3 at half-width 3)"),
        "params": {"problem": "laplace-benchmark", "rho": 0.35, "rho_outer": 1.0,
                   "conductors": {"sigma_c": 2.0, "sigma_s": 1.0, "sigma_m": 1.0},
                   "hs": [0.03125, 0.015625, 0.0078125], "T": 12.0, "dt_per_h": 2.56,
                   "coarse_after": 4.0, "coarse_factor": 4,
                   "radii": [0.1, 0.2, 0.3, 0.5, 0.7, 0.9], "samples_per_circle": 64},
        "thresholds": {"max_error_finest": 5e-2, "value_bound_slack": 1e-12},
    },
    "concentric-vs-offset": {
        "schema": SCHEMA_VERSION,
        "kind": "detect",
        "description": ("Stationarity defect on the circle r = 0.7 for a concentric inclusion and one shifted "
                        "by 0.2; refinement at h = 1/32, 1/64 gave 1.9e-4, 8.0e-5 (concentric) against "
                        "9.7e-3, 1.0e-2 (offset)"),
        "params": {"omega_radius": 1.0, "inclusion_radius": 0.35, "offsets": [0.0, 0.2],
                   "conductors": {"sigma_c": 2.0, "sigma_s": 1.0, "sigma_m": 1.0},
                   "h": 0.0078125, "T": 2.0, "dt": 0.01, "record_every": 5,
                   "curve_radius": 0.7, "curve_points": 256, "t_min": 0.01},
        "thresholds": {"concentric_defect": 2e-2, "offset_ratio": 5.0, "value_bound_slack": 1e-12},
    },
    "parallel-curves": {
        "schema": SCHEMA_VERSION,
        "kind": "detect",
        "description": "Curvature defects: concentric circles (exactly parallel) and an ellipse with its inward offset",
        "params": {"circles": {"outer": 2.0, "inner": 1.0, "points": 256},
                   "ellipse": {"a": 2.0, "b": 1.2, "offset": 0.3, "points": 512}},
        "thresholds": {"circle_weingarten": 1e-3, "ellipse_weingarten_min": 0.05},
    },
    "annulus-rejection": {
        "schema": SCHEMA_VERSION,
        "kind": "stationary",
        "description": "Exterior slopes of the annular auxiliary solution: positive at the inner circle, negative at the outer",
        "params": {"problem": "annulus", "annuli": [
            {"rho_minus": 0.4, "rho_plus": 1.0, "sigma_c": 2.0, "sigma_s": 1.0, "sigma_m": 1.0},
            {"rho_minus": 0.5, "rho_plus": 1.0, "sigma_c": 0.5, "sigma_s": 1.0, "sigma_m": 2.0},
            {"rho_minus": 0.3, "rho_plus": 0.8, "sigma_c": 3.0, "sigma_s": 0.7, "sigma_m": 1.5, "core": [0.5, 0.6]},
        ]},
        "thresholds": {"transmission_residual": 1e-10},
    },
    "overdetermined-neumann": {
        "schema": SCHEMA_VERSION,
        "kind": "overdetermined",
        "description": ("Neumann trace of the Dirichlet problem with alpha = beta = 1, c = 0 on the unit disk; "
                        "h = 1/32, 1/64, 1/128 gave 1.8e-3, 9.4e-4, 4.5e-4 concentric against 1.0e-2 offset"),
        "params": {"alpha": 1.0, "beta": 1.0, "c": 0.0, "R": 1.0, "rho": 0.35,
                   "conductors": {"sigma_c": 2.0, "sigma_s": 1.0}, "offsets": [0.0, 0.2],
                   "h": 0.0078125, "boundary": "cut", "detectors": ["neumann", "inner-level"],
                   "inner_radius": 0.7, "trace_points": 256},
        "thresholds": {"neumann_defect": 1e-2, "inner_level_defect": 1e-2, "offset_ratio": 5.0,
                       "flux_vs_layered": 5e-3},
    },
    "inner-level": {
        "schema": SCHEMA_VERSION,
        "kind": "overdetermined",
        "description": ("Level-set constancy of the same Dirichlet problem on r = 0.7; refinement gave "
                        "5.9e-5, 1.4e-5, 3.6e-6 concentric against 4.0e-3 offset"),
        "params": {"alpha": 1.0, "beta": 1.0, "c": 0.0, "R": 1.0, "rho": 0.35,
                   "conductors": {"sigma_c": 2.0, "sigma_s": 1.0}, "offsets": [0.0, 0.2],
                   "h": 0.0078125, "boundary": "cut", "detectors": ["inner-level"],
                   "inner_radius": 0.7, "trace_points": 256},
        "thresholds": {"inner_level_defect": 1e-2, "offset_ratio": 5.0},
    },
    "ibvp-heating": {
        "schema": SCHEMA_VERSION,
        "kind": "simulate",
        "description": "Initial-boundary problem in the unit disk: bounds, monotone heating, angular constancy on r = 0.7",
        "params": {"problem": "ibvp", "omega_radius": 1.0, "inclusions": [{"center": [0.0, 0.0], "radius": 0.35}],
                   "conductors": {"sigma_c": 2.0, "sigma_s": 1.0, "sigma_m": 1.0},
                   "h": 0.0078125, "T": 1.0, "dt": 0.01, "record_every": 5, "probe_radius": 0.7},
        "thresholds": {"value_bound_slack": 1e-12, "angular_spread": 1e-3, "monotone_slack": 1e-12},
    },
    "invert-roundtrip": {
        "schema": SCHEMA_VERSION,
        "kind": "invert",
        "description": "Recover rho = 0.1 ... 0.9 from synthetic Cauchy pairs (R = 1, sigma_c = 2, sigma_s = 1, g = -0.5)",
        "params": {"mode": "roundtrip", "R": 1.0, "sigma_c": 2.0, "sigma_s": 1.0, "g": -0.5, "N": 2,
                   "rhos": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
                   "pairs": [[2.0, 1.0], [0.5, 1.0], [3.0, 0.7], [0.3, 1.5]]},
        "thresholds": {"roundtrip_error": 1e-3},
    },
    "poisson-vs-modified": {
        "schema": SCHEMA_VERSION,
        "kind": "invert",
        "description": "Cauchy data of the Poisson control (constant in rho) against the modified forward map",
        "params": {"mode": "contrast", "R": 1.0, "sigma_c": 2.0, "sigma_s": 1.0, "g": -0.5, "N": 2,
                   "rhos": [0.2, 0.5, 0.8]},
        "thresholds": {"poisson_spread": 1e-12, "modified_spread_min": 1e-4},
    },
    "comparison-battery": {
        "schema": SCHEMA_VERSION,
        "kind": "compare-lemma",
        "description": "Randomized sign assertions at crossings of two-conductivity solution pairs, 200 draws per case",
        "seed": DEFAULT_SEED,
        "params": {"per_case": 200, "sigma_range": [0.3, 3.0], "dims": [2, 3], "panels": 2048},
        "thresholds": {"violations": 0},
    },
}


def list_presets():
    """``(name, description)`` pairs in a stable order."""
    return [(name, PRESETS[name]["description"]) for name in sorted(PRESETS)]


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; run `twophase presets` for the list") from None
