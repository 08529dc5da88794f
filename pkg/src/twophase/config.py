"""Experiment configuration: JSON documents validated against a versioned schema."""
from __future__ import annotations

import json
from pathlib import Path

import jsonschema

from .errors import ConfigError

SCHEMA_VERSION = "twophase/1"

KINDS = ("kernel-eval", "stationary", "simulate", "detect", "invert", "compare-lemma", "overdetermined")

_pos = {"type": "number", "exclusiveMinimum": 0}
_nonneg = {"type": "number", "minimum": 0}
_dim = {"type": "integer", "minimum": 2, "maximum": 3}
_pos_list = {"type": "array", "items": _pos, "minItems": 1}
_inclusion = {
    "type": "object",
    "required": ["radius"],
    "properties": {"center": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                   "radius": _pos},
    "additionalProperties": False,
}
_conductors = {
    "type": "object",
    "properties": {"sigma_c": _pos, "sigma_s": _pos, "sigma_m": _pos},
    "additionalProperties": False,
}

PARAM_SCHEMAS = {
    "kernel-eval": {
        "type": "object",
        "properties": {
            "dims": {"type": "array", "items": _dim, "minItems": 1},
            "sigmas": _pos_list,
            "r_min": _pos, "r_max": _pos,
            "residual_points": {"type": "integer", "minimum": 10},
            "wronskian_points": {"type": "integer", "minimum": 2},
            "roundtrip_trials": {"type": "integer", "minimum": 1},
            "coefficient_bound": _pos,
        },
        "additionalProperties": False,
    },
    "stationary": {
        "type": "object",
        "required": ["problem"],
        "properties": {
            "problem": {"enum": ["laplace-benchmark", "annulus"]},
            "rho": _pos, "rho_outer": _pos, "conductors": _conductors,
            "hs": _pos_list, "T": _pos, "dt_per_h": _pos,
            "coarse_after": _pos, "coarse_factor": {"type": "integer", "minimum": 1},
            "radii": _pos_list, "samples_per_circle": {"type": "integer", "minimum": 16},
            "annuli": {"type": "array", "minItems": 1, "items": {
                "type": "object",
                "required": ["rho_minus", "rho_plus"],
                "properties": {"rho_minus": _pos, "rho_plus": _pos, "sigma_c": _pos, "sigma_s": _pos,
                               "sigma_m": _pos,
                               "core": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2}},
                "additionalProperties": False}},
            "export_field": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "simulate": {
        "type": "object",
        "properties": {
            "problem": {"enum": ["cauchy", "ibvp"]},
            "omega_radius": _pos, "inclusions": {"type": "array", "items": _inclusion},
            "conductors": _conductors, "h": _pos, "T": _pos, "dt": _pos,
            "scheme": {"enum": ["euler", "cn"]}, "boundary": {"enum": ["stair", "cut"]},
            "record_every": {"type": "integer", "minimum": 1},
            "probe_radius": _pos, "export_frames": {"type": "boolean"},
        },
        "additionalProperties": False,
    },
    "detect": {
        "type": "object",
        "properties": {
            "omega_radius": _pos, "inclusion_radius": _pos, "offsets": {"type": "array", "items": _nonneg, "minItems": 2},
            "conductors": _conductors, "h": _pos, "T": _pos, "dt": _pos,
            "record_every": {"type": "integer", "minimum": 1},
            "curve_radius": _pos, "curve_points": {"type": "integer", "minimum": 16}, "t_min": _nonneg,
            "ellipse": {"type": "object", "properties": {"a": _pos, "b": _pos, "offset": _pos,
                                                         "points": {"type": "integer", "minimum": 16}},
                        "additionalProperties": False},
            "circles": {"type": "object", "properties": {"outer": _pos, "inner": _pos,
                                                         "points": {"type": "integer", "minimum": 16}},
                        "additionalProperties": False},
        },
        "additionalProperties": False,
    },
    "invert": {
        "type": "object",
        "properties": {
            "mode": {"enum": ["roundtrip", "contrast"]},
            "R": _pos, "sigma_c": _pos, "sigma_s": _pos, "g": {"type": "number"}, "N": _dim,
            "rhos": _pos_list, "noise": _nonneg,
            "pairs": {"type": "array", "items": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2}},
        },
        "additionalProperties": False,
    },
    "compare-lemma": {
        "type": "object",
        "properties": {
            "per_case": {"type": "integer", "minimum": 1},
            "sigma_range": {"type": "array", "items": _pos, "minItems": 2, "maxItems": 2},
            "dims": {"type": "array", "items": _dim, "minItems": 1},
            "panels": {"type": "integer", "minimum": 16},
        },
        "additionalProperties": False,
    },
    "overdetermined": {
        "type": "object",
        "properties": {
            "alpha": _pos, "beta": {"type": "number"}, "c": {"type": "number"},
            "R": _pos, "rho": _pos, "conductors": _conductors, "offsets": {"type": "array", "items": _nonneg, "minItems": 2},
            "h": _pos, "boundary": {"enum": ["stair", "cut"]},
            "detectors": {"type": "array", "items": {"enum": ["neumann", "inner-level"]}, "minItems": 1},
            "inner_radius": _pos, "trace_points": {"type": "integer", "minimum": 16},
        },
        "additionalProperties": False,
    },
}

SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema", "kind"],
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "kind": {"enum": list(KINDS)},
        "name": {"type": "string"},
        "description": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2 ** 64 - 1},
        "params": {"type": "object"},
        "thresholds": {"type": "object", "additionalProperties": {"type": "number"}},
    },
    "additionalProperties": False,
}


def validate(config: dict) -> dict:
    """Schema check plus the module preconditions that JSON Schema cannot express."""
    _check(config, SCHEMA, "")
    _check(config.get("params", {}), PARAM_SCHEMAS[config["kind"]], "params")
    _semantic_checks(config)
    return config


def _check(doc, schema, prefix):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join([prefix] * bool(prefix) + [str(p) for p in exc.absolute_path]) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None


def _semantic_checks(config):
    p = config.get("params", {})
    kind = config["kind"]
    if kind == "kernel-eval" and p.get("r_min", 0.05) >= p.get("r_max", 10.0):
        raise ConfigError("params: r_min must be below r_max")
    if kind == "stationary" and p.get("problem") == "laplace-benchmark":
        if p.get("rho", 0.35) >= p.get("rho_outer", 1.0):
            raise ConfigError("params: inclusion radius must be below rho_outer")
        if p.get("T", 12.0) < 12.0:
            raise ConfigError("params: the Laplace transform needs T >= 12")
    if kind == "stationary" and p.get("problem") == "annulus":
        for a in p.get("annuli", []):
            if not a["rho_minus"] < a["rho_plus"]:
                raise ConfigError("params.annuli: need rho_minus < rho_plus")
    if kind in ("detect", "overdetermined"):
        R = p.get("omega_radius", p.get("R", 1.0))
        rho = p.get("inclusion_radius", p.get("rho", 0.35))
        for off in p.get("offsets", [0.0]):
            if off + rho >= R:
                raise ConfigError(f"params: inclusion with offset {off} leaves omega")
    if kind == "overdetermined":
        alpha, beta, c = p.get("alpha", 1.0), p.get("beta", 1.0), p.get("c", 0.0)
        if not c < beta / alpha:
            raise ConfigError("params: need c < beta / alpha")
        r = p.get("inner_radius", 0.7)
        if not max(p.get("offsets", [0.0])) + p.get("rho", 0.35) < r < p.get("R", 1.0):
            raise ConfigError("params: inner circle must enclose the inclusion and stay inside omega")
    if kind == "invert":
        R = p.get("R", 1.0)
        if any(not 0 < r < R for r in p.get("rhos", [])):
            raise ConfigError("params.rhos: every radius must lie in (0, R)")
        if p.get("g", -0.5) == 0:
            raise ConfigError("params.g: the Neumann datum must be nonzero")
    if kind == "compare-lemma":
        lo, hi = p.get("sigma_range", [0.3, 3.0])
        if not lo < hi:
            raise ConfigError("params.sigma_range: need lower < upper")


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return validate(config)
