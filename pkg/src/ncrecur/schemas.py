"""JSON schemas for the files written by ``ncrecur run``."""
from __future__ import annotations

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_COMPLEX = {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}
_COORDS = {"type": "array", "items": _INT, "minItems": 1}

_ALPHA0 = {
    "type": "object",
    "required": ["index", "N", "lambda_size", "criterion_residual", "criterion_threshold"],
    "properties": {
        "index": _INT,
        "N": _INT,
        "lambda_size": _INT,
        "criterion_residual": _NUM,
        "criterion_threshold": _NUM,
    },
}

_CHECK = {
    "type": "object",
    "required": ["passed", "residual"],
    "properties": {"passed": {"type": "boolean"}, "residual": _NUM},
}

VALIDATION = {
    "type": "object",
    "required": ["passed", "checks", "omega_isometric", "isometry_residual", "samples", "seed", "tol"],
    "properties": {
        "passed": {"type": "boolean"},
        "checks": {
            "type": "object",
            "required": ["semigroup_law", "unital", "contractive"],
            "additionalProperties": _CHECK,
        },
        "omega_isometric": {"type": "boolean"},
        "isometry_residual": _NUM,
        "samples": _INT,
        "seed": _INT,
        "tol": _NUM,
    },
}

GNS = {
    "type": "object",
    "required": [
        "hdim",
        "rank_tol",
        "gram_eigenvalues_kept",
        "omega_norm",
        "lift_residual",
        "u_norms",
        "u_semigroup_residual",
        "fixed_rank",
        "ergodicity",
        "projection_vs_average",
    ],
    "properties": {
        "hdim": _INT,
        "rank_tol": _NUM,
        "gram_eigenvalues_kept": {"type": "array", "items": _NUM},
        "omega_norm": _NUM,
        "lift_residual": _NUM,
        "u_norms": {"type": "array", "items": _NUM},
        "u_semigroup_residual": _NUM,
        "fixed_rank": _INT,
        "ergodicity": {
            "type": "object",
            "required": ["ergodic", "rank", "deviation"],
            "properties": {"ergodic": {"type": "boolean"}, "rank": _INT, "deviation": _NUM},
        },
        "projection_vs_average": {
            "type": "object",
            "required": ["N", "lambda_size", "norm"],
            "properties": {"N": _INT, "lambda_size": _INT, "norm": _NUM},
        },
    },
}

_KHINTCHINE = {
    "type": "object",
    "required": ["epsilon", "side", "alpha0", "lower_bound", "limit_value", "all_pass", "records"],
    "properties": {
        "epsilon": _NUM,
        "side": {"enum": ["left", "right"]},
        "alpha0": _ALPHA0,
        "lower_bound": _NUM,
        "limit_value": _COMPLEX,
        "all_pass": {"type": "boolean"},
        "readback_residual": _NUM,
        "corollary": {"type": "object"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "h",
                    "window_average",
                    "window_average_abs",
                    "witness",
                    "witness_value",
                    "witness_abs",
                    "passed",
                ],
                "properties": {
                    "h": _COORDS,
                    "window_average": _COMPLEX,
                    "window_average_abs": _NUM,
                    "witness": _COORDS,
                    "witness_value": _COMPLEX,
                    "witness_abs": _NUM,
                    "passed": {"type": "boolean"},
                    "algebra_value": _COMPLEX,
                },
            },
        },
    },
}

RECURRENCE = {
    "type": "object",
    "required": ["khintchine", "ergodic_bound", "all_pass"],
    "properties": {
        "khintchine": _KHINTCHINE,
        "ergodic_bound": {"oneOf": [_KHINTCHINE, {"type": "null"}]},
        "all_pass": {"type": "boolean"},
    },
}

MULTIREC = {
    "type": "object",
    "required": [
        "q",
        "exponents",
        "epsilon",
        "alpha0",
        "omega_a",
        "limit_value",
        "lower_bound",
        "nonvanishing_applies",
        "readback_residual",
        "all_pass",
        "records",
    ],
    "properties": {
        "q": _INT,
        "exponents": {"type": "array"},
        "epsilon": _NUM,
        "alpha0": _ALPHA0,
        "omega_a": _COMPLEX,
        "limit_value": _NUM,
        "lower_bound": _NUM,
        "nonvanishing_applies": {"type": "boolean"},
        "readback_residual": _NUM,
        "all_pass": {"type": "boolean"},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["h", "witness", "factor_values", "product_abs", "passed"],
            },
        },
    },
}

MANIFEST = {
    "type": "object",
    "required": ["tool", "versions", "command", "config", "rng", "files", "status", "exit_code", "wall_time"],
    "properties": {
        "tool": {"type": "string"},
        "versions": {"type": "object", "additionalProperties": {"type": "string"}},
        "command": {"enum": ["run", "validate-only"]},
        "config": {"type": "object"},
        "rng": {"type": "object"},
        "files": {"type": "object", "additionalProperties": {"type": "string"}},
        "status": {"enum": ["ok", "invariant-failure"]},
        "failures": {"type": "array", "items": {"type": "string"}},
        "exit_code": {"enum": [0, 1]},
        "wall_time": _NUM,
    },
}

BY_FILE = {
    "manifest.json": MANIFEST,
    "validation.json": VALIDATION,
    "gns.json": GNS,
    "recurrence.json": RECURRENCE,
    "multirec.json": MULTIREC,
}
