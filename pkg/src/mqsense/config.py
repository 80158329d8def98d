"""Run configuration: JSON schema, loading and defaults."""
from __future__ import annotations

import copy
import hashlib
import json
from pathlib import Path

import jsonschema

from .errors import ConfigError

PIPELINES = ("basis-info", "build-cluster", "mqc-scan", "jitter-sweep", "qfi-sweep", "oracle-validate")

_num = {"type": "number"}
_nonneg = {"type": "number", "minimum": 0}
_pos = {"type": "number", "exclusiveMinimum": 0}
_count = {"type": "integer", "minimum": 0}
_even_list = {"type": "array", "items": {"type": "integer", "minimum": 0, "multipleOf": 2}, "minItems": 1}
_prob_list = {"type": "array", "items": {"type": "number", "minimum": 0, "maximum": 1}, "minItems": 1}

SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["pipelines", "n_spins"],
    "properties": {
        "pipelines": {"type": "array", "items": {"enum": list(PIPELINES)}, "minItems": 1, "uniqueItems": True},
        "n_spins": {"type": "integer", "minimum": 1, "maximum": 64},
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "plots": {"type": "boolean"},
        "seed_state": {"enum": ["thermal", "ghz"]},
        "evolution": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "coupling": _num,
                "cycle_time": _pos,
                "loops_prepare": _count,
                "loops_reverse": _count,
                "jitter": _nonneg,
                "jitter_constant": _nonneg,
                "steps_per_loop": {"type": "integer", "minimum": 1},
                "dephasing": {"type": "number", "minimum": 0, "maximum": 1},
                "plan": {"enum": ["echo-matched", "partial-reversal"]},
                "method": {"enum": ["expm", "rk4"]},
            },
        },
        "scan": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_phi": {"type": "integer", "minimum": 2},
                "suppress_zero": {"type": "boolean"},
            },
        },
        "cluster": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_order": {"type": "integer", "minimum": 0, "multipleOf": 2},
                "weight_mode": {"enum": ["equal", "gaussian"]},
                "gaussian_width": _pos,
                "mixing": {"type": "number", "minimum": 0, "maximum": 1},
                "dephasing": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "jitter_sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "deltas": {"type": "array", "items": _nonneg, "minItems": 1},
                "m_c": _even_list,
                "noise_rms": _nonneg,
                "suppress_zero": {"type": "boolean"},
            },
        },
        "qfi_sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m_c": _even_list,
                "p": _prob_list,
                "modes": {"type": "array", "items": {"enum": ["equal", "gaussian"]}, "minItems": 1},
                "mixing": {"type": "number", "minimum": 0, "maximum": 1},
                "gaussian_width": _pos,
            },
        },
        "oracle": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_spins": {"type": "array", "items": {"type": "integer", "minimum": 1, "maximum": 8}, "minItems": 1},
                "samples": {"type": "integer", "minimum": 1},
                "checks": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            },
        },
    },
}

DEFAULTS = {
    "seed": 0,
    "threads": 1,
    "plots": False,
    "seed_state": "thermal",
    "evolution": {
        "coupling": 2000.0,
        "cycle_time": 52.8e-6,
        "loops_prepare": 20,
        "loops_reverse": 20,
        "jitter": 0.0,
        "steps_per_loop": 16,
        "dephasing": 0.0,
        "plan": "echo-matched",
        "method": "expm",
    },
    "scan": {"n_phi": 181, "suppress_zero": True},
    "cluster": {"max_order": None, "weight_mode": "equal", "gaussian_width": None, "mixing": 1.0, "dephasing": 0.0},
    "jitter_sweep": {"deltas": [0.0, 0.01, 0.02, 0.03, 0.04], "m_c": None, "noise_rms": None, "suppress_zero": True},
    "qfi_sweep": {"m_c": None, "p": [0.70, 0.75, 0.80], "modes": ["equal", "gaussian"], "mixing": 1.0,
                  "gaussian_width": None},
    "oracle": {"n_spins": [2, 3, 4], "samples": 5, "checks": None},
}


def _location(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    return path or "<root>"


def validate(raw: dict) -> None:
    """Raise :class:`ConfigError` naming the offending field for every schema violation."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        raise ConfigError("; ".join(f"{_location(e)}: {e.message}" for e in errors))
    n = raw["n_spins"]
    for key in ("cluster", "jitter_sweep", "qfi_sweep"):
        sec = raw.get(key, {})
        for m in ([sec["max_order"]] if "max_order" in sec else []) + list(sec.get("m_c", [])):
            if m > n:
                raise ConfigError(f"{key}: order {m} exceeds n_spins={n}")
    if "oracle-validate" in raw["pipelines"]:
        from .validation import CHECKS

        for name in raw.get("oracle", {}).get("checks", []) or []:
            if name not in CHECKS:
                raise ConfigError(f"oracle.checks: unknown check {name!r}")


def parse(text: str, source: str = "<config>") -> dict:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: top level must be an object")
    try:
        validate(raw)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return raw


def load(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse(text, str(path))


def resolve(raw: dict) -> dict:
    """Merge defaults into a validated config; every key ends up explicit."""
    cfg = copy.deepcopy(DEFAULTS)
    for key, value in raw.items():
        if isinstance(value, dict):
            cfg[key].update(value)
        else:
            cfg[key] = value
    n = cfg["n_spins"]
    even_n = n - n % 2
    if cfg["cluster"]["max_order"] is None:
        cfg["cluster"]["max_order"] = even_n
    if cfg["jitter_sweep"]["m_c"] is None:
        cfg["jitter_sweep"]["m_c"] = list(range(0, even_n + 1, 2))
    if cfg["qfi_sweep"]["m_c"] is None:
        cfg["qfi_sweep"]["m_c"] = list(range(2, even_n + 1, 2)) or [0]
    from .dynamics import JITTER_CONSTANT

    cfg["evolution"].setdefault("jitter_constant", JITTER_CONSTANT)
    if cfg["oracle"]["checks"] is None:
        from .validation import CHECKS

        cfg["oracle"]["checks"] = list(CHECKS)
    return cfg


def canonical(cfg: dict) -> str:
    return json.dumps(cfg, sort_keys=True, separators=(",", ":"))


def digest(cfg: dict) -> str:
    return hashlib.sha256(canonical(cfg).encode()).hexdigest()
