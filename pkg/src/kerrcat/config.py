"""Run configuration: defaults, JSON loading, overrides and validation."""
from __future__ import annotations

import copy
import hashlib
import json
import math
from pathlib import Path

from .model import Constant, Logistic, ModelParams
from .odeint import METHODS, SolverSettings


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


DEFAULTS = {
    "model": {"kappa": 1.0, "K": 1.0, "delta": 0.0},
    "ramp": {"p_max": 2.5, "gamma": 1.5, "t_c": 5.0},
    "gate": {"p0": 1.5},
    "solver": {"rtol": 1e-8, "atol": 1e-10, "method": "dopri5"},
    "prepare": {"t_start": 0.0, "t_end": 20.0, "samples": 512, "x0": 1e-3,
                "gamma_sweep": [0.5, 1.5, 4.0]},
    "branches": {"t_start": 0.0, "t_end": 20.0, "samples": 512, "T": None, "a3_init": 0.0,
                 "w_star": None, "x0_red": 0.1, "w_star_sweep": [0.01, None, 1.0]},
    "skeleton": {"points": 4001, "extent": 2.5, "grid": 201},
    "melnikov": {"sigma": 0.3, "amplitudes": [2.0, 4.0, 6.0], "t0_points": 801},
    "threshold": {"sigma_min": 0.1, "sigma_max": 1.0, "sigma_points": 181, "t0_points": 801},
    "transport": {"A": 7.5, "sigma": 0.3, "n": 150, "radius": 0.8, "center": None,
                  "t_final": 8.0},
}

# (section, key) -> (kind, lower bound, strict)
_RULES = {
    ("model", "kappa"): ("float", 0.0, False),
    ("model", "K"): ("float", 0.0, True),
    ("model", "delta"): ("float", None, False),
    ("ramp", "p_max"): ("float", 0.0, False),
    ("ramp", "gamma"): ("float", 0.0, True),
    ("ramp", "t_c"): ("float", None, False),
    ("gate", "p0"): ("float", 0.0, True),
    ("solver", "rtol"): ("float", 0.0, True),
    ("solver", "atol"): ("float", 0.0, True),
    ("prepare", "t_start"): ("float", None, False),
    ("prepare", "t_end"): ("float", None, False),
    ("prepare", "samples"): ("int", 2, False),
    ("prepare", "x0"): ("float", None, False),
    ("branches", "t_start"): ("float", None, False),
    ("branches", "t_end"): ("float", None, False),
    ("branches", "samples"): ("int", 2, False),
    ("branches", "T"): ("float?", None, False),
    ("branches", "a3_init"): ("float", None, False),
    ("branches", "w_star"): ("float?", 0.0, True),
    ("branches", "x0_red"): ("float", 0.0, True),
    ("skeleton", "points"): ("int", 3, False),
    ("skeleton", "extent"): ("float", 0.0, True),
    ("skeleton", "grid"): ("int", 2, False),
    ("melnikov", "sigma"): ("float", 0.0, True),
    ("melnikov", "t0_points"): ("int", 3, False),
    ("threshold", "sigma_min"): ("float", 0.0, True),
    ("threshold", "sigma_max"): ("float", 0.0, True),
    ("threshold", "sigma_points"): ("int", 1, False),
    ("threshold", "t0_points"): ("int", 3, False),
    ("transport", "A"): ("float", 0.0, False),
    ("transport", "sigma"): ("float", 0.0, True),
    ("transport", "n"): ("int", 1, False),
    ("transport", "radius"): ("float", 0.0, False),
    ("transport", "t_final"): ("float", 0.0, True),
}


def _check_number(path, value, kind, lower, strict):
    if kind.endswith("?") and value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if kind.startswith("int"):
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(path, f"expected an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(path, "must be finite")
    if lower is not None:
        if strict and not value > lower:
            raise ConfigError(path, f"must be > {lower}, got {value}")
        if not strict and not value >= lower:
            raise ConfigError(path, f"must be >= {lower}, got {value}")
    return value


def _number_list(path, values, allow_none=False, positive=False):
    if not isinstance(values, list) or not values:
        raise ConfigError(path, "expected a non-empty list")
    out = []
    for i, v in enumerate(values):
        if v is None and allow_none:
            out.append(None)
            continue
        out.append(_check_number(f"{path}[{i}]", v, "float", 0.0 if positive else None, positive))
    return out


def validate(cfg: dict) -> dict:
    """Type- and range-check a merged config in place; returns it."""
    for section, body in cfg.items():
        if section not in DEFAULTS:
            raise ConfigError(section, "unknown section")
        if not isinstance(body, dict):
            raise ConfigError(section, "expected an object")
        for key in body:
            if key not in DEFAULTS[section]:
                raise ConfigError(f"{section}.{key}", "unknown field")
    for (section, key), (kind, lower, strict) in _RULES.items():
        cfg[section][key] = _check_number(f"{section}.{key}", cfg[section][key], kind, lower, strict)
    method = cfg["solver"]["method"]
    if method not in METHODS:
        raise ConfigError("solver.method", f"must be one of {list(METHODS)}, got {method!r}")
    for section in ("prepare", "branches"):
        if not cfg[section]["t_end"] > cfg[section]["t_start"]:
            raise ConfigError(f"{section}.t_end", "must exceed t_start")
    cfg["prepare"]["gamma_sweep"] = _number_list("prepare.gamma_sweep",
                                                 cfg["prepare"]["gamma_sweep"], positive=True)
    cfg["branches"]["w_star_sweep"] = _number_list("branches.w_star_sweep",
                                                   cfg["branches"]["w_star_sweep"],
                                                   allow_none=True, positive=True)
    cfg["melnikov"]["amplitudes"] = _number_list("melnikov.amplitudes",
                                                 cfg["melnikov"]["amplitudes"])
    if any(a < 0 for a in cfg["melnikov"]["amplitudes"]):
        raise ConfigError("melnikov.amplitudes", "amplitudes must be >= 0")
    if not cfg["threshold"]["sigma_max"] >= cfg["threshold"]["sigma_min"]:
        raise ConfigError("threshold.sigma_max", "must be >= sigma_min")
    center = cfg["transport"]["center"]
    if center is not None:
        if not (isinstance(center, list) and len(center) == 2):
            raise ConfigError("transport.center", "expected [x, y] or null")
        cfg["transport"]["center"] = [_check_number(f"transport.center[{i}]", c, "float", None,
                                                    False) for i, c in enumerate(center)]
    return cfg


def merge(base: dict, override: dict, prefix: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        path = f"{prefix}{key}"
        if isinstance(value, dict):
            if key not in out or not isinstance(out[key], dict):
                raise ConfigError(path, "unknown section")
            out[key] = merge(out[key], value, path + ".")
        else:
            out[key] = value
    return out


def load(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then the JSON file, then command-line overrides; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except FileNotFoundError:
            raise ConfigError("--config", f"no such file: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("--config", f"invalid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("--config", "top level must be an object")
        cfg = merge(cfg, data)
    if overrides:
        cfg = merge(cfg, overrides)
    return validate(cfg)


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def ramp_params(cfg: dict, gamma: float | None = None) -> ModelParams:
    m, r = cfg["model"], cfg["ramp"]
    return ModelParams(m["kappa"], m["K"], m["delta"],
                       Logistic(r["p_max"], r["gamma"] if gamma is None else gamma, r["t_c"]))


def constant_params(cfg: dict) -> ModelParams:
    m = cfg["model"]
    return ModelParams(m["kappa"], m["K"], m["delta"], Constant(cfg["gate"]["p0"]))


def solver_settings(cfg: dict) -> SolverSettings:
    s = cfg["solver"]
    return SolverSettings(rtol=s["rtol"], atol=s["atol"], method=s["method"])
