"""Experiment configuration: YAML file plus ``key=value`` overrides.

Power-like quantities are given in dB/dBm and converted to linear units
here, once; everything downstream works in linear units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import yaml

from .errors import ConfigError, DomainError
from .geometry import SystemGeometry, db_to_linear, dbm_to_watts, effective_snr

AXES = ("snr_db", "rate_threshold", "rho", "delta")
ANALYTIC_METHODS = ("chebyshev", "adaptive-reference", "independence")
MC_METHODS = {"mc-pinching": "pinching", "mc-fixed": "fixed-antenna",
              "mc-independent": "forced-independent"}
ALL_METHODS = ANALYTIC_METHODS + tuple(MC_METHODS)
DEFAULT_METHODS = ("chebyshev", "adaptive-reference", "independence", "mc-pinching", "mc-fixed")

DEFAULTS: dict[str, Any] = {
    "seed": 2025,
    "mc_samples": 10_000,
    "rho_samples": 100_000,
    "node_count": 200,
    "workers": 1,
    "methods": list(DEFAULT_METHODS),
    "scenario": {
        "side_length_m": 20.0,
        "height_m": 5.0,
        "delta_m": 1.0,
        "snr_db": 15.0,
        "rate_threshold": 0.5,
        "rho": "estimate",
        "fixed_antenna_xy": [0.0, 0.0],
    },
    "sweep": {"axis": "snr_db", "min": 0.0, "max": 60.0, "count": 25},
}


@dataclass(frozen=True)
class Scenario:
    side_length_m: float
    height_m: float
    delta_m: float
    gamma_bar: float
    rate_threshold: float
    rho: float | None  # None: estimate from simulated pairs
    fixed_antenna_xy: tuple[float, float]

    def geometry(self, **changes) -> SystemGeometry:
        return SystemGeometry(changes.get("D", self.side_length_m),
                              changes.get("h", self.height_m),
                              changes.get("delta", self.delta_m),
                              changes.get("gamma_bar", self.gamma_bar))


@dataclass(frozen=True)
class SweepConfig:
    scenario: Scenario
    sweep_axis: str
    axis_values: tuple[float, ...]
    methods: tuple[str, ...]
    mc_samples: int
    rho_samples: int
    seed: int
    node_count: int
    workers: int


def _merge(base: dict, extra: dict) -> dict:
    out = dict(base)
    for k, v in extra.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def apply_override(raw: dict, assignment: str) -> dict:
    """Apply one ``dotted.key=value`` override; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError(assignment, "override must look like key=value")
    key, _, text = assignment.partition("=")
    path = key.strip().split(".")
    if not all(path):
        raise ConfigError(key, "empty key component")
    node = raw
    for part in path[:-1]:
        child = node.get(part)
        if not isinstance(child, dict):
            child = {}
            node[part] = child
        node = child
    node[path[-1]] = yaml.safe_load(text)
    return raw


def _number(raw: dict, key: str, path: str, *, integer: bool = False) -> float:
    val = raw.get(key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, f"expected a number, got {val!r}")
    if not math.isfinite(val):
        raise ConfigError(path, "must be finite")
    if integer:
        if int(val) != val:
            raise ConfigError(path, f"expected an integer, got {val!r}")
        return int(val)
    return float(val)


def _gamma_bar(sc: dict) -> float:
    if "snr_db" in sc and sc["snr_db"] is not None:
        return db_to_linear(_number(sc, "snr_db", "scenario.snr_db"))
    if "transmit_power_dbm" not in sc:
        raise ConfigError("scenario.snr_db", "give snr_db or transmit_power_dbm")
    ps = dbm_to_watts(_number(sc, "transmit_power_dbm", "scenario.transmit_power_dbm"))
    sc = {"noise_power_dbm": -90.0, "antenna_gain_db": 0.0, **sc}
    noise = dbm_to_watts(_number(sc, "noise_power_dbm", "scenario.noise_power_dbm"))
    eta = db_to_linear(_number(sc, "antenna_gain_db", "scenario.antenna_gain_db"))
    return effective_snr(eta, ps, noise)


def _axis_values(sw: dict) -> tuple[float, ...]:
    if "values" in sw and sw["values"] is not None:
        vals = sw["values"]
        if not isinstance(vals, list) or not vals:
            raise ConfigError("sweep.values", "expected a non-empty list")
        out = []
        for i, v in enumerate(vals):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"sweep.values[{i}]", f"expected a finite number, got {v!r}")
            out.append(float(v))
    else:
        lo = _number(sw, "min", "sweep.min")
        hi = _number(sw, "max", "sweep.max")
        count = _number(sw, "count", "sweep.count", integer=True)
        if count < 1:
            raise ConfigError("sweep.count", "must be >= 1")
        out = [lo] if count == 1 else [float(v) for v in np.linspace(lo, hi, count)]
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("sweep.values", "axis values must be strictly increasing")
    return tuple(out)


def parse_config(raw: dict) -> SweepConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a mapping")
    raw = _merge(DEFAULTS, raw)
    sc = raw["scenario"]
    if not isinstance(sc, dict):
        raise ConfigError("scenario", "expected a mapping")
    sw = raw["sweep"]
    if not isinstance(sw, dict):
        raise ConfigError("sweep", "expected a mapping")

    rho_raw = sc.get("rho")
    if rho_raw == "estimate" or rho_raw is None:
        rho = None
    else:
        rho = _number(sc, "rho", "scenario.rho")
        if not abs(rho) < 1:
            raise ConfigError("scenario.rho", "must satisfy |rho| < 1")
    xy = sc.get("fixed_antenna_xy")
    if (not isinstance(xy, (list, tuple)) or len(xy) != 2
            or not all(isinstance(v, (int, float)) and math.isfinite(v) for v in xy)):
        raise ConfigError("scenario.fixed_antenna_xy", "expected two finite numbers")

    rth = _number(sc, "rate_threshold", "scenario.rate_threshold")
    if rth < 0:
        raise ConfigError("scenario.rate_threshold", "must be >= 0")
    scenario = Scenario(
        side_length_m=_number(sc, "side_length_m", "scenario.side_length_m"),
        height_m=_number(sc, "height_m", "scenario.height_m"),
        delta_m=_number(sc, "delta_m", "scenario.delta_m"),
        gamma_bar=_gamma_bar(sc),
        rate_threshold=rth,
        rho=rho,
        fixed_antenna_xy=(float(xy[0]), float(xy[1])),
    )

    axis = sw.get("axis")
    if axis not in AXES:
        raise ConfigError("sweep.axis", f"must be one of {AXES}, got {axis!r}")
    values = _axis_values(sw)
    if axis == "rho" and any(not abs(v) < 1 for v in values):
        raise ConfigError("sweep.values", "rho values must satisfy |rho| < 1")
    if axis == "rate_threshold" and any(v < 0 for v in values):
        raise ConfigError("sweep.values", "rate thresholds must be >= 0")

    methods = raw.get("methods")
    if not isinstance(methods, list) or not methods:
        raise ConfigError("methods", "expected a non-empty list")
    for i, m in enumerate(methods):
        if m not in ALL_METHODS:
            raise ConfigError(f"methods[{i}]", f"unknown method {m!r}; choose from {ALL_METHODS}")

    cfg = SweepConfig(
        scenario=scenario,
        sweep_axis=axis,
        axis_values=values,
        methods=tuple(dict.fromkeys(methods)),
        mc_samples=_number(raw, "mc_samples", "mc_samples", integer=True),
        rho_samples=_number(raw, "rho_samples", "rho_samples", integer=True),
        seed=_number(raw, "seed", "seed", integer=True),
        node_count=_number(raw, "node_count", "node_count", integer=True),
        workers=_number(raw, "workers", "workers", integer=True),
    )
    if cfg.node_count < 1:
        raise ConfigError("node_count", "must be >= 1")
    if cfg.mc_samples < 1000:
        raise ConfigError("mc_samples", "must be >= 1000")
    if cfg.rho_samples < 100:
        raise ConfigError("rho_samples", "must be >= 100")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    return cfg


def load_config(path=None, overrides=(), **flags) -> SweepConfig:
    """Read a YAML config, apply ``--set`` overrides, then explicit flags."""
    raw: dict = {}
    if path is not None:
        with open(path) as fh:
            loaded = yaml.safe_load(fh)
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("<root>", "config file must contain a mapping")
        raw = loaded or {}
    for assignment in overrides:
        apply_override(raw, assignment)
    for key, val in flags.items():
        if val is not None:
            raw[key] = val
    return parse_config(raw)


def check_geometry(cfg: SweepConfig) -> SystemGeometry:
    """Build the scenario geometry, mapping invariant violations to config errors."""
    try:
        return cfg.scenario.geometry()
    except DomainError as exc:
        raise ConfigError("scenario", str(exc)) from exc
