"""Scenario and experiment configuration.

Values in configuration files use the units engineers usually quote (dB,
dBm/Hz, km/h, Mb, ms).  They are converted to linear SI units exactly once,
in :func:`parse_config`; everything downstream works in linear units.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .schema import CONFIG_SCHEMA, METHODS

ENV_CONFIG = "UAVMEC_CONFIG"


class ConfigError(ValueError):
    """Raised for malformed or out-of-range configuration documents."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0


@dataclass(frozen=True)
class RadioParams:
    gamma0: float  # reference gain at 1 m, linear
    n0: float  # noise PSD, W/Hz
    b_v2lu: float
    b_lu2hu: float
    p_vehicle: float
    p_luav: float
    h1: float
    h2: float

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"radio parameter {f.name} must be > 0")
        if not self.h2 > self.h1:
            raise ConfigError("h2 must exceed h1")


@dataclass(frozen=True)
class ComputeParams:
    f_luav_cap: float  # Hz
    f_huav_cap: float  # Hz
    kappa: float
    mass_luav: float  # kg
    slot_len: float  # s
    e_quota: float  # J per slot
    s_luav_max: float  # m/s
    s_huav_max: float  # m/s

    def __post_init__(self):
        for f in fields(self):
            if not getattr(self, f.name) > 0:
                raise ConfigError(f"compute parameter {f.name} must be > 0")


@dataclass(frozen=True)
class ScenarioConfig:
    """Every physical, radio and solver constant of one simulated network.

    Defaults reproduce the paper's simulation table; radio quantities are
    stored linear (``gamma0`` unitless, ``n0`` in W/Hz).
    """

    field_size: float = 1000.0
    n_vehicles: int = 20
    luav_positions: tuple = ((250.0, 250.0), (750.0, 250.0), (750.0, 750.0), (250.0, 750.0))
    service_half_width: float = 250.0
    huav_position: tuple = (500.0, 500.0)
    vehicle_speed_range: tuple = (30.0 / 3.6, 80.0 / 3.6)  # m/s
    data_bits_range: tuple = (1e6, 1e7)
    density_range: tuple = (10.0, 100.0)
    deadline_range: tuple = (0.05, 0.2)  # s

    gamma0: float = db_to_linear(-50.0)
    n0: float = dbm_to_watt(-174.0)
    b_v2lu: float = 2e6
    b_lu2hu: float = 10e6
    p_vehicle: float = 0.5
    p_luav: float = 1.0
    h1: float = 100.0
    h2: float = 150.0

    f_luav_cap: float = 10e9
    f_huav_cap: float = 50e9
    kappa: float = 1e-27
    mass_luav: float = 4.0
    slot_len: float = 0.2
    e_quota: float = 4.5
    s_luav_max: float = 15.0
    s_huav_max: float = 15.0

    k_penalty: float = 50.0
    init_alpha: float = 0.5
    deadline_penalty: float = 1e3  # multiple of K per second of violation
    relaxed_deadline_penalty: float = 50.0  # same, for tasks whose deadline is unattainable
    dedr_epsilon: float = 0.01

    solver_tol: float = 1e-7
    sp1_rel_tol: float = 1e-4
    sp1_max_iter: int = 20
    sca_rel_tol: float = 1e-4
    sca_max_iter: int = 15
    trust_radius: float = 50.0
    bcd_rel_tol: float = 1e-3
    bcd_max_iter: int = 10

    hap_altitude: float = 20000.0
    bs_position: tuple = (500.0, 500.0)

    @property
    def n_luav(self) -> int:
        return len(self.luav_positions)

    @property
    def radio(self) -> RadioParams:
        return RadioParams(self.gamma0, self.n0, self.b_v2lu, self.b_lu2hu,
                           self.p_vehicle, self.p_luav, self.h1, self.h2)

    @property
    def compute(self) -> ComputeParams:
        return ComputeParams(self.f_luav_cap, self.f_huav_cap, self.kappa, self.mass_luav,
                             self.slot_len, self.e_quota, self.s_luav_max, self.s_huav_max)

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


@dataclass
class ExperimentConfig:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    methods: tuple = ("mtuec",)
    n_slots: int = 200
    vehicles: tuple = (20,)
    seeds: tuple = tuple(range(10))
    workers: int = 1
    out_dir: str = "results"
    emit: tuple = ("csv", "json")


def _check(path: str, value, spec: dict):
    kind = spec["type"]
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
    elif kind == "integer":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
    elif kind == "range":
        if (not isinstance(value, list) or len(value) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            raise ConfigError(f"{path}: expected [low, high]")
        if value[0] > value[1]:
            raise ConfigError(f"{path}: low exceeds high")
    elif kind == "point":
        if (not isinstance(value, list) or len(value) != 2
                or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value)):
            raise ConfigError(f"{path}: expected [x, y]")
    elif kind == "points":
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{path}: expected a non-empty list of [x, y]")
        for i, p in enumerate(value):
            _check(f"{path}[{i}]", p, {"type": "point"})
    elif kind == "int_list":
        if isinstance(value, int) and not isinstance(value, bool):
            value = [value]
        if not isinstance(value, list) or not value or any(
                isinstance(v, bool) or not isinstance(v, int) for v in value):
            raise ConfigError(f"{path}: expected a non-empty list of integers")
    elif kind == "str_list":
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, list) or not value or any(not isinstance(v, str) for v in value):
            raise ConfigError(f"{path}: expected a list of strings")
    elif kind == "string":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string")
    low = spec.get("min")
    if low is not None and kind in ("number", "integer", "range"):
        lowest = value[0] if kind == "range" else value
        strict = spec.get("exclusive_min", False)
        if (strict and not lowest > low) or (not strict and not lowest >= low):
            raise ConfigError(f"{path}: must be {'>' if strict else '>='} {low}, got {value}")
    high = spec.get("max")
    if high is not None and kind in ("number", "integer") and not value <= high:
        raise ConfigError(f"{path}: must be <= {high}, got {value}")
    choices = spec.get("choices")
    if choices is not None:
        items = value if isinstance(value, list) else [value]
        for item in items:
            if item not in choices:
                raise ConfigError(f"{path}: {item!r} not one of {sorted(choices)}")
    return value


def config_from_dict(doc: dict[str, Any]) -> ExperimentConfig:
    """Validate a configuration mapping and fill defaults.

    Keys follow :data:`uavmec.schema.CONFIG_SCHEMA`; unknown keys are
    rejected, and error messages carry the offending key path.
    """
    if not isinstance(doc, dict):
        raise ConfigError("$: configuration must be a JSON object")
    unknown = sorted(set(doc) - set(CONFIG_SCHEMA))
    if unknown:
        raise ConfigError(f"$.{unknown[0]}: unknown key")

    scen: dict[str, Any] = {}
    exp: dict[str, Any] = {}
    for key, raw in doc.items():
        spec = CONFIG_SCHEMA[key]
        value = _check(f"$.{key}", raw, spec)
        target, name = spec["target"]
        if "convert" in spec:
            value = spec["convert"](value)
        elif spec["type"] in ("range", "point"):
            value = tuple(float(v) for v in value)
        elif spec["type"] == "points":
            value = tuple(tuple(float(c) for c in p) for p in value)
        elif spec["type"] in ("int_list", "str_list"):
            value = tuple(value if isinstance(value, list) else [value])
        (scen if target == "scenario" else exp)[name] = value

    if "methods" in exp and "all" in exp["methods"]:
        exp["methods"] = METHODS
    scenario = ScenarioConfig(**scen)
    try:
        scenario.radio, scenario.compute
    except ConfigError as err:
        raise ConfigError(f"$: {err}") from None
    if "n_vehicles" in scen and "vehicles" not in exp:
        exp["vehicles"] = (scenario.n_vehicles,)
    return ExperimentConfig(scenario=scenario, **exp)


def parse_config(path: str | os.PathLike | None = None) -> ExperimentConfig:
    """Load a JSON configuration file (``None`` falls back to ``$UAVMEC_CONFIG``)."""
    if path is None:
        path = os.environ.get(ENV_CONFIG)
        if path is None:
            return ExperimentConfig()
    text = Path(path).read_text()
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON at line {err.lineno}: {err.msg}") from None
    return config_from_dict(doc)
