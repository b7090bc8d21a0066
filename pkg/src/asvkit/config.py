"""JSON run configuration.

Every section is optional and falls back to the defaults of the underlying
dataclass. Unknown keys are rejected and every validation failure is
reported with the dotted path of the offending field.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path

from .autopilot import DEFAULT_PID, PidGains
from .rigid_body import VesselParams
from .simulator import AutopilotConfig, Disturbance, SimConfig
from .telemetry import SensorModel

SCHEMA_VERSION = 1
ENV_VAR = "ASV_SIM_CONFIG"
SECTIONS = {"schema_version", "vessel", "sim", "pid", "autopilot", "sensors", "paths"}


class ConfigError(ValueError):
    pass


def data_path(name: str) -> Path:
    return Path(str(resources.files("asvkit").joinpath("data", name)))


@dataclass
class Paths:
    field: Path = dc_field(default_factory=lambda: data_path("demo_field.csv"))
    mission: Path = dc_field(default_factory=lambda: data_path("demo_mission.json"))
    out: Path = Path("out")


@dataclass
class Config:
    vessel: VesselParams = dc_field(default_factory=VesselParams)
    sim: SimConfig = dc_field(default_factory=SimConfig)
    pid: PidGains = DEFAULT_PID
    autopilot: AutopilotConfig = dc_field(default_factory=AutopilotConfig)
    sensors: SensorModel = dc_field(default_factory=SensorModel)
    sample_interval: float = 1.0
    paths: Paths = dc_field(default_factory=Paths)


def _check_keys(data, cls, where: str, extra: set[str] = frozenset()) -> dict:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object, got {type(data).__name__}")
    allowed = {f.name for f in dataclasses.fields(cls)} | set(extra)
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    return dict(data)


def _build(cls, data, where: str):
    data = _check_keys(data, cls, where)
    for k, v in data.items():
        if isinstance(v, bool) and cls is not AutopilotConfig:
            raise ConfigError(f"{where}.{k}: expected a number, got a boolean")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _resolve(base: Path | None, value, where: str) -> Path:
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a path string")
    p = Path(value)
    return base / p if base is not None and not p.is_absolute() else p


def config_from_dict(doc: dict, base: Path | None = None, check_files: bool = True) -> Config:
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    unknown = set(doc) - SECTIONS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r} (expected {SCHEMA_VERSION})")

    cfg = Config()
    if "vessel" in doc:
        cfg.vessel = _build(VesselParams, doc["vessel"], "vessel")
    if "sim" in doc:
        sim = _check_keys(doc["sim"], SimConfig, "sim")
        dist = sim.get("disturbance")
        if dist is not None:
            sim["disturbance"] = _build(Disturbance, dist, "sim.disturbance")
        if "seed" in sim and (not isinstance(sim["seed"], int) or isinstance(sim["seed"], bool) or sim["seed"] < 0):
            raise ConfigError("sim.seed: expected a non-negative integer")
        try:
            cfg.sim = SimConfig(**sim)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"sim: {exc}") from None
    if "pid" in doc:
        cfg.pid = _build(PidGains, doc["pid"], "pid")
    if "autopilot" in doc:
        ap = _check_keys(doc["autopilot"], AutopilotConfig, "autopilot")
        if "gains" in ap:
            ap["gains"] = _build(PidGains, ap["gains"], "autopilot.gains")
        if ap.get("moment_form", "conventional") not in ("paper", "conventional"):
            raise ConfigError("autopilot.moment_form: expected 'paper' or 'conventional'")
        try:
            cfg.autopilot = AutopilotConfig(**ap)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"autopilot: {exc}") from None
    if "sensors" in doc:
        sensors = _check_keys(doc["sensors"], SensorModel, "sensors", extra={"sample_interval"})
        interval = sensors.pop("sample_interval", cfg.sample_interval)
        if not isinstance(interval, (int, float)) or not interval > 0:
            raise ConfigError("sensors.sample_interval: must be a number > 0")
        cfg.sample_interval = float(interval)
        cfg.sensors = _build(SensorModel, sensors, "sensors")
    paths = doc.get("paths", {})
    _check_keys(paths, Paths, "paths")
    if "field" in paths:
        cfg.paths.field = _resolve(base, paths["field"], "paths.field")
    if "mission" in paths:
        cfg.paths.mission = _resolve(base, paths["mission"], "paths.mission")
    if "out" in paths:
        cfg.paths.out = _resolve(base, paths["out"], "paths.out")
    if check_files:
        for name in ("field", "mission"):
            p = getattr(cfg.paths, name)
            if not Path(p).is_file():
                raise ConfigError(f"paths.{name}: file not found: {p}")
    return cfg


def load_config(path: str | Path | None = None, check_files: bool = True) -> Config:
    """Load a config file, falling back to $ASV_SIM_CONFIG, then to built-in defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR) or None
    if path is None:
        return config_from_dict({}, check_files=check_files)
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(doc, base=path.parent, check_files=check_files)
