"""Run configuration: JSON file plus ``--set key=value`` overrides."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .model import LambdaParams
from .quantum_sim.operators import RECOIL_MODELS

LAYERS = ("spectrum", "rate", "master", "mc")
SWEEPABLE = tuple(f.name for f in fields(LambdaParams)) + ("delta",)


class ConfigError(ValueError):
    pass


@dataclass
class SweepSpec:
    variable: str
    start: float
    stop: float
    n_points: int = 101
    scale: str = "linear"
    diverge_threshold: float = 1.0

    def __post_init__(self):
        if self.variable not in SWEEPABLE:
            raise ConfigError(f"sweep variable {self.variable!r} is not a parameter (choose from {SWEEPABLE})")
        if self.n_points < 1:
            raise ConfigError("sweep.n_points must be >= 1")
        if self.scale not in ("linear", "log"):
            raise ConfigError("sweep.scale must be 'linear' or 'log'")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log sweep needs positive bounds")

    def values(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([float(self.start)])
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.n_points)
        return np.linspace(self.start, self.stop, self.n_points)


@dataclass
class SimConfig:
    n_max: int = 35
    ld_order: int | str = 2
    recoil_model: str = "lamb-dicke-2nd"
    n_traj: int = 500
    seed: int = 12345
    t_end: float = 1.5e5
    n_times: int = 251
    initial_n_mean: float = 2.0
    method: str = "auto"

    def __post_init__(self):
        if self.t_end <= 0:
            raise ConfigError("sim.t_end must be > 0")
        if self.n_times < 2:
            raise ConfigError("sim.n_times must be >= 2")
        if self.n_traj < 1:
            raise ConfigError("sim.n_traj must be >= 1")
        if self.n_max < 1:
            raise ConfigError("sim.n_max must be >= 1")
        if self.ld_order not in (1, 2, "exact"):
            raise ConfigError("sim.ld_order must be 1, 2 or 'exact'")
        if self.recoil_model not in RECOIL_MODELS:
            raise ConfigError(f"sim.recoil_model must be one of {RECOIL_MODELS}")
        if self.initial_n_mean < 0:
            raise ConfigError("sim.initial_n_mean must be >= 0")

    def t_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_times)


@dataclass
class OutputSpec:
    path: str | None = None
    format: str = "csv"

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")


@dataclass
class RunConfig:
    params: LambdaParams = field(default_factory=LambdaParams)
    layer: str = "rate"
    sweep: SweepSpec | None = None
    sim: SimConfig = field(default_factory=SimConfig)
    output: OutputSpec = field(default_factory=OutputSpec)

    def __post_init__(self):
        if self.layer not in LAYERS:
            raise ConfigError(f"layer must be one of {LAYERS}")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "layer": self.layer,
            "sweep": None if self.sweep is None else asdict(self.sweep),
            "sim": asdict(self.sim),
            "output": asdict(self.output),
        }


def _coerce(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _section_keys(cls) -> set[str]:
    return {f.name for f in fields(cls)}


def apply_override(data: dict, assignment: str) -> None:
    """Apply one ``key=value`` override to a raw config dict in place.

    Keys are dotted (``sim.n_traj``) or bare; a bare key is looked up in
    params, then sim, then the top level.
    """
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not key=value")
    key, text = assignment.split("=", 1)
    key = key.strip()
    value = _coerce(text.strip())
    if "." in key:
        section, name = key.split(".", 1)
        if section not in ("params", "sim", "sweep", "output"):
            raise ConfigError(f"unknown config section {section!r}")
        target = data.setdefault(section, {}) or {}
        data[section] = target
        target[name] = value
        return
    if key in _section_keys(LambdaParams):
        data.setdefault("params", {})[key] = value
    elif key in _section_keys(SimConfig):
        data.setdefault("sim", {})[key] = value
    elif key == "layer":
        data["layer"] = value
    else:
        raise ConfigError(f"unknown config key {key!r}")


def build_config(data: dict) -> RunConfig:
    unknown = set(data) - {"params", "layer", "sweep", "sim", "output"}
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    try:
        params = LambdaParams.from_dict(data.get("params") or {})
        sweep = data.get("sweep")
        sim = data.get("sim") or {}
        out = data.get("output") or {}
        for section, cls, raw in (("sim", SimConfig, sim), ("output", OutputSpec, out)):
            bad = set(raw) - _section_keys(cls)
            if bad:
                raise ConfigError(f"unknown {section} keys {sorted(bad)}")
        if sweep:
            bad = set(sweep) - _section_keys(SweepSpec)
            if bad:
                raise ConfigError(f"unknown sweep keys {sorted(bad)}")
        return RunConfig(
            params=params,
            layer=data.get("layer", "rate"),
            sweep=SweepSpec(**sweep) if sweep else None,
            sim=SimConfig(**sim),
            output=OutputSpec(**out),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None, overrides=()) -> RunConfig:
    data: dict = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be an object")
        if "params" not in data and set(data) <= _section_keys(LambdaParams):
            data = {"params": data}  # bare parameter file
    for assignment in overrides:
        apply_override(data, assignment)
    return build_config(data)
