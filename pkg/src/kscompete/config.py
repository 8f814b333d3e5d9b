"""Experiment specification: flat JSON config files plus command-line overrides."""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Mapping

from .model import PARAM_KEYS, ModelParams, validate_params
from .solver import Advection, Grid, Scheme, SolverConfig

OUTPUT_ENV = "KSCOMPETE_OUTPUT_DIR"
DEFAULT_OUTPUT = "output"


class Command(str, enum.Enum):
    TABLE = "table"
    BIFURCATION = "bifurcation"
    SIMULATE = "simulate"
    SWEEP = "sweep"
    ANALYZE = "analyze"


ANALYSIS_COMMANDS = (Command.TABLE, Command.BIFURCATION, Command.SWEEP)


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        self.message = message
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True)
class ExperimentSpec:
    params: ModelParams = field(default_factory=ModelParams)
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)
    command: Command = Command.TABLE
    sweep_axis: tuple[str, tuple[float, ...]] | None = None
    sweep_simulate: bool = False
    output_dir: Path = Path(DEFAULT_OUTPUT)
    emit_plots: bool = False
    kmax: int = 7
    amplitude: float = 0.01
    wavenumber: float = 2.4
    workers: int = 0


SOLVER_KEYS = tuple(f.name for f in fields(SolverConfig))
_INT_KEYS = {"snapshot_every", "series_every", "steady_window", "kmax", "workers"}
_BOOL_KEYS = {"implicit_chemotaxis", "detect_steady", "emit_plots", "sweep_simulate"}
_FLOAT_KEYS = set(PARAM_KEYS) | {"dt", "t_end", "dx", "steady_tol", "blowup_ceiling", "amplitude", "wavenumber"}
_ENUM_KEYS = {"scheme": Scheme, "advection": Advection, "command": Command}
_OTHER_KEYS = {"output_dir", "sweep_axis", "sweep_values"}
ALL_KEYS = _FLOAT_KEYS | _INT_KEYS | _BOOL_KEYS | set(_ENUM_KEYS) | _OTHER_KEYS


def _coerce(key: str, value: Any) -> Any:
    if key in _FLOAT_KEYS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if key in _INT_KEYS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if key in _BOOL_KEYS:
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true or false, got {value!r}")
        return value
    if key in _ENUM_KEYS:
        enum_type = _ENUM_KEYS[key]
        try:
            return enum_type(value)
        except ValueError:
            choices = ", ".join(m.value for m in enum_type)
            raise ConfigError(key, f"expected one of {choices}, got {value!r}") from None
    if key == "output_dir":
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a path string, got {value!r}")
        return value
    if key == "sweep_axis":
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a field name, got {value!r}")
        return value
    if key == "sweep_values":
        if not isinstance(value, list) or not value or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(key, "expected a nonempty list of numbers")
        return tuple(float(v) for v in value)
    raise ConfigError(key, "unknown key")


def read_config_file(path: str | os.PathLike) -> dict[str, Any]:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object of key-value pairs")
    return data


def load_config(path: str | os.PathLike | None = None, overrides: Mapping[str, Any] | None = None, env: Mapping[str, str] | None = None) -> ExperimentSpec:
    """Resolve a spec: defaults, then file values, then the environment, then overrides.

    The output-directory environment variable sits between the file and the
    explicit overrides.
    """
    env = os.environ if env is None else env
    raw: dict[str, Any] = {}
    if path is not None:
        raw.update(read_config_file(path))
    for key in raw:
        if key not in ALL_KEYS:
            raise ConfigError(key, "unknown key")
    if env.get(OUTPUT_ENV):
        raw["output_dir"] = env[OUTPUT_ENV]
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in ALL_KEYS:
            raise ConfigError(key, "unknown key")
        raw[key] = value
    values = {key: _coerce(key, value) for key, value in raw.items()}
    return _build(values)


def _build(values: dict[str, Any]) -> ExperimentSpec:
    params = ModelParams().with_(**{k: values[k] for k in PARAM_KEYS if k in values})
    cfg = SolverConfig(**{k: values[k] for k in SOLVER_KEYS if k in values})
    command = values.get("command", Command.TABLE)
    axis = None
    if "sweep_axis" in values or "sweep_values" in values:
        name = values.get("sweep_axis")
        vals = values.get("sweep_values")
        if name is None:
            raise ConfigError("sweep_axis", "required when sweep_values is given")
        if vals is None:
            raise ConfigError("sweep_values", "required when sweep_axis is given")
        if name not in PARAM_KEYS and name not in SOLVER_KEYS:
            raise ConfigError("sweep_axis", f"{name!r} is not a model or solver field")
        axis = (name, vals)
    if command is Command.SWEEP and axis is None:
        raise ConfigError("sweep_axis", "a sweep needs sweep_axis and sweep_values")
    spec = ExperimentSpec(
        params=params,
        solver_cfg=cfg,
        command=command,
        sweep_axis=axis,
        sweep_simulate=values.get("sweep_simulate", False),
        output_dir=Path(values.get("output_dir", DEFAULT_OUTPUT)),
        emit_plots=values.get("emit_plots", False),
        kmax=values.get("kmax", 7),
        amplitude=values.get("amplitude", 0.01),
        wavenumber=values.get("wavenumber", 2.4),
        workers=values.get("workers", 0),
    )
    validate_spec(spec)
    return spec


def validate_spec(spec: ExperimentSpec) -> None:
    res = validate_params(spec.params)
    if res.simulation:
        v = res.simulation[0]
        raise ConfigError(v.field, v.message)
    if spec.command in ANALYSIS_COMMANDS and res.equilibrium:
        v = res.equilibrium[0]
        raise ConfigError(v.field, f"{v.message} (competition condition 0 <= a1, a2 < 1)")
    try:
        grid = Grid.from_spacing(spec.params.L, spec.solver_cfg.dx) if spec.solver_cfg.dx > 0 else None
        spec.solver_cfg.validate(grid, spec.params)
    except ValueError as exc:
        key = getattr(exc, "key", "solver")
        raise ConfigError(key, str(exc)) from None
    if spec.kmax < 1:
        raise ConfigError("kmax", "must be >= 1")
    if spec.workers < 0:
        raise ConfigError("workers", "must be >= 0 (0 means all processors)")


def spec_to_dict(spec: ExperimentSpec) -> dict[str, Any]:
    """Flat dict that ``load_config`` turns back into an equal spec."""
    d: dict[str, Any] = dict(spec.params.to_dict())
    for f in fields(SolverConfig):
        val = getattr(spec.solver_cfg, f.name)
        d[f.name] = val.value if isinstance(val, enum.Enum) else val
    d["command"] = spec.command.value
    if spec.sweep_axis is not None:
        d["sweep_axis"] = spec.sweep_axis[0]
        d["sweep_values"] = list(spec.sweep_axis[1])
    d["sweep_simulate"] = spec.sweep_simulate
    d["output_dir"] = str(spec.output_dir)
    d["emit_plots"] = spec.emit_plots
    d["kmax"] = spec.kmax
    d["amplitude"] = spec.amplitude
    d["wavenumber"] = spec.wavenumber
    d["workers"] = spec.workers
    return d


def dump_config(spec: ExperimentSpec, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=2, sort_keys=True)
        fh.write("\n")


def with_axis_value(spec: ExperimentSpec, name: str, value: float) -> ExperimentSpec:
    if name in PARAM_KEYS:
        return replace(spec, params=spec.params.with_(**{name: value}))
    cast = int if name in _INT_KEYS else float
    return replace(spec, solver_cfg=spec.solver_cfg.with_(**{name: cast(value)}))
