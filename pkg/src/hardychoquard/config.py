"""Run configuration: a YAML file with strictly checked blocks.

Required blocks are ``model`` (d, alpha, p) and ``grid`` (N, r_max, grading);
``solver``, ``dynamics``, ``datum``, ``outputs`` and ``seed`` have defaults for
numerical knobs only. Unknown keys anywhere are errors.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

__all__ = [
    "ConfigError",
    "ModelConfig",
    "GridConfig",
    "SolverConfig",
    "DynamicsConfig",
    "DatumConfig",
    "OutputConfig",
    "RunConfig",
    "load_config",
    "parse_config",
    "dump_config",
    "config_hash",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    d: int
    alpha: float
    p: float


@dataclass(frozen=True)
class GridConfig:
    N: int
    r_max: float
    grading: str = "uniform"


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    max_iter: int = 5000
    init: str = "gaussian"


@dataclass(frozen=True)
class DynamicsConfig:
    dt0: float = 1e-3
    t_end: float = 1.0
    blowup_factor: float = 1e3
    snapshot_interval: float | None = None
    adaptive: bool = True


@dataclass(frozen=True)
class DatumConfig:
    """Initial datum generator for ``simulate`` / ``classify``.

    kind: ``gaussian`` (v = amplitude exp(-r^2/(2 width^2)) exp(i chirp r^2)),
    ``ground_state`` (amplitude * Q), ``pseudoconformal`` (exact solution at
    t = 0 with blow-up time T, dilation lam, phase gamma) or ``file`` (a field
    file at ``path``).
    """

    kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    chirp: float = 0.0
    T: float = 1.0
    lam: float = 1.0
    gamma: float = 0.0
    path: str | None = None


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv",)


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    grid: GridConfig
    solver: SolverConfig = field(default_factory=SolverConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    datum: DatumConfig = field(default_factory=DatumConfig)
    outputs: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["outputs"]["formats"] = list(self.outputs.formats)
        return out


_BLOCKS = {
    "model": ModelConfig,
    "grid": GridConfig,
    "solver": SolverConfig,
    "dynamics": DynamicsConfig,
    "datum": DatumConfig,
    "outputs": OutputConfig,
}
_REQUIRED = ("model", "grid")
_DATUM_KINDS = ("gaussian", "ground_state", "pseudoconformal", "file")
_FORMATS = ("csv", "json-lines")


def _coerce(name: str, value, typ):
    """Convert ``value`` to the annotated type, refusing lossy conversions."""
    if typ in ("int", int):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{name}: expected an integer, got {value!r}")
        return value
    if typ in ("float", float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number, got {value!r}")
        return float(value)
    if typ in ("float | None",):
        return None if value is None else _coerce(name, value, float)
    if typ in ("str", str):
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string, got {value!r}")
        return value
    if typ in ("str | None",):
        return None if value is None else _coerce(name, value, str)
    if typ in ("bool", bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false, got {value!r}")
        return value
    if typ in ("tuple", tuple):
        if isinstance(value, str):
            value = [value]
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{name}: expected a list, got {value!r}")
        return tuple(value)
    raise ConfigError(f"{name}: unsupported type {typ!r}")


def _block(name: str, cls, raw) -> object:
    if not isinstance(raw, dict):
        raise ConfigError(f"block '{name}' must be a mapping, got {type(raw).__name__}")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(raw) - set(fields))
    if unknown:
        raise ConfigError(f"unknown key(s) in '{name}': {', '.join(unknown)}")
    missing = [k for k, f in fields.items() if k not in raw and f.default is dataclasses.MISSING
               and f.default_factory is dataclasses.MISSING]
    if missing:
        raise ConfigError(f"missing key(s) in '{name}': {', '.join(missing)}")
    kwargs = {k: _coerce(f"{name}.{k}", v, fields[k].type) for k, v in raw.items()}
    return cls(**kwargs)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of blocks")
    unknown = sorted(set(raw) - set(_BLOCKS) - {"seed"})
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    missing = [b for b in _REQUIRED if b not in raw]
    if missing:
        raise ConfigError(f"missing required block(s): {', '.join(missing)}")
    kwargs = {name: _block(name, cls, raw[name]) for name, cls in _BLOCKS.items() if name in raw}
    if "seed" in raw:
        kwargs["seed"] = _coerce("seed", raw["seed"], int)
    cfg = RunConfig(**kwargs)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.grid.N < 16:
        raise ConfigError(f"grid.N must be >= 16, got {cfg.grid.N}")
    if not cfg.grid.r_max > 0:
        raise ConfigError(f"grid.r_max must be positive, got {cfg.grid.r_max}")
    if cfg.datum.kind not in _DATUM_KINDS:
        raise ConfigError(f"datum.kind must be one of {', '.join(_DATUM_KINDS)}, got {cfg.datum.kind!r}")
    if cfg.datum.kind == "file" and not cfg.datum.path:
        raise ConfigError("datum.kind = file needs datum.path")
    for fmt in cfg.outputs.formats:
        if fmt not in _FORMATS:
            raise ConfigError(f"outputs.formats entries must be csv or json-lines, got {fmt!r}")
    dyn = cfg.dynamics
    if not (dyn.dt0 > 0 and dyn.t_end > 0 and dyn.blowup_factor > 1):
        raise ConfigError("dynamics needs dt0 > 0, t_end > 0 and blowup_factor > 1")
    if dyn.snapshot_interval is not None and not dyn.snapshot_interval > 0:
        raise ConfigError("dynamics.snapshot_interval must be positive")
    if not cfg.solver.tol > 0 or cfg.solver.max_iter < 1:
        raise ConfigError("solver needs tol > 0 and max_iter >= 1")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(raw)


def dump_config(cfg: RunConfig) -> str:
    """Canonical YAML form; ``parse_config(yaml.safe_load(dump_config(c))) == c``."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=True, default_flow_style=False)


def config_hash(cfg: RunConfig) -> str:
    canon = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()
