"""Run configuration: a flat YAML mapping validated before any computation.

Recognized keys (everything else is rejected)::

    mode: returns            # prices | returns | synthetic
    input: data/returns.csv  # required unless mode is synthetic
    layout: long             # long (date,ticker,value) | wide (date,<tickers>...)
    networks: [pearson, kendall, tail]
    alpha_grid: [0.0, 0.5, 1.0]   # or alpha_steps: 20 for 21 equal levels
    in_months: 12
    out_months: 1
    step_months: 1
    tail_q: 0.05
    tol: 1.0e-8
    max_iter: 10000
    omega_threshold: 0.0
    out_dir: out
    jobs: 4
    seed: 0                  # synthetic mode only
    synth_assets: 126
    synth_months: 87
    synth_rho: 0.3
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from pathlib import Path

import yaml

from .backtest import DEFAULT_ALPHA_GRID, StrategySpec
from .errors import ConfigError
from .networks import KINDS


@dataclass(frozen=True)
class RunConfig:
    mode: str = "returns"
    input: str | None = None
    layout: str = "long"
    networks: tuple[str, ...] = KINDS
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    in_months: int = 12
    out_months: int = 1
    step_months: int = 1
    tail_q: float = 0.05
    tol: float = 1e-8
    max_iter: int = 10_000
    omega_threshold: float = 0.0
    out_dir: str = "out"
    jobs: int | None = None
    seed: int = 0
    synth_assets: int = 126
    synth_months: int = 87
    synth_rho: float = 0.3

    def strategy(self, kind: str) -> StrategySpec:
        return StrategySpec(
            network_kind=kind,
            alpha_grid=self.alpha_grid,
            in_months=self.in_months,
            out_months=self.out_months,
            step_months=self.step_months,
            tail_q=self.tail_q,
            tol=self.tol,
            max_iter=self.max_iter,
            omega_threshold=self.omega_threshold,
        )

    def with_overrides(self, **kwargs) -> RunConfig:
        return validate(replace(self, **{k: v for k, v in kwargs.items() if v is not None}))


_INT = ("in_months", "out_months", "step_months", "max_iter", "seed", "synth_assets", "synth_months")
_FLOAT = ("tail_q", "tol", "omega_threshold", "synth_rho")


def _as_int(key, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def _as_float(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    return float(v)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.mode not in ("prices", "returns", "synthetic"):
        raise ConfigError(f"mode must be prices, returns or synthetic, got {cfg.mode!r}")
    if cfg.mode != "synthetic" and not cfg.input:
        raise ConfigError("input is required unless mode is synthetic")
    if cfg.layout not in ("long", "wide"):
        raise ConfigError(f"layout must be long or wide, got {cfg.layout!r}")
    if not cfg.networks or any(k not in KINDS for k in cfg.networks) or len(set(cfg.networks)) != len(cfg.networks):
        raise ConfigError(f"networks must be a non-empty subset of {list(KINDS)}, got {list(cfg.networks)}")
    if cfg.jobs is not None and (isinstance(cfg.jobs, bool) or not isinstance(cfg.jobs, int) or cfg.jobs < 1):
        raise ConfigError(f"jobs must be a positive integer, got {cfg.jobs!r}")
    if cfg.tol <= 0 or cfg.max_iter < 1:
        raise ConfigError("tol must be positive and max_iter >= 1")
    if cfg.mode == "synthetic" and (cfg.synth_assets < 3 or cfg.synth_months < 14 or not 0 <= cfg.synth_rho <= 1):
        raise ConfigError("synthetic mode needs synth_assets >= 3, synth_months >= 14, 0 <= synth_rho <= 1")
    try:
        cfg.strategy(cfg.networks[0])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def from_mapping(data: dict, base_dir: Path | None = None) -> RunConfig:
    known = {f.name for f in fields(RunConfig)} | {"alpha_steps"}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    data = dict(data)
    if "alpha_steps" in data:
        if "alpha_grid" in data:
            raise ConfigError("give either alpha_grid or alpha_steps, not both")
        steps = _as_int("alpha_steps", data.pop("alpha_steps"))
        if steps < 1:
            raise ConfigError("alpha_steps must be >= 1")
        data["alpha_grid"] = tuple(i / steps for i in range(steps + 1))
    if "alpha_grid" in data:
        grid = data["alpha_grid"]
        if not isinstance(grid, (list, tuple)):
            raise ConfigError("alpha_grid must be a list of numbers")
        data["alpha_grid"] = tuple(_as_float("alpha_grid", a) for a in grid)
    if "networks" in data:
        nets = data["networks"]
        data["networks"] = (nets,) if isinstance(nets, str) else tuple(nets)
    for key in _INT:
        if key in data:
            data[key] = _as_int(key, data[key])
    for key in _FLOAT:
        if key in data:
            data[key] = _as_float(key, data[key])
    for key in ("mode", "input", "layout", "out_dir"):
        if key in data and data[key] is not None and not isinstance(data[key], str):
            raise ConfigError(f"{key} must be a string")
    if base_dir is not None and data.get("input") and not Path(data["input"]).is_absolute():
        data["input"] = str(base_dir / data["input"])
    return validate(RunConfig(**data))


def load_config(path) -> RunConfig:
    """Parse a YAML config file; relative ``input`` paths resolve against its directory."""
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values")
    return from_mapping(data, base_dir=path.parent)
