"""Configuration management for the IRS secrecy lab."""

from __future__ import annotations

import dataclasses
import os
import types
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Union, get_args, get_origin, get_type_hints

import yaml


class ConfigError(ValueError):
    """Raised for malformed, unknown or out-of-range configuration values."""


@dataclass
class RewardConfig:
    """Reward shaping of the secrecy environment."""

    secrecy_penalty: float = 1.0  # nu_s, weight of per-SU secrecy shortfall
    pu_penalty: float = 1.0  # nu_d, weight of per-PU rate shortfall
    discount: float = 0.9  # gamma_rl

    def validate(self) -> None:
        if self.secrecy_penalty < 0 or self.pu_penalty < 0:
            raise ConfigError("reward penalties must be non-negative")
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError(f"reward.discount must lie in (0, 1], got {self.discount}")


@dataclass
class TrainConfig:
    """Hyperparameters and horizon of the hierarchical D3QN-SAC agent."""

    episodes: int = 300
    steps_per_episode: int = 20
    gradient_rounds: int = 1
    batch_size: int = 64
    buffer_capacity: int = 20000
    warmup_steps: int = 64

    # D3QN (high level, options)
    d3qn_hidden: tuple[int, ...] = (128, 128, 128)
    d3qn_lr: float = 0.005
    target_sync: int = 200
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_anneal_steps: int = 10000

    # SAC (low level, continuous action)
    sac_hidden: tuple[int, ...] = (256, 256, 256)
    policy_lr: float = 0.004
    critic_lr: float = 0.004
    entropy_lr: float = 0.004
    soft_tau: float = 0.005
    sac_target_period: int = 1
    initial_alpha: float = 0.2

    def validate(self) -> None:
        if self.episodes < 0 or self.steps_per_episode < 1:
            raise ConfigError("train.episodes must be >= 0 and train.steps_per_episode >= 1")
        for name in ("gradient_rounds", "batch_size", "buffer_capacity", "target_sync",
                     "epsilon_anneal_steps", "sac_target_period"):
            if getattr(self, name) < 1:
                raise ConfigError(f"train.{name} must be >= 1")
        if self.batch_size > self.buffer_capacity:
            raise ConfigError("train.batch_size cannot exceed train.buffer_capacity")
        if not self.d3qn_hidden or not self.sac_hidden or min(self.d3qn_hidden + self.sac_hidden) < 1:
            raise ConfigError("hidden layer sizes must be positive and non-empty")
        if not 0.0 <= self.epsilon_end <= self.epsilon_start <= 1.0:
            raise ConfigError("train epsilon schedule must satisfy 0 <= end <= start <= 1")
        if not 0.0 <= self.soft_tau <= 1.0:
            raise ConfigError("train.soft_tau must lie in [0, 1]")
        if min(self.d3qn_lr, self.policy_lr, self.critic_lr, self.entropy_lr, self.initial_alpha) <= 0:
            raise ConfigError("learning rates and train.initial_alpha must be positive")


@dataclass
class AoConfig:
    """Alternating-optimization baseline settings."""

    max_outer_iterations: int = 20
    tolerance: float = 1e-4
    early_stop: bool = True
    dual_iterations: int = 30
    dual_step: float = 0.1  # s0 of the diminishing schedule s0 / sqrt(t)
    dual_tolerance: float = 1e-6  # relative change of the dual function that ends the dual loop
    sca_iterations: int = 20
    sca_inner_steps: int = 500
    sca_tolerance: float = 1e-6
    tau_grid_points: int = 50

    def validate(self) -> None:
        for name in ("max_outer_iterations", "dual_iterations", "sca_iterations",
                     "sca_inner_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"ao.{name} must be >= 1")
        if self.tau_grid_points < 2:
            raise ConfigError("ao.tau_grid_points must be >= 2")
        if min(self.tolerance, self.sca_tolerance, self.dual_tolerance, self.dual_step) <= 0:
            raise ConfigError("ao tolerances and ao.dual_step must be positive")


@dataclass
class RunConfig:
    """Main configuration container for an experiment run."""

    scenario: str = "default"  # preset name or path to a scenario document
    scenario_overrides: dict[str, Any] = field(default_factory=dict)
    schemes: tuple[str, ...] = ("proposed",)
    seeds: tuple[int, ...] = (0,)
    eval_episodes: int = 5
    final_window: int = 20
    out_dir: str = "runs"
    workers: int = 1
    timing_caps: tuple[int, ...] = (20, 40, 60)
    timing_decisions: int = 20
    record_timing: bool = False  # wall-clock decision_ms in metric rows (breaks byte reproducibility)
    train: TrainConfig = field(default_factory=TrainConfig)
    ao: AoConfig = field(default_factory=AoConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)

    def validate(self) -> None:
        from .schemes import SchemeId

        if not self.schemes:
            raise ConfigError("at least one scheme is required")
        for name in self.schemes:
            SchemeId.parse(name)
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if any(seed < 0 for seed in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if self.eval_episodes < 0 or self.final_window < 1:
            raise ConfigError("eval_episodes must be >= 0 and final_window >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.timing_caps or min(self.timing_caps) < 1 or self.timing_decisions < 1:
            raise ConfigError("timing caps and timing_decisions must be >= 1")
        self.train.validate()
        self.ao.validate()
        self.reward.validate()


def read_document(path: Path) -> dict[str, Any]:
    """Read a YAML or JSON mapping, reporting parse errors with line and column."""
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        problem = getattr(e, "problem", None) or str(e)
        if mark is not None:
            raise ConfigError(
                f"{path}: line {mark.line + 1}, column {mark.column + 1}: {problem}"
            ) from e
        raise ConfigError(f"{path}: {problem}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return data


def _coerce(value: Any, hint: Any, key: str) -> Any:
    """Convert a parsed document value to the declared field type."""
    if hint is Any:
        return value
    if dataclasses.is_dataclass(hint):
        if not isinstance(value, dict):
            raise ConfigError(f"{key} must be a mapping")
        return dataclass_from_dict(hint, value, prefix=f"{key}.")

    origin = get_origin(hint)
    args = get_args(hint)
    if origin in (Union, types.UnionType):
        if value is None and type(None) in args:
            return None
        for candidate in (a for a in args if a is not type(None)):
            try:
                return _coerce(value, candidate, key)
            except ConfigError:
                continue
        raise ConfigError(f"{key} has an invalid value: {value!r}")
    if origin is tuple:
        if not isinstance(value, (list, tuple)):
            raise ConfigError(f"{key} must be a list")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0], f"{key}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(f"{key} must have exactly {len(args)} entries")
        return tuple(_coerce(v, a, f"{key}[{i}]") for i, (v, a) in enumerate(zip(value, args)))
    if origin is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{key} must be a mapping")
        return dict(value)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key} must be true or false")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key} must be a string")
        return value
    raise ConfigError(f"{key} has unsupported type {hint!r}")


def dataclass_from_dict(cls: type, data: dict[str, Any], prefix: str = "") -> Any:
    """Build dataclass ``cls`` from ``data``; unknown keys are rejected by dotted name."""
    hints = get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in names:
            raise ConfigError(f"Unknown config key: {prefix}{key}")
        kwargs[key] = _coerce(value, hints[key], f"{prefix}{key}")
    return cls(**kwargs)


def to_plain(value: Any) -> Any:
    """Convert dataclasses and tuples into YAML-safe dicts and lists."""
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {f.name: to_plain(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    return value


def load_config(config_path: Path | None = None) -> RunConfig:
    """
    Load a run configuration from file and environment variables.

    Priority (highest to lowest):
    1. Environment variables
    2. Config file
    3. Defaults
    """
    if config_path is None:
        for candidate in [
            Path("irs-secrecy-lab.yaml"),
            Path("irs-secrecy-lab.yml"),
            Path("irs-secrecy-lab.json"),
        ]:
            if candidate.exists():
                config_path = candidate
                break

    config = RunConfig()
    if config_path is not None:
        config = dataclass_from_dict(RunConfig, read_document(config_path))

    config = _apply_env_overrides(config)
    config.validate()
    return config


def _apply_env_overrides(config: RunConfig) -> RunConfig:
    """Apply environment variable overrides to config."""
    if workers := os.getenv("IRS_LAB_WORKERS"):
        try:
            config.workers = int(workers)
        except ValueError as e:
            raise ConfigError(f"IRS_LAB_WORKERS must be an integer, got {workers!r}") from e
    if out_dir := os.getenv("IRS_LAB_OUT_DIR"):
        config.out_dir = out_dir
    return config


def save_config(config: RunConfig, path: Path) -> None:
    """Save a configuration to YAML with every default written out."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        yaml.dump(to_plain(config), f, default_flow_style=False, sort_keys=False)


def generate_sample_config() -> str:
    """Generate a sample configuration file."""
    return '''# IRS Secrecy Lab run configuration
# Copy this to irs-secrecy-lab.yaml and customize

scenario: "tiny"              # default, tiny, extended, or a path to a scenario file
scenario_overrides: {}        # e.g. {n_elements: 16}
schemes: ["proposed", "random_choice", "fixed_irs"]
seeds: [0, 1, 2, 3, 4]
eval_episodes: 5              # greedy episodes after training
final_window: 20              # episodes averaged when no eval phase is run
out_dir: "runs"               # or set IRS_LAB_OUT_DIR
workers: 1                    # parallel (scheme, seed) jobs, or set IRS_LAB_WORKERS
timing_caps: [20, 40, 60]     # AO outer iteration caps swept by `time`
timing_decisions: 20
record_timing: false          # write wall-clock decision_ms into train/compare rows

train:
  episodes: 300
  steps_per_episode: 20
  batch_size: 64
  buffer_capacity: 20000
  d3qn_hidden: [128, 128, 128]
  d3qn_lr: 0.005
  sac_hidden: [256, 256, 256]
  policy_lr: 0.004
  critic_lr: 0.004
  entropy_lr: 0.004
  target_sync: 200
  epsilon_anneal_steps: 10000

ao:
  max_outer_iterations: 20
  tolerance: 0.0001
  tau_grid_points: 50

reward:
  secrecy_penalty: 1.0
  pu_penalty: 1.0
  discount: 0.9
'''
