"""Run configuration: YAML loading, validation, env var overrides.

Defaults reproduce the reference training configuration (5,000 batches of
64 episodes, PPO hyperparameters, network sizes). Unknown keys are
rejected so typos fail fast. BIG2RL_SEED and BIG2RL_WORKERS override the
corresponding fields.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .nn import NetworkConfig
from .orchestrator import Curriculum
from .rl import PPOConfig, ValueConfig

ALGORITHMS = ("ppo", "mc_q", "sarsa", "q_learning")
CURRICULA = ("current", "checkpoint", "fixed")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    algorithm: str = "ppo"
    curriculum: Curriculum = field(default_factory=lambda: Curriculum(kind="current"))
    total_batches: int = 5000
    episodes_per_batch: int = 64
    seed: int = 0
    eval_seed: int = 1000
    output_dir: str = "runs/default"
    workers: int = 1
    deterministic: bool = True
    network: NetworkConfig = field(default_factory=NetworkConfig)
    ppo: PPOConfig = field(default_factory=PPOConfig)
    value: ValueConfig = field(default_factory=ValueConfig)
    probe_period: int = 100  # entropy probe cadence, batches
    probe_states: int = 512
    eval_period: int = 250  # evaluation snapshot cadence, batches
    eval_games: int = 1000
    checkpoint_period: int = 0  # 0 -> total_batches / 20

    def validate(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.curriculum.kind not in CURRICULA:
            raise ConfigError(f"curriculum.kind must be one of {CURRICULA}")
        if self.curriculum.kind == "fixed" and self.curriculum.opponent not in (
            "random",
            "greedy",
            "smart",
        ):
            raise ConfigError("curriculum.opponent must be random, greedy, or smart")
        if self.total_batches < 1 or self.episodes_per_batch < 1:
            raise ConfigError("total_batches and episodes_per_batch must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.ppo.entropy_beta < 0:
            raise ConfigError("ppo.entropy_beta must be >= 0")
        return self

    @property
    def effective_workers(self) -> int:
        return 1 if self.deterministic else self.workers

    @property
    def effective_checkpoint_period(self) -> int:
        if self.checkpoint_period > 0:
            return self.checkpoint_period
        return max(self.total_batches // 20, 1)

    def network_for(self) -> NetworkConfig:
        return dataclasses.replace(self.network, value_head=self.algorithm == "ppo")


def _build(cls, data: dict, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return cls(**data)


def config_from_dict(data: dict) -> RunConfig:
    data = dict(data or {})
    top_fields = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(data) - top_fields
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    kwargs = {}
    for key, value in data.items():
        if key == "curriculum":
            kwargs[key] = _build(Curriculum, value, "curriculum")
        elif key == "network":
            kwargs[key] = _build(NetworkConfig, value, "network")
        elif key == "ppo":
            kwargs[key] = _build(PPOConfig, value, "ppo")
        elif key == "value":
            kwargs[key] = _build(ValueConfig, value, "value")
        else:
            kwargs[key] = value
    cfg = RunConfig(**kwargs)
    if "BIG2RL_SEED" in os.environ:
        cfg.seed = int(os.environ["BIG2RL_SEED"])
    if "BIG2RL_WORKERS" in os.environ:
        cfg.workers = int(os.environ["BIG2RL_WORKERS"])
    return cfg.validate()


def load_config(path) -> RunConfig:
    raw = Path(path).read_text()
    try:
        data = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return config_from_dict(data)


def config_to_dict(cfg: RunConfig) -> dict:
    return dataclasses.asdict(cfg)
