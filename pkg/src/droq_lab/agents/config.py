from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

from ..errors import ConfigError
from .variants import AlgorithmVariant, resolve_variant

DROPOUT_PRESETS = {
    # Per-environment dropout rates used for the original REDQ codebase runs.
    "Hopper": 0.0001,
    "Walker2d": 0.005,
    "Ant": 0.01,
    "Humanoid": 0.1,
}
DROPOUT_SWEEP = tuple(sorted(set(DROPOUT_PRESETS.values())))


@dataclass
class TrainerConfig:
    env: str = "pendulum"
    variant: str = "DroQ"
    N: int | None = None
    M: int | None = None
    G: int = 20
    gamma: float = 0.99
    rho: float = 0.005
    batch_size: int = 256
    dropout_rate: float | None = None
    normalization: str | None = None
    dropout_placement: list | None = None
    policy_objective: str | None = None
    lr: float = 3e-4
    buffer_capacity: int = 1_000_000
    random_starting_steps: int = 5000
    total_env_steps: int = 100_000
    epoch_steps: int = 1000
    eval_episodes: int = 10
    seed: int = 0
    hidden_width: int = 256
    hidden_layers: int = 2
    init_alpha: float = 1.0
    checkpoint_every: int = 0
    record_wall_time: bool = False
    env_kwargs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.env not in ("pendulum", "lqg"):
            raise ConfigError(f"env must be 'pendulum' or 'lqg', got {self.env!r}")
        if self.G < 1:
            raise ConfigError(f"G must be >= 1, got {self.G}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ConfigError(f"gamma must lie in [0, 1], got {self.gamma}")
        if not 0.0 <= self.rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {self.rho}")
        for name in ("batch_size", "buffer_capacity", "epoch_steps", "eval_episodes",
                     "hidden_width"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("random_starting_steps", "total_env_steps", "hidden_layers",
                     "checkpoint_every"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        self.resolved_variant()

    def resolved_variant(self) -> AlgorithmVariant:
        return resolve_variant(
            self.variant, N=self.N, M=self.M, dropout_rate=self.dropout_rate,
            normalization=self.normalization, dropout_placement=self.dropout_placement,
            policy_objective=self.policy_objective,
        )

    @classmethod
    def from_dict(cls, data: dict) -> TrainerConfig:
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> TrainerConfig:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> TrainerConfig:
        return dataclasses.replace(self, **changes)

    def resolved_dict(self) -> dict:
        v = self.resolved_variant()
        out = self.to_dict()
        out["resolved"] = {
            "base": v.base, "N": v.N, "M": v.M, "target_mode": v.target_mode,
            "policy_objective": v.policy_objective, "dropout_rate": v.dropout_rate,
            "normalization": v.normalization, "dropout_placement": sorted(v.dropout_placement),
        }
        return out
