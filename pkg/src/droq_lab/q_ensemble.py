"""Ensembles of (dropout) Q-functions with Polyak-averaged target copies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autodiff import (
    BatchNorm,
    Dropout,
    GroupNorm,
    LayerNorm,
    LayerNormNoVR,
    Linear,
    Network,
    ReLU,
)
from .autodiff.kernels import polyak_update as polyak_kernel
from .errors import ConfigError

NORMALIZATIONS = ("None", "LayerNorm", "LayerNormNoVR", "BatchNorm", "GroupNorm2")
PLACEMENTS = frozenset({"TargetQ", "CurrentQ", "PolicyOpt"})

_NORM_ALIASES = {
    None: "None",
    "none": "None",
    "": "None",
    "ln": "LayerNorm",
    "layernorm": "LayerNorm",
    "lnwovr": "LayerNormNoVR",
    "layernormnovr": "LayerNormNoVR",
    "bn": "BatchNorm",
    "batchnorm": "BatchNorm",
    "gn": "GroupNorm2",
    "groupnorm": "GroupNorm2",
    "groupnorm2": "GroupNorm2",
}


def canonical_normalization(name) -> str:
    key = name.lower() if isinstance(name, str) else name
    if key not in _NORM_ALIASES:
        raise ConfigError(f"unknown normalization {name!r}; expected one of {NORMALIZATIONS}")
    return _NORM_ALIASES[key]


@dataclass(frozen=True)
class QNetConfig:
    obs_dim: int
    act_dim: int
    hidden_width: int = 256
    hidden_layers: int = 2
    dropout_rate: float = 0.0
    normalization: str = "None"
    # Alg. 2 lines 6/8/10: where dropout is sampled rather than switched off.
    dropout_placement: frozenset = field(default=PLACEMENTS)

    def __post_init__(self):
        object.__setattr__(self, "normalization", canonical_normalization(self.normalization))
        object.__setattr__(self, "dropout_placement", frozenset(self.dropout_placement))
        if self.obs_dim < 1 or self.act_dim < 1:
            raise ConfigError("obs_dim and act_dim must be positive")
        if self.hidden_width < 1 or self.hidden_layers < 0:
            raise ConfigError("invalid hidden layer shape")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        if not self.dropout_placement <= PLACEMENTS:
            raise ConfigError(f"unknown dropout placement {set(self.dropout_placement - PLACEMENTS)}")
        if self.normalization == "GroupNorm2" and self.hidden_width % 2:
            raise ConfigError("GroupNorm2 needs an even hidden width")

    @property
    def in_width(self) -> int:
        return self.obs_dim + self.act_dim

    def dropout_at(self, site: str) -> bool:
        return self.dropout_rate > 0.0 and site in self.dropout_placement


def _norm_layer(kind: str, width: int):
    if kind == "LayerNorm":
        return LayerNorm(width)
    if kind == "LayerNormNoVR":
        return LayerNormNoVR(width)
    if kind == "BatchNorm":
        return BatchNorm(width)
    if kind == "GroupNorm2":
        return GroupNorm(width, groups=2)
    return None


def build_layers(config: QNetConfig) -> list:
    """Linear -> Dropout -> Norm -> ReLU per hidden layer, then Linear -> 1."""
    layers = []
    width_in = config.in_width
    for _ in range(config.hidden_layers):
        layers.append(Linear(width_in, config.hidden_width))
        if config.dropout_rate > 0.0:
            layers.append(Dropout(config.dropout_rate))
        norm = _norm_layer(config.normalization, config.hidden_width)
        if norm is not None:
            layers.append(norm)
        layers.append(ReLU())
        width_in = config.hidden_width
    layers.append(Linear(width_in, 1))
    return layers


def build_q_network(config: QNetConfig, rng=None) -> Network:
    return Network(build_layers(config), rng=rng)


def count_parameters(config: QNetConfig, K: int = 1) -> int:
    """Trainable parameters of ``K`` online Q-networks (target copies excluded)."""
    total = 0
    width_in = config.in_width
    for _ in range(config.hidden_layers):
        total += width_in * config.hidden_width + config.hidden_width
        if config.normalization != "None":
            total += 2 * config.hidden_width
        width_in = config.hidden_width
    total += width_in + 1
    return total * K


def state_action(obs, act) -> np.ndarray:
    obs = np.asarray(obs, dtype=np.float64)
    act = np.asarray(act, dtype=np.float64)
    if obs.ndim == 1:
        obs = obs[None, :]
    if act.ndim == 1:
        act = act[None, :]
    if obs.shape[0] != act.shape[0]:
        raise ConfigError(f"batch mismatch: {obs.shape[0]} states vs {act.shape[0]} actions")
    return np.concatenate([obs, act], axis=1)


class QEnsemble:
    """``K`` online Q-networks with target copies, initialised from independent streams."""

    def __init__(self, config: QNetConfig, K: int, rng):
        if K < 1:
            raise ConfigError("ensemble size must be at least 1")
        self.config = config
        self.K = K
        self.online = [build_q_network(config, r) for r in rng.split(K)]
        self.target = [net.clone() for net in self.online]

    def __len__(self) -> int:
        return self.K

    def _net(self, which: str, i: int) -> Network:
        if not 0 <= i < self.K:
            raise ConfigError(f"member index {i} out of range for K={self.K}")
        if which == "online":
            return self.online[i]
        if which == "target":
            return self.target[i]
        raise ConfigError(f"which must be 'online' or 'target', got {which!r}")

    def q_value(self, which: str, i: int, obs, act, *, dropout_active: bool = False, rng=None) -> np.ndarray:
        x = state_action(obs, act)
        if x.shape[1] != self.config.in_width:
            raise ConfigError(
                f"state-action width {x.shape[1]} != obs_dim+act_dim {self.config.in_width}"
            )
        return self._net(which, i).forward(x, rng, dropout=dropout_active)[:, 0]

    def q_values_eval(self, obs, act) -> np.ndarray:
        """(K, batch) online Q-values in Eval mode; leaves each network's mode as it was."""
        x = state_action(obs, act)
        out = np.empty((self.K, x.shape[0]))
        for i, net in enumerate(self.online):
            mode = net.mode
            net.eval()
            out[i] = net.forward(x)[:, 0]
            net._tape = None
            net.mode = mode
        return out

    def polyak_update(self, rho: float, members=None) -> None:
        """target <- rho * target + (1 - rho) * online, element-wise."""
        if not 0.0 <= rho <= 1.0:
            raise ConfigError(f"rho must lie in [0, 1], got {rho}")
        for i in range(self.K) if members is None else members:
            polyak_kernel(self.target[i].flat, self.online[i].flat, rho)

    @property
    def num_parameters(self) -> int:
        return sum(net.num_parameters for net in self.online)

    def sections(self) -> list[tuple[str, Network]]:
        return [(f"online{i}", n) for i, n in enumerate(self.online)] + [
            (f"target{i}", n) for i, n in enumerate(self.target)
        ]
