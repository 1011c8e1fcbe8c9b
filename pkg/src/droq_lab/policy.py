"""Tanh-squashed Gaussian policy and automatic entropy temperature."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .autodiff import Adam, Linear, Network, ReLU
from .errors import ConfigError

LOG_STD_MIN = -20.0
LOG_STD_MAX = 2.0
TANH_EPS = 1e-6
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_ACTION_BOUND = np.nextafter(1.0, 0.0)


@dataclass
class PolicySample:
    """A reparameterised draw plus what is needed to back-propagate through it."""

    action: np.ndarray       # (B, act_dim), strictly inside (-1, 1)
    log_prob: np.ndarray     # (B,)
    noise: np.ndarray        # standard-normal draws
    std: np.ndarray
    log_std_unclipped: np.ndarray


class SquashedGaussianPolicy:
    def __init__(self, obs_dim: int, act_dim: int, hidden_width: int = 256,
                 hidden_layers: int = 2, rng=None):
        if obs_dim < 1 or act_dim < 1:
            raise ConfigError("obs_dim and act_dim must be positive")
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        layers = []
        width_in = obs_dim
        for _ in range(hidden_layers):
            layers += [Linear(width_in, hidden_width), ReLU()]
            width_in = hidden_width
        layers.append(Linear(width_in, 2 * act_dim))
        self.net = Network(layers, rng=rng)

    def _heads(self, obs):
        obs = np.asarray(obs, dtype=np.float64)
        if obs.ndim == 1:
            obs = obs[None, :]
        out = self.net.forward(obs)
        return out[:, : self.act_dim], out[:, self.act_dim :]

    def mean_action(self, obs) -> np.ndarray:
        """Deterministic evaluation action tanh(mu)."""
        mu, _ = self._heads(obs)
        self.net._tape = None
        return np.clip(np.tanh(mu), -_ACTION_BOUND, _ACTION_BOUND)

    def rsample(self, obs, rng=None, noise=None) -> PolicySample:
        """Sample a = tanh(mu + sigma * xi) and its log-density.

        The network tape stays live so that :meth:`backward` can push gradients
        of a loss in (action, log_prob) back to the policy parameters.
        """
        mu, log_std_raw = self._heads(obs)
        log_std = np.clip(log_std_raw, LOG_STD_MIN, LOG_STD_MAX)
        std = np.exp(log_std)
        if noise is None:
            noise = rng.normal(mu.shape)
        u = mu + std * noise
        a = np.tanh(u)
        log_prob = np.sum(
            -0.5 * noise * noise - log_std - _HALF_LOG_2PI - np.log(1.0 - a * a + TANH_EPS),
            axis=1,
        )
        a = np.clip(a, -_ACTION_BOUND, _ACTION_BOUND)
        return PolicySample(a, log_prob, noise, std, log_std_raw)

    def sample(self, obs, rng) -> tuple[np.ndarray, np.ndarray]:
        s = self.rsample(obs, rng)
        self.net._tape = None
        return s.action, s.log_prob

    def backward(self, sample: PolicySample, grad_action, grad_log_prob) -> None:
        """Fill ``net.flat_grad`` given dL/da (B, act_dim) and dL/dlog_prob (B,)."""
        a = sample.action
        one_minus = 1.0 - a * a
        glp = np.asarray(grad_log_prob, dtype=np.float64)[:, None]
        du = grad_action * one_minus + glp * (2.0 * a * one_minus / (one_minus + TANH_EPS))
        d_log_std = du * sample.std * sample.noise - glp
        inside = (sample.log_std_unclipped >= LOG_STD_MIN) & (sample.log_std_unclipped <= LOG_STD_MAX)
        d_log_std *= inside
        self.net.backward(np.concatenate([du, d_log_std], axis=1))


class Temperature:
    """Entropy temperature alpha = exp(log_alpha), tuned toward a target entropy."""

    def __init__(self, target_entropy: float, lr: float = 3e-4, init_alpha: float = 1.0):
        if init_alpha <= 0:
            raise ConfigError("initial alpha must be positive")
        self.target_entropy = float(target_entropy)
        self.log_alpha = np.array([math.log(init_alpha)])
        self.optim = Adam(1, lr=lr)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    def gradient(self, batch_log_probs) -> float:
        # d/dlog_alpha of mean[-alpha * (log_prob + target_entropy)]
        return -self.alpha * float(np.mean(batch_log_probs) + self.target_entropy)

    def update(self, batch_log_probs) -> None:
        self.optim.step(self.log_alpha, np.array([self.gradient(batch_log_probs)]))


def update_temperature(state: Temperature, batch_log_probs) -> None:
    state.update(batch_log_probs)
