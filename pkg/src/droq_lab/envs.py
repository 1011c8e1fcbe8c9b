"""Desk-scale continuous-control environments.

Both environments take actions in [-1, 1]^act_dim (clamped) and never
terminate; episodes are truncated at ``max_episode_steps``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NumericError


@dataclass(frozen=True)
class EnvSpec:
    obs_dim: int
    act_dim: int
    max_episode_steps: int


def wrap_angle(theta: float) -> float:
    return ((theta + math.pi) % (2.0 * math.pi)) - math.pi


class PendulumEnv:
    """Torque-limited swing-up of a uniform rod; theta = 0 is upright."""

    max_speed = 8.0

    def __init__(self, g: float = 10.0, m: float = 1.0, l: float = 1.0, dt: float = 0.05,
                 torque_scale: float = 2.0, max_episode_steps: int = 200):
        self.g, self.m, self.l, self.dt = g, m, l, dt
        self.torque_scale = torque_scale
        self.spec = EnvSpec(obs_dim=3, act_dim=1, max_episode_steps=max_episode_steps)
        self.theta = 0.0
        self.theta_dot = 0.0
        self.t = 0

    def _obs(self) -> np.ndarray:
        return np.array([math.cos(self.theta), math.sin(self.theta), self.theta_dot])

    def reset(self, rng) -> np.ndarray:
        self.theta = float(rng.uniform(-math.pi, math.pi))
        self.theta_dot = float(rng.uniform(-1.0, 1.0))
        self.t = 0
        return self._obs()

    def set_state(self, theta: float, theta_dot: float) -> np.ndarray:
        self.theta, self.theta_dot, self.t = float(theta), float(theta_dot), 0
        return self._obs()

    def energy(self) -> float:
        # Rod about its pivot: I = m l^2 / 3, centre of mass at l / 2.
        inertia = self.m * self.l**2 / 3.0
        return 0.5 * inertia * self.theta_dot**2 + self.m * self.g * 0.5 * self.l * math.cos(self.theta)

    def step(self, action):
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.size != 1:
            raise ConfigError(f"pendulum expects a 1-D action, got {action.size} values")
        if not np.isfinite(action).all():
            raise NumericError("non-finite action")
        u = self.torque_scale * float(np.clip(action[0], -1.0, 1.0))
        th, thdot = self.theta, self.theta_dot
        reward = -(wrap_angle(th) ** 2 + 0.1 * thdot**2 + 0.001 * u**2)
        accel = 3.0 * self.g / (2.0 * self.l) * math.sin(th) + 3.0 / (self.m * self.l**2) * u
        thdot = min(max(thdot + accel * self.dt, -self.max_speed), self.max_speed)
        self.theta = th + thdot * self.dt
        self.theta_dot = thdot
        self.t += 1
        truncated = self.t >= self.spec.max_episode_steps
        return self._obs(), reward, False, truncated


class LQGEnv:
    """Scalar linear-Gaussian system x' = a x + b u + w with quadratic cost."""

    def __init__(self, a_dyn: float = 0.9, b_dyn: float = 0.5, noise_std: float = 0.1,
                 init_std: float = 0.5, action_cost: float = 0.1, max_episode_steps: int = 100):
        self.a_dyn, self.b_dyn = a_dyn, b_dyn
        self.noise_std = noise_std
        self.init_std = init_std
        self.action_cost = action_cost
        self.spec = EnvSpec(obs_dim=1, act_dim=1, max_episode_steps=max_episode_steps)
        self.x = 0.0
        self.t = 0
        self._rng = None

    def reset(self, rng) -> np.ndarray:
        self._rng = rng
        self.x = float(self.init_std * rng.normal())
        self.t = 0
        return np.array([self.x])

    def set_state(self, x: float, rng=None) -> np.ndarray:
        self.x, self.t = float(x), 0
        if rng is not None:
            self._rng = rng
        return np.array([self.x])

    def step(self, action):
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.size != 1:
            raise ConfigError(f"LQG expects a 1-D action, got {action.size} values")
        if not np.isfinite(action).all():
            raise NumericError("non-finite action")
        u = float(np.clip(action[0], -1.0, 1.0))
        x = self.x
        reward = -(x * x + self.action_cost * u * u)
        w = self.noise_std * float(self._rng.normal()) if self.noise_std > 0.0 else 0.0
        self.x = self.a_dyn * x + self.b_dyn * u + w
        self.t += 1
        truncated = self.t >= self.spec.max_episode_steps
        return np.array([self.x]), reward, False, truncated

    def value_coefficients(self, k: float, gamma: float) -> tuple[float, float]:
        """(p, c) with V(x) = -p x^2 - c for the policy u = -k x."""
        closed = self.a_dyn - self.b_dyn * k
        if abs(closed) * math.sqrt(gamma) >= 1.0:
            raise DomainError(f"closed loop |a - b k| sqrt(gamma) = {abs(closed) * math.sqrt(gamma):.4g} >= 1")
        p = (1.0 + self.action_cost * k * k) / (1.0 - gamma * closed * closed)
        c = gamma * p * self.noise_std**2 / (1.0 - gamma) if gamma < 1.0 else math.inf
        return p, c


def lqg_true_q(env: LQGEnv, k: float, gamma: float, x, u):
    """Exact discounted Q-value of the linear policy u = -k x (no action clamping)."""
    p, c = env.value_coefficients(k, gamma)
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    mean_next = env.a_dyn * x + env.b_dyn * u
    expected_v = -p * (mean_next * mean_next + env.noise_std**2) - c
    return -(x * x + env.action_cost * u * u) + gamma * expected_v


def make_env(name: str, **kwargs):
    if name == "pendulum":
        return PendulumEnv(**kwargs)
    if name == "lqg":
        return LQGEnv(**kwargs)
    raise ConfigError(f"unknown env {name!r}; expected 'pendulum' or 'lqg'")
