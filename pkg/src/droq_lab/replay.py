"""Fixed-capacity FIFO replay buffer with uniform sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NumericError, UsageError


@dataclass
class Transition:
    s: np.ndarray
    a: np.ndarray
    r: float
    s_next: np.ndarray
    terminal: bool = False


@dataclass
class Batch:
    s: np.ndarray
    a: np.ndarray
    r: np.ndarray
    s_next: np.ndarray
    terminal: np.ndarray

    def __len__(self) -> int:
        return self.r.shape[0]


class ReplayBuffer:
    """Ring storage; once full, each push overwrites the oldest transition."""

    def __init__(self, obs_dim: int, act_dim: int, capacity: int = 1_000_000):
        if capacity < 1:
            raise ConfigError("capacity must be positive")
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.capacity = capacity
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros((capacity, act_dim))
        self.r = np.zeros(capacity)
        self.s_next = np.zeros((capacity, obs_dim))
        self.terminal = np.zeros(capacity)
        self.size = 0
        self._next = 0

    def __len__(self) -> int:
        return self.size

    def push(self, t: Transition | None = None, *, s=None, a=None, r=None, s_next=None,
             terminal=False) -> None:
        if t is not None:
            s, a, r, s_next, terminal = t.s, t.a, t.r, t.s_next, t.terminal
        s = np.asarray(s, dtype=np.float64).reshape(-1)
        a = np.asarray(a, dtype=np.float64).reshape(-1)
        s_next = np.asarray(s_next, dtype=np.float64).reshape(-1)
        if s.size != self.obs_dim or s_next.size != self.obs_dim or a.size != self.act_dim:
            raise ConfigError(
                f"transition dims (s={s.size}, a={a.size}, s'={s_next.size}) do not match "
                f"buffer (obs={self.obs_dim}, act={self.act_dim})"
            )
        if not np.isfinite(r):
            raise NumericError("non-finite reward")
        i = self._next
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s_next[i] = s_next
        self.terminal[i] = float(bool(terminal))
        self._next = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def _order(self) -> np.ndarray:
        """Storage indices from oldest to newest."""
        if self.size < self.capacity:
            return np.arange(self.size)
        return (np.arange(self.capacity) + self._next) % self.capacity

    def __iter__(self):
        for i in self._order():
            yield Transition(self.s[i].copy(), self.a[i].copy(), float(self.r[i]),
                             self.s_next[i].copy(), bool(self.terminal[i]))

    def sample_indices(self, batch_size: int, rng) -> np.ndarray:
        if self.size == 0:
            raise UsageError("cannot sample from an empty replay buffer")
        return rng.integers(0, self.size, batch_size)

    def sample(self, batch_size: int, rng) -> Batch:
        """Uniform draws with replacement over the current contents."""
        idx = self.sample_indices(batch_size, rng)
        return Batch(self.s[idx], self.a[idx], self.r[idx], self.s_next[idx], self.terminal[idx])

    def save(self, path) -> None:
        order = self._order()
        np.savez(path, s=self.s[order], a=self.a[order], r=self.r[order],
                 s_next=self.s_next[order], terminal=self.terminal[order],
                 capacity=np.array([self.capacity]))

    @classmethod
    def load(cls, path) -> ReplayBuffer:
        with np.load(path) as data:
            buf = cls(data["s"].shape[1], data["a"].shape[1], int(data["capacity"][0]))
            n = data["r"].shape[0]
            buf.s[:n] = data["s"]
            buf.a[:n] = data["a"]
            buf.r[:n] = data["r"]
            buf.s_next[:n] = data["s_next"]
            buf.terminal[:n] = data["terminal"]
        buf.size = n
        buf._next = n % buf.capacity
        return buf
