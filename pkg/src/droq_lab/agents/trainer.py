from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..autodiff import Adam
from ..envs import make_env
from ..harness.metrics import MetricsRecord, estimate_bias, evaluate_return, q_stats
from ..policy import SquashedGaussianPolicy, Temperature
from ..q_ensemble import QEnsemble, QNetConfig
from ..replay import ReplayBuffer
from ..rng import RandomStream
from .config import TrainerConfig
from .updates import (
    UpdateStreams,
    compute_target,
    policy_update_step,
    q_update_step,
)


@dataclass
class Counters:
    env_steps: int = 0
    q_targets: int = 0
    q_updates: int = 0
    polyak_updates: int = 0
    policy_updates: int = 0


@dataclass
class EpochAccumulator:
    """Per-update Q statistics and loop timings collected over one epoch."""

    q_stats: list = field(default_factory=list)
    loop_seconds: list = field(default_factory=list)
    qblock_seconds: list = field(default_factory=list)


class Trainer:
    """One agent (policy, Q ensemble, temperature, replay buffer) and its update loop."""

    def __init__(self, config: TrainerConfig):
        self.config = config
        self.variant = config.resolved_variant()
        self.env = make_env(config.env, **config.env_kwargs)
        spec = self.env.spec
        root = RandomStream(config.seed)
        self.root = root
        self.qnet_config = QNetConfig(
            obs_dim=spec.obs_dim, act_dim=spec.act_dim, hidden_width=config.hidden_width,
            hidden_layers=config.hidden_layers, dropout_rate=self.variant.dropout_rate,
            normalization=self.variant.normalization,
            dropout_placement=self.variant.dropout_placement,
        )
        self.policy = SquashedGaussianPolicy(
            spec.obs_dim, spec.act_dim, config.hidden_width, config.hidden_layers,
            rng=root.child("init-policy"),
        )
        self.ensemble = QEnsemble(self.qnet_config, self.variant.K, root.child("init-q"))
        self.q_optims = [Adam.for_network(n, lr=config.lr) for n in self.ensemble.online]
        self.policy_optim = Adam.for_network(self.policy.net, lr=config.lr)
        self.temperature = Temperature(-float(spec.act_dim), lr=config.lr,
                                       init_alpha=config.init_alpha)
        self.buffer = ReplayBuffer(spec.obs_dim, spec.act_dim, config.buffer_capacity)

        self.streams = UpdateStreams.from_root(root.child("updates"))
        self.env_rng = root.child("env")
        self.act_rng = root.child("act")
        self.buffer_rng = root.child("buffer")
        self.eval_rng = root.child("eval")

        self.counters = Counters()
        self.epoch = EpochAccumulator()
        self.obs = self.env.reset(self.env_rng)
        self.last_batch = None

    @property
    def param_count(self) -> int:
        return self.ensemble.num_parameters

    @property
    def learning(self) -> bool:
        """Gradient updates start once the random-start phase is complete."""
        return self.counters.env_steps > self.config.random_starting_steps

    def act(self) -> np.ndarray:
        if self.counters.env_steps < self.config.random_starting_steps:
            return self.act_rng.uniform(-1.0, 1.0, self.env.spec.act_dim)
        action, _ = self.policy.sample(self.obs[None, :], self.act_rng)
        return action[0]

    def q_block(self) -> None:
        """G iterations of: sample batch, target, regress every member, Polyak."""
        cfg = self.config
        collect = []
        for _ in range(cfg.G):
            batch = self.buffer.sample(cfg.batch_size, self.buffer_rng)
            y = compute_target(self.variant, batch, self.ensemble, self.policy,
                               self.temperature.alpha, cfg.gamma, self.streams)
            self.counters.q_targets += 1
            losses = q_update_step(self.variant, batch, y, self.ensemble, self.q_optims,
                                   self.streams)
            self.counters.q_updates += len(losses)
            self.ensemble.polyak_update(cfg.rho)
            self.counters.polyak_updates += 1
            collect.append(_q_stats_from(losses, self.ensemble.online))
            self.last_batch = batch
        self.epoch.q_stats.extend(collect)

    def policy_step(self) -> float:
        loss = policy_update_step(self.variant, self.last_batch, self.ensemble, self.policy,
                                  self.temperature, self.policy_optim, self.streams)
        self.counters.policy_updates += 1
        return loss

    def env_step(self) -> float:
        """One outer loop iteration; returns seconds spent in the Q-update block."""
        t0 = time.perf_counter()
        action = self.act()
        next_obs, reward, terminal, truncated = self.env.step(action)
        self.buffer.push(s=self.obs, a=action, r=reward, s_next=next_obs, terminal=terminal)
        self.obs = self.env.reset(self.env_rng) if (terminal or truncated) else next_obs
        self.counters.env_steps += 1
        q_seconds = 0.0
        if self.learning:
            tq = time.perf_counter()
            self.q_block()
            q_seconds = time.perf_counter() - tq
            self.policy_step()
        if self.config.record_wall_time:
            self.epoch.loop_seconds.append(time.perf_counter() - t0)
            self.epoch.qblock_seconds.append(q_seconds)
        return q_seconds

    def take_epoch(self) -> EpochAccumulator:
        acc, self.epoch = self.epoch, EpochAccumulator()
        return acc

    def evaluate(self, eval_env, epoch_index: int) -> MetricsRecord:
        """Close the current epoch: test episodes, bias estimate and logged statistics."""
        cfg = self.config
        acc = self.take_epoch()
        avg_return, trajectories = evaluate_return(
            self.policy, eval_env, cfg.eval_episodes, self.eval_rng.child(epoch_index)
        )
        avg_bias, std_bias = estimate_bias(self.ensemble, trajectories, cfg.gamma)
        if acc.q_stats:
            stats = np.mean(np.array(acc.q_stats), axis=0)
        else:
            stats = np.full(4, np.nan)
        wall_loop = wall_q = None
        if cfg.record_wall_time and acc.loop_seconds:
            wall_loop = 1e3 * float(np.median(acc.loop_seconds))
            wall_q = 1e3 * float(np.median(acc.qblock_seconds))
        return MetricsRecord(
            env_step=self.counters.env_steps, avg_return=avg_return, avg_bias=avg_bias,
            std_bias=std_bias, q_loss_mean=float(stats[0]), q_loss_std=float(stats[1]),
            q_grad_mean=float(stats[2]), q_grad_std=float(stats[3]),
            wall_ms_per_loop=wall_loop, wall_ms_per_qupdate=wall_q,
            param_count=self.param_count,
        )

    def sections(self):
        return [("policy", self.policy.net)] + self.ensemble.sections()


def _q_stats_from(losses, nets):
    return q_stats(losses, [net.flat_grad for net in nets[: len(losses)]])


def train(config: TrainerConfig, trainer: Trainer | None = None):
    """Run the full experiment, yielding one :class:`MetricsRecord` per epoch."""
    trainer = trainer or Trainer(config)
    eval_env = make_env(config.env, **config.env_kwargs)
    epoch_index = 0
    while trainer.counters.env_steps < config.total_env_steps:
        trainer.env_step()
        steps = trainer.counters.env_steps
        if steps % config.epoch_steps == 0 or steps == config.total_env_steps:
            yield trainer.evaluate(eval_env, epoch_index)
            epoch_index += 1
