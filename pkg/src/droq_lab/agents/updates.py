"""The update steps shared by every variant (REDQ, DroQ, DroQN, SAC, DUVN, Sin-DroQ)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError, NumericError
from ..q_ensemble import QEnsemble
from ..rng import RandomStream
from .variants import (
    MIN,
    TARGET_ALL,
    TARGET_REPEAT,
    TARGET_SINGLE,
    TARGET_SUBSET,
    AlgorithmVariant,
)


@dataclass
class UpdateStreams:
    """Separate streams per source of randomness in one update.

    Keeping them apart makes variants that differ only in, say, subset sampling
    consume identical randomness everywhere else.
    """

    subset: RandomStream
    target_action: RandomStream
    target_masks: RandomStream
    current_masks: RandomStream
    policy_action: RandomStream
    policy_masks: RandomStream

    @classmethod
    def from_root(cls, root: RandomStream) -> UpdateStreams:
        return cls(**{name: root.child(name) for name in cls.__dataclass_fields__})


def _streams(rng) -> UpdateStreams:
    if isinstance(rng, UpdateStreams):
        return rng
    return UpdateStreams(*rng.split(6))


def select_subset(N: int, M: int, rng) -> np.ndarray:
    """M distinct indices drawn uniformly from range(N)."""
    if not 1 <= M <= N:
        raise ConfigError(f"need 1 <= M <= N, got M={M}, N={N}")
    if M == N:
        return np.arange(N)
    return np.sort(rng.permutation(N)[:M])


def target_members(variant: AlgorithmVariant, rng) -> list[int]:
    mode = variant.target_mode
    if mode == TARGET_ALL:
        return list(range(variant.K))
    if mode == TARGET_SUBSET:
        return [int(i) for i in select_subset(variant.K, variant.M, rng)]
    if mode == TARGET_SINGLE:
        return [0]
    if mode == TARGET_REPEAT:
        return [0] * variant.M
    raise ConfigError(f"unknown target mode {mode!r}")


def bootstrap_target(r, terminal, member_values, alpha, log_prob, gamma) -> np.ndarray:
    """y = r + gamma (1 - terminal) (min_i Q_i - alpha log pi)."""
    values = list(member_values)
    core = values[0]
    for v in values[1:]:
        core = np.minimum(core, v)
    return r + gamma * (1.0 - terminal) * (core - alpha * log_prob)


def compute_target(variant: AlgorithmVariant, batch, ensemble: QEnsemble, policy, alpha: float,
                   gamma: float, rng) -> np.ndarray:
    streams = _streams(rng)
    a_next, logp_next = policy.sample(batch.s_next, streams.target_action)
    x_next = np.concatenate([batch.s_next, a_next], axis=1)
    dropout = ensemble.config.dropout_at("TargetQ")
    values = []
    for i in target_members(variant, streams.subset):
        net = ensemble.target[i]
        values.append(net.forward(x_next, streams.target_masks, dropout=dropout)[:, 0])
        net._tape = None
    return bootstrap_target(batch.r, batch.terminal, values, alpha, logp_next, gamma)


def q_update_step(variant: AlgorithmVariant, batch, y, ensemble: QEnsemble, optimizers,
                  rng) -> list[float]:
    """One regression step on every member toward the common target ``y``.

    Returns the per-member losses; the per-member gradients are left in each
    online network's ``flat_grad``.
    """
    streams = _streams(rng)
    x = np.concatenate([batch.s, batch.a], axis=1)
    dropout = ensemble.config.dropout_at("CurrentQ")
    scale = 2.0 / len(y)
    losses = []
    for i in range(variant.K):
        net = ensemble.online[i]
        diff = net.forward(x, streams.current_masks, dropout=dropout)[:, 0] - y
        loss = float(diff @ diff) / len(y)
        if not np.isfinite(loss):
            raise NumericError(f"non-finite Q loss in member {i}")
        net.backward((scale * diff)[:, None])
        optimizers[i].step_network(net)
        losses.append(loss)
    return losses


def policy_objective_values(variant: AlgorithmVariant, member_q: np.ndarray):
    """Aggregate (K, B) member values; returns (values, d values / d member_q)."""
    if variant.policy_objective == MIN:
        idx = np.argmin(member_q, axis=0)
        weights = np.zeros_like(member_q)
        weights[idx, np.arange(member_q.shape[1])] = 1.0
        return member_q[idx, np.arange(member_q.shape[1])], weights
    k = member_q.shape[0]
    return member_q.mean(axis=0), np.full_like(member_q, 1.0 / k)


def policy_update_step(variant: AlgorithmVariant, batch, ensemble: QEnsemble, policy,
                       temperature, policy_optim, rng) -> float:
    """Gradient ascent on mean_s[Q_agg(s, a) - alpha log pi(a|s)], then tune alpha."""
    streams = _streams(rng)
    alpha = temperature.alpha
    sample = policy.rsample(batch.s, streams.policy_action)
    x = np.concatenate([batch.s, sample.action], axis=1)
    dropout = ensemble.config.dropout_at("PolicyOpt")
    member_q = np.stack([
        net.forward(x, streams.policy_masks, dropout=dropout)[:, 0] for net in ensemble.online
    ])
    q_agg, weights = policy_objective_values(variant, member_q)
    n = len(q_agg)
    loss = float(np.mean(alpha * sample.log_prob - q_agg))
    if not np.isfinite(loss):
        raise NumericError("non-finite policy loss")

    obs_dim = batch.s.shape[1]
    grad_action = np.zeros_like(sample.action)
    for i, net in enumerate(ensemble.online):
        dx = net.backward((-weights[i] / n)[:, None], param_grads=False, input_grad=True)
        grad_action += dx[:, obs_dim:]
    policy.backward(sample, grad_action, np.full(n, alpha / n))
    policy_optim.step_network(policy.net)
    temperature.update(sample.log_prob)
    return loss
