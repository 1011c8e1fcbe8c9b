"""Measurement procedures: average return, normalized Q bias, Q loss/gradient statistics."""

from __future__ import annotations

import copy
import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from ..autodiff.kernels import mean_std
from ..errors import ConfigError, DegenerateNormalizerError

CSV_FIELDS = (
    "env_step", "avg_return", "avg_bias", "std_bias", "q_loss_mean", "q_loss_std",
    "q_grad_mean", "q_grad_std", "wall_ms_per_loop", "wall_ms_per_qupdate", "param_count",
)


@dataclass
class MetricsRecord:
    env_step: int
    avg_return: float
    avg_bias: float
    std_bias: float
    q_loss_mean: float
    q_loss_std: float
    q_grad_mean: float
    q_grad_std: float
    wall_ms_per_loop: float | None
    wall_ms_per_qupdate: float | None
    param_count: int


@dataclass
class EvalTrajectory:
    obs: np.ndarray       # (T, obs_dim)
    actions: np.ndarray   # (T, act_dim)
    rewards: np.ndarray   # (T,)

    def __len__(self) -> int:
        return self.rewards.shape[0]


def _run_episode(policy, env, rng) -> EvalTrajectory:
    obs = env.reset(rng)
    obs_list, act_list, rew_list = [], [], []
    while True:
        action = policy.mean_action(obs[None, :])[0]
        next_obs, reward, terminal, truncated = env.step(action)
        obs_list.append(obs)
        act_list.append(action)
        rew_list.append(reward)
        if terminal or truncated:
            break
        obs = next_obs
    return EvalTrajectory(np.array(obs_list), np.array(act_list), np.array(rew_list))


def eval_threads() -> int:
    try:
        return max(1, int(os.environ.get("DROQ_THREADS", "1")))
    except ValueError:
        return 1


def evaluate_return(policy, env, episodes: int = 10, rng=None, threads: int | None = None):
    """Mean undiscounted return over test episodes with the mean action tanh(mu).

    Each episode gets its own stream split, so results do not depend on the
    number of worker threads.
    """
    if episodes < 1:
        raise ConfigError("episodes must be >= 1")
    streams = rng.split(episodes)
    threads = eval_threads() if threads is None else threads
    if threads <= 1:
        trajectories = [_run_episode(policy, env, s) for s in streams]
    else:
        def job(s):
            worker = copy.copy(policy)
            worker.net = policy.net.clone()
            return _run_episode(worker, copy.deepcopy(env), s)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            trajectories = list(pool.map(job, streams))
    mean_return = float(np.mean([t.rewards.sum() for t in trajectories]))
    return mean_return, trajectories


def discounted_returns(rewards, gamma: float) -> np.ndarray:
    """Monte-Carlo Q estimate at every step, truncated at the episode end."""
    out = np.empty(len(rewards))
    acc = 0.0
    for t in range(len(rewards) - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        out[t] = acc
    return out


def estimate_bias(q_estimator, trajectories, gamma: float) -> tuple[float, float]:
    """Mean and std of |Q_mc(s,a) - Q_hat(s,a)| / |mean Q_mc| over all visited pairs.

    ``q_estimator`` is a Q ensemble (its online members are averaged in Eval
    mode) or any callable mapping (obs, actions) to one value per row.
    """
    trajectories = list(trajectories)
    if not trajectories or sum(len(t) for t in trajectories) == 0:
        raise ConfigError("need at least one non-empty trajectory")
    q_mc = np.concatenate([discounted_returns(t.rewards, gamma) for t in trajectories])
    obs = np.concatenate([t.obs for t in trajectories])
    act = np.concatenate([t.actions for t in trajectories])
    if hasattr(q_estimator, "q_values_eval"):
        q_hat = q_estimator.q_values_eval(obs, act).mean(axis=0)
    else:
        q_hat = np.asarray(q_estimator(obs, act), dtype=np.float64).reshape(-1)
    normalizer = float(np.mean(q_mc))
    if abs(normalizer) < 1e-9:
        raise DegenerateNormalizerError("mean Monte-Carlo Q-value is numerically zero")
    errors = np.abs(q_mc - q_hat) / abs(normalizer)
    return float(errors.mean()), float(errors.std())


def q_stats(losses, grads) -> tuple[float, float, float, float]:
    """(loss mean, loss std, grad mean, grad std) for one ensemble update.

    The gradient statistics are taken over the components of the member-averaged
    gradient (1/M) sum_i dL_i/dphi_i.
    """
    losses = np.asarray(losses, dtype=np.float64)
    if losses.size == 0:
        raise ConfigError("q_stats needs at least one member loss")
    grads = list(grads)
    avg = np.array(grads[0], dtype=np.float64, copy=True).reshape(-1)
    for g in grads[1:]:
        avg += np.reshape(g, -1)
    avg /= len(grads)
    grad_mean, grad_std = mean_std(avg)
    return float(losses.mean()), float(losses.std()), float(grad_mean), float(grad_std)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def format_csv_row(record: MetricsRecord) -> str:
    values = asdict(record)
    return ",".join(_fmt(values[name]) for name in CSV_FIELDS)


def csv_header() -> str:
    return ",".join(CSV_FIELDS)


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        text = fh.read()
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ConfigError(f"{path}: unexpected CSV header {reader.fieldnames}")
    rows = []
    for row in reader:
        parsed = {}
        for f in fields(MetricsRecord):
            raw = row[f.name]
            if raw == "":
                parsed[f.name] = None
            elif f.name in ("env_step", "param_count"):
                parsed[f.name] = int(raw)
            else:
                parsed[f.name] = float(raw)
        rows.append(parsed)
    return rows
