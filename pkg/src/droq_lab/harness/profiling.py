"""Steady-state wall-clock timing of the update loop."""

from __future__ import annotations

import statistics
import time

from threadpoolctl import threadpool_limits

from ..errors import ConfigError


def prefill(trainer) -> None:
    """Step the trainer through its random-start phase so learning is live."""
    while not trainer.learning:
        trainer.env_step()


def profile_update(trainer, warmup_loops: int = 10, timed_loops: int = 100) -> tuple[float, float]:
    """Median milliseconds per full env-step loop and per G-iteration Q-update block.

    The replay buffer is pre-filled by running the random-start phase first.
    BLAS is pinned to one thread so timings compare like with like.
    """
    if timed_loops < 1 or warmup_loops < 0:
        raise ConfigError("need timed_loops >= 1 and warmup_loops >= 0")
    with threadpool_limits(limits=1):
        prefill(trainer)
        for _ in range(warmup_loops):
            trainer.env_step()
        loops, qblocks = [], []
        for _ in range(timed_loops):
            t0 = time.perf_counter()
            q_seconds = trainer.env_step()
            loops.append(time.perf_counter() - t0)
            qblocks.append(q_seconds)
    trainer.take_epoch()
    return 1e3 * statistics.median(loops), 1e3 * statistics.median(qblocks)
