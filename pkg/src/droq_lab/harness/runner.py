"""Run experiments end to end and write their artifacts to disk."""

from __future__ import annotations

import json
import logging
import re
from pathlib import Path

import numpy as np

from ..agents import Trainer, TrainerConfig, apply_modifiers, train
from ..autodiff import save_networks
from ..errors import ConfigError, NumericError
from .metrics import csv_header, format_csv_row, read_metrics_csv
from .plotting import write_curves

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def load_config(config, seed: int | None = None) -> TrainerConfig:
    """Accept a path, a dict or a TrainerConfig; ``seed`` overrides the config's seed."""
    if isinstance(config, TrainerConfig):
        cfg = config
    elif isinstance(config, dict):
        cfg = TrainerConfig.from_dict(config)
    else:
        cfg = TrainerConfig.from_json(config)
    if seed is not None:
        cfg = cfg.replace(seed=int(seed))
    return cfg


def _checkpoint(trainer: Trainer, out_dir: Path, epoch: int) -> None:
    ckpt_dir = out_dir / "checkpoints"
    ckpt_dir.mkdir(exist_ok=True)
    save_networks(
        ckpt_dir / f"epoch{epoch:04d}.ckpt",
        trainer.sections(),
        extra={
            "env_step": trainer.counters.env_steps,
            "log_alpha": float(trainer.temperature.log_alpha[0]),
            "variant": trainer.config.variant,
            "seed": trainer.config.seed,
        },
    )


def run_experiment(config, seed: int | None = None, out_dir=".") -> int:
    """Train one configuration and write metrics.csv, config.resolved.json,
    periodic checkpoints and curves.svg into ``out_dir``.

    Returns 0 on success, 2 for an invalid configuration and 3 when training
    diverges (non-finite loss or input).
    """
    try:
        cfg = load_config(config, seed)
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.resolved.json", "w") as fh:
        json.dump(cfg.resolved_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    status = EXIT_OK
    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", newline="") as fh:
        fh.write(csv_header() + "\n")
        trainer = Trainer(cfg)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for epoch, record in enumerate(train(cfg, trainer), start=1):
                    fh.write(format_csv_row(record) + "\n")
                    fh.flush()
                    if cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
                        _checkpoint(trainer, out, epoch)
        except NumericError as exc:
            log.error("diverged at env step %d: %s", trainer.counters.env_steps, exc)
            status = EXIT_DIVERGED
    write_curves(out / "curves.svg", {cfg.variant: read_metrics_csv(metrics_path)})
    return status


def variant_tag(variant: str) -> str:
    """File-system friendly label for a variant string."""
    return re.sub(r"[^A-Za-z0-9+@._-]", "_", variant)


def run_ablation(config, variants, seeds, out_dir) -> dict[tuple[str, int], int]:
    """Run every (variant, seed) pair into ``out_dir/<variant-tag>/seed<k>/``.

    Variants given as bare modifiers (``-DO``, ``-DO-LN``) are applied to the
    config's variant. Also writes ``metrics_<tag>_seed<k>.csv`` copies at the top
    level and a combined ``curves.svg`` of seed-averaged curves.
    """
    base = load_config(config)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    statuses = {}
    averaged = {}
    for spec in variants:
        name = apply_modifiers(base.variant, spec)
        tag = variant_tag(name)
        runs = []
        for seed in seeds:
            run_dir = out / tag / f"seed{seed}"
            try:
                cfg = base.replace(variant=name, seed=int(seed))
            except ConfigError as exc:
                log.error("invalid variant %s: %s", name, exc)
                statuses[(name, int(seed))] = EXIT_CONFIG
                continue
            status = run_experiment(cfg, out_dir=run_dir)
            statuses[(name, int(seed))] = status
            metrics = run_dir / "metrics.csv"
            if metrics.exists():
                (out / f"metrics_{tag}_seed{seed}.csv").write_bytes(metrics.read_bytes())
                runs.append(read_metrics_csv(metrics))
        if runs:
            averaged[name] = _seed_average(runs)
    write_curves(out / "curves.svg", averaged)
    return statuses


def _seed_average(runs: list[list[dict]]) -> list[dict]:
    length = min(len(r) for r in runs)
    rows = []
    for k in range(length):
        rows.append({
            "env_step": runs[0][k]["env_step"],
            "avg_return": float(np.mean([r[k]["avg_return"] for r in runs])),
            "avg_bias": float(np.mean([r[k]["avg_bias"] for r in runs])),
        })
    return rows
