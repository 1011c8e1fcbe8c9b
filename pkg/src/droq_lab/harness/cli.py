"""Command line entry point: ``droq-lab train|ablate|profile|plot``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from ..errors import ConfigError
from .runner import EXIT_CONFIG, EXIT_OK, load_config, run_ablation, run_experiment


def _csv_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _seed_list(text: str) -> list[int]:
    try:
        return [int(s) for s in _csv_list(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"seeds must be integers, got {text!r}") from None


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="droq-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one configuration")
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--seed", type=_u64, default=None, help="overrides the config seed")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ablate", help="run a batch of variants and seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--variants", type=_csv_list, required=True,
                   help="comma separated, e.g. DroQ,-DO,-LN,-DO-LN")
    p.add_argument("--seeds", type=_seed_list, default=[0])
    p.add_argument("--out", required=True)

    p = sub.add_parser("profile", help="steady-state timing of the update loop")
    p.add_argument("--config", required=True)
    p.add_argument("--loops", type=int, default=100, help="timed loops")
    p.add_argument("--warmup", type=int, default=10, help="untimed warmup loops")

    p = sub.add_parser("plot", help="render metrics CSV files as an SVG chart")
    p.add_argument("--csv", nargs="+", required=True)
    p.add_argument("--out", required=True)
    return parser


def _profile(args) -> int:
    from ..agents import Trainer
    from .profiling import profile_update

    cfg = load_config(args.config)
    trainer = Trainer(cfg)
    per_loop, per_q = profile_update(trainer, args.warmup, args.loops)
    print(json.dumps({
        "variant": cfg.variant, "N": trainer.variant.N, "M": trainer.variant.M, "G": cfg.G,
        "wall_ms_per_loop": per_loop, "wall_ms_per_qupdate": per_q,
        "param_count": trainer.param_count,
    }))
    return EXIT_OK


def _plot(args) -> int:
    from pathlib import Path

    from .metrics import read_metrics_csv
    from .plotting import write_curves

    runs = {Path(p).parent.name or p: read_metrics_csv(p) for p in args.csv}
    write_curves(args.out, runs)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "train":
            return run_experiment(args.config, args.seed, args.out)
        if args.command == "ablate":
            statuses = run_ablation(args.config, args.variants, args.seeds, args.out)
            for (name, seed), status in statuses.items():
                print(f"{name}\tseed={seed}\texit={status}")
            return max(statuses.values(), default=EXIT_OK)
        if args.command == "profile":
            return _profile(args)
        return _plot(args)
    except ConfigError as exc:
        print(f"droq-lab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"droq-lab: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
