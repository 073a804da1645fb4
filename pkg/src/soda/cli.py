"""Command line entry point: ``soda run <config>`` and ``soda compare <config>``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys

from soda import config as config_mod
from soda.experiment import run_strategies, write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
OUT_DIR_ENV = "SODA_OUT_DIR"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="soda", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("run", "run the config's single strategy"),
        ("compare", "run every listed strategy on paired seeds"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("config")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--out-dir", help=f"output directory (beats ${OUT_DIR_ENV} and the config)")
        p.add_argument("--epochs", type=int, help="override train.epochs")
        p.add_argument("--repetitions", type=int, help="override repetitions")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _apply_overrides(cfg: config_mod.ExperimentConfig, args) -> config_mod.ExperimentConfig:
    train = cfg.train
    if args.seed is not None:
        train = dataclasses.replace(train, seed=args.seed)
    if args.epochs is not None:
        train = dataclasses.replace(train, epochs=args.epochs)
    cfg = dataclasses.replace(cfg, train=train)
    if args.repetitions is not None:
        cfg = dataclasses.replace(cfg, repetitions=args.repetitions)
    out_dir = args.out_dir or os.environ.get(OUT_DIR_ENV) or cfg.output_dir
    return dataclasses.replace(cfg, output_dir=out_dir).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        cfg = _apply_overrides(config_mod.load(args.config), args)
    except config_mod.ConfigError as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME

    if args.command == "run":
        strategies = [cfg.train.strategy]
    else:
        strategies = cfg.strategies
        if len(strategies) < 2:
            print(f"config error: {args.config}: compare needs at least 2 strategies", file=sys.stderr)
            return EXIT_CONFIG

    try:
        results = run_strategies(cfg, strategies)
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    try:
        csv_path, summary_path = write_outputs(cfg, results, cfg.output_dir)
    except OSError as exc:
        print(f"I/O error: cannot write results to {cfg.output_dir}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {csv_path} and {summary_path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
