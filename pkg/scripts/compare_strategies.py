"""Paired SODA / uniform / target comparison; prints the behavioural statistics
and records them as regression baselines.

    python scripts/compare_strategies.py [configs/compare.yaml] [--write-baseline]
"""
import argparse
import json
import logging
import time
from pathlib import Path

from soda.analysis import junk_suppression, strategy_ordering
from soda.config import load
from soda.experiment import run_strategies, write_outputs

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("config", nargs="?", default=ROOT / "configs" / "compare.yaml")
    p.add_argument("--write-baseline", action="store_true")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    cfg = load(args.config)
    t0 = time.time()
    results = run_strategies(cfg, cfg.strategies)
    elapsed = time.time() - t0
    write_outputs(cfg, results, ROOT / cfg.output_dir)

    junk = next(i for i, g in enumerate(cfg.generators) if g.is_junk)
    stats = {
        "config": str(Path(args.config).name),
        "junk_suppression": junk_suppression(results["soda"], junk, by_epoch=30),
        "strategy_ordering": strategy_ordering(results),
    }
    print(json.dumps(stats, indent=2))
    print(f"{elapsed:.1f} s")
    if args.write_baseline:
        out = ROOT / "baselines" / f"{cfg.name}.json"
        out.parent.mkdir(exist_ok=True)
        out.write_text(json.dumps(stats, indent=2) + "\n")
        print(f"wrote {out}")


if __name__ == "__main__":
    main()
