"""SODA learning-rate sweep over eta in {3, 4, 6, 7} (rho 0.99, beta 0.5).

    python scripts/eta_sweep.py [--repetitions 5] [--config configs/compare.yaml]
"""
import argparse
import dataclasses
from pathlib import Path

import numpy as np

from soda.analysis import jaccard_curves, junk_suppression
from soda.config import SodaParams, load
from soda.experiment import run_strategies

ROOT = Path(__file__).resolve().parents[1]


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--config", default=ROOT / "configs" / "compare.yaml")
    p.add_argument("--repetitions", type=int, default=5)
    args = p.parse_args()
    base = load(args.config)
    junk = next(i for i, g in enumerate(base.generators) if g.is_junk)
    print("eta  floor-epochs             pi_junk@end  jaccard@10  jaccard@end")
    for eta in (3.0, 4.0, 6.0, 7.0):
        soda = SodaParams(eta=eta, rho=0.99, beta=0.5)
        cfg = dataclasses.replace(base, repetitions=args.repetitions, train=dataclasses.replace(base.train, soda=soda))
        reps = run_strategies(cfg, ["soda"])["soda"]
        stats = junk_suppression(reps, junk, by_epoch=30)
        curve = jaccard_curves(reps).mean(axis=0)
        print(f"{eta:<4} {str(stats['floor_epochs']):24s} {stats['final_mean_pi_junk']:.4f}       "
              f"{curve[min(9, len(curve) - 1)]:.4f}      {curve[-1]:.4f}")


if __name__ == "__main__":
    main()
