"""Multi-repetition experiments and their CSV / JSON outputs."""
from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from soda.config import ExperimentConfig
from soda.data import child_seeds
from soda.trainer import EpochMetrics, new_experiment, run

log = logging.getLogger(__name__)


def csv_columns(k: int) -> list[str]:
    return (
        ["strategy", "repetition", "epoch"]
        + [f"pi_{i}" for i in range(1, k + 1)]
        + [f"loss_{i}" for i in range(1, k + 1)]
        + [f"n_{i}" for i in range(1, k + 1)]
        + ["train_loss", "test_jaccard", "discounted_cum_loss"]
    )


def metrics_row(strategy: str, repetition: int, m: EpochMetrics) -> list:
    return (
        [strategy, repetition, m.epoch]
        + [float(v) for v in m.pi]
        + [float(v) for v in m.losses]
        + [int(v) for v in m.allocation]
        + [m.train_loss, m.test_jaccard, m.discounted_cum_loss]
    )


def repetition_seeds(config: ExperimentConfig) -> list[np.random.SeedSequence]:
    """One seed per repetition, shared by every strategy (paired comparison)."""
    return child_seeds(config.train.seed, config.repetitions)


def run_strategies(
    config: ExperimentConfig, strategies: Sequence[str]
) -> dict[str, list[list[EpochMetrics]]]:
    """Metrics per strategy, per repetition, per epoch."""
    seeds = repetition_seeds(config)
    results = {}
    for strategy in strategies:
        results[strategy] = []
        for r, ss in enumerate(seeds):
            state = new_experiment(config.train, config.generators, seed=ss, strategy=strategy)
            metrics = run(state)
            log.info(
                "%s rep %d: final jaccard %.4f, allocation %s",
                strategy, r, metrics[-1].test_jaccard, metrics[-1].allocation,
            )
            results[strategy].append(metrics)
    return results


def format_csv(results: dict[str, list[list[EpochMetrics]]], k: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_columns(k))
    for strategy, reps in results.items():
        for r, metrics in enumerate(reps):
            for m in metrics:
                writer.writerow([repr(v) if isinstance(v, float) else v for v in metrics_row(strategy, r, m)])
    return buf.getvalue()


def summarize(results: dict[str, list[list[EpochMetrics]]]) -> dict:
    """Per-epoch mean/std (population) of test Jaccard across repetitions, per strategy."""
    out = {"strategies": {}}
    means = {}
    for strategy, reps in results.items():
        jac = np.array([[m.test_jaccard for m in metrics] for metrics in reps])
        means[strategy] = jac.mean(axis=0)
        out["strategies"][strategy] = {
            "mean_jaccard": [float(v) for v in jac.mean(axis=0)],
            "std_jaccard": [float(v) for v in jac.std(axis=0)],
            "final_mean_jaccard": float(jac[:, -1].mean()),
        }
    if "soda" in means and "uniform" in means:
        out["soda_minus_uniform"] = [float(v) for v in means["soda"] - means["uniform"]]
    return out


def write_outputs(config: ExperimentConfig, results, out_dir) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "metrics.csv"
    summary_path = out_dir / "summary.json"
    csv_path.write_text(format_csv(results, len(config.generators)), encoding="utf-8")
    summary = {
        "name": config.name,
        "epochs": config.train.epochs,
        "repetitions": config.repetitions,
        **summarize(results),
    }
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    (out_dir / "config.yaml").write_text(config.dumps(), encoding="utf-8")
    return csv_path, summary_path
