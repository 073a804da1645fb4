"""Summary statistics for strategy comparisons."""
from __future__ import annotations

import numpy as np

from soda.trainer import EpochMetrics


def jaccard_curves(reps: list[list[EpochMetrics]]) -> np.ndarray:
    """(repetitions, epochs) array of test Jaccard."""
    return np.array([[m.test_jaccard for m in ms] for ms in reps])


def junk_suppression(reps: list[list[EpochMetrics]], junk: int, by_epoch: int) -> dict:
    """How fast a SODA run pushes arm ``junk`` (0-based) down to one sample."""
    floor_epochs = []
    for ms in reps:
        hit = [m.epoch for m in ms if m.allocation[junk] == 1]
        floor_epochs.append(hit[0] if hit else None)
    reached = sum(e is not None and e <= by_epoch for e in floor_epochs)
    return {
        "floor_epochs": floor_epochs,
        "reached_floor_by_epoch": reached,
        "repetitions": len(reps),
        "final_mean_pi_junk": float(np.mean([ms[-1].pi[junk] for ms in reps])),
    }


def strategy_ordering(results: dict[str, list[list[EpochMetrics]]], fraction: float = 0.8) -> dict:
    """SODA against uniform where uniform first reaches ``fraction`` of its final
    mean Jaccard, and SODA's final mean Jaccard against the target strategy's."""
    mean = {s: jaccard_curves(reps).mean(axis=0) for s, reps in results.items()}
    uni = mean["uniform"]
    idx = int(np.argmax(uni >= fraction * uni[-1]))
    return {
        "checkpoint_epoch": idx + 1,
        "uniform_at_checkpoint": float(uni[idx]),
        "soda_at_checkpoint": float(mean["soda"][idx]),
        "soda_final": float(mean["soda"][-1]),
        "target_final": float(mean["target"][-1]),
        "uniform_final": float(uni[-1]),
        "final_gap_to_target": float(abs(mean["soda"][-1] - mean["target"][-1])),
    }
