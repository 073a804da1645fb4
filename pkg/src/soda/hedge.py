"""Discounted HEDGE over augmentation arms.

Weights are kept as logarithms. One call to :func:`update` per epoch applies

    log_w <- beta * log_w - eta * loss

which is the exponentiated update ``w <- w**beta * exp(-eta * loss)``.
``beta = 1`` is classic HEDGE, ``beta = 0`` forgets everything but the last
loss vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class AllocatorState:
    log_weights: np.ndarray
    eta: float
    beta: float
    epoch: int = 0

    @property
    def k(self) -> int:
        return len(self.log_weights)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "eta": self.eta,
            "beta": self.beta,
            "epoch": self.epoch,
            "log_weights": [float(v) for v in self.log_weights],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AllocatorState":
        log_weights = np.asarray(d["log_weights"], dtype=float)
        if len(log_weights) != d["k"]:
            raise ValueError(f"k={d['k']} but {len(log_weights)} log-weights given")
        if not np.all(np.isfinite(log_weights)):
            raise ValueError("log-weights must be finite")
        _check_params(int(d["k"]), d["eta"], d["beta"])
        return cls(log_weights, float(d["eta"]), float(d["beta"]), int(d["epoch"]))


def _check_params(k: int, eta: float, beta: float) -> None:
    if k < 2:
        raise ValueError(f"need at least 2 arms, got k={k}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")


def new_allocator(k: int, eta: float, beta: float) -> AllocatorState:
    """All weights equal to one, i.e. log-weights zero, epoch 0."""
    _check_params(k, eta, beta)
    return AllocatorState(np.zeros(k), float(eta), float(beta), 0)


def probabilities(state: AllocatorState) -> np.ndarray:
    lw = state.log_weights
    shifted = lw - lw.max()
    w = np.exp(shifted)
    return w / w.sum()


def check_losses(losses, k: int) -> np.ndarray:
    """Validate a loss vector: length ``k`` and every entry in [0, 1]."""
    losses = np.asarray(losses, dtype=float)
    if losses.shape != (k,):
        raise ValueError(f"expected {k} losses, got shape {losses.shape}")
    # one reduction instead of two; NaN fails the comparison
    if not np.abs(losses - 0.5).max() <= 0.5:
        raise ValueError(f"losses must lie in [0, 1], got {losses}")
    return losses


def update(state: AllocatorState, losses) -> AllocatorState:
    losses = check_losses(losses, state.k)
    log_weights = state.beta * state.log_weights - state.eta * losses
    return AllocatorState(log_weights, state.eta, state.beta, state.epoch + 1)


def discounted_cumulative_loss(
    pi_history: Sequence[Sequence[float]],
    loss_history: Sequence[Sequence[float]],
    beta: float,
) -> float:
    """sum_t beta**(T-t) * <pi_t, loss_t> over a history of length T."""
    if len(pi_history) != len(loss_history):
        raise ValueError(
            f"history lengths differ: {len(pi_history)} vs {len(loss_history)}"
        )
    if len(pi_history) == 0:
        raise ValueError("empty history")
    total = 0.0
    for pi, loss in zip(pi_history, loss_history):
        total = beta * total + float(np.dot(pi, loss))
    return total
