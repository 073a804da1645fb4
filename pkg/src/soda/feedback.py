"""Gradient-matching feedback for the allocator.

Each source (0 = original training data, 1..K = augmentation generators)
accumulates the gradients it produced during an epoch. The epoch averages are
smoothed across epochs with bias-corrected momentum, and the action-loss of
generator k is half of one minus the cosine between its smoothed gradient and
the one of source 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np


def _as_finite(g, dim: int | None = None) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.ndim != 1:
        raise ValueError(f"gradient must be a flat vector, got shape {g.shape}")
    if dim is not None and g.shape[0] != dim:
        raise ValueError(f"dimension mismatch: expected {dim}, got {g.shape[0]}")
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient has non-finite entries")
    return g


@dataclass
class EpochGradientAccumulator:
    """Running sum of one source's gradients within one epoch."""

    sum: np.ndarray
    count: int = 0

    @classmethod
    def zeros(cls, dim: int) -> "EpochGradientAccumulator":
        return cls(np.zeros(dim), 0)

    @property
    def dim(self) -> int:
        return self.sum.shape[0]

    def accumulate(self, gradient) -> "EpochGradientAccumulator":
        gradient = _as_finite(gradient, self.dim)
        self.sum += gradient
        self.count += 1
        return self

    def epoch_average(self) -> np.ndarray:
        if self.count == 0:
            raise ValueError("no samples for source this epoch")
        return self.sum / self.count

    def reset(self) -> None:
        self.sum[:] = 0.0
        self.count = 0


@dataclass
class GradientTracker:
    """Momentum estimate of a source's average gradient across epochs."""

    momentum: np.ndarray
    rho: float
    steps: int = 0

    def __post_init__(self):
        if not 0.0 <= self.rho < 1.0:
            raise ValueError(f"rho must lie in [0, 1), got {self.rho}")

    @classmethod
    def zeros(cls, dim: int, rho: float) -> "GradientTracker":
        return cls(np.zeros(dim), rho, 0)

    def update(self, g) -> np.ndarray:
        """Fold in this epoch's average gradient; return the bias-corrected estimate."""
        g = _as_finite(g, self.momentum.shape[0])
        self.momentum = self.rho * self.momentum + (1.0 - self.rho) * g
        self.steps += 1
        return self.estimate()

    def estimate(self) -> np.ndarray:
        if self.steps == 0:
            raise ValueError("tracker has not been updated yet")
        return self.momentum / (1.0 - self.rho**self.steps)

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "steps": self.steps,
            "momentum": [float(v) for v in self.momentum],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GradientTracker":
        return cls(np.asarray(d["momentum"], dtype=float), float(d["rho"]), int(d["steps"]))


def momentum_update(tracker: GradientTracker, g) -> tuple[GradientTracker, np.ndarray]:
    """Functional form of :meth:`GradientTracker.update` (does not touch ``tracker``)."""
    new = GradientTracker(tracker.momentum.copy(), tracker.rho, tracker.steps)
    g_tilde = new.update(g)
    return new, g_tilde


def cosine_action_loss(g0, gk, eps: float = 1e-12):
    """0.5 * (1 - cos(g0, gk)), clipped into [0, 1].

    A vector with norm below ``eps`` carries no direction; the loss is then the
    neutral 0.5. Stacked inputs of shape (n, d) give n losses, row by row.
    """
    g0 = np.asarray(g0, dtype=float)
    gk = np.asarray(gk, dtype=float)
    if g0.shape != gk.shape or g0.ndim not in (1, 2):
        raise ValueError(f"shape mismatch: {g0.shape} vs {gk.shape}")
    if not (np.all(np.isfinite(g0)) and np.all(np.isfinite(gk))):
        raise ValueError("gradient has non-finite entries")
    n0 = np.linalg.norm(g0, axis=-1)
    nk = np.linalg.norm(gk, axis=-1)
    dead = (n0 < eps) | (nk < eps)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.sum((g0 / n0[..., None]) * (gk / nk[..., None]), axis=-1)
    # rounding can push |cos| a hair above 1
    loss = 0.5 * (1.0 - np.clip(cos, -1.0, 1.0))
    loss = np.where(dead, 0.5, loss)
    return float(loss) if g0.ndim == 1 else loss


def exact_loss_discrepancy_oracle(
    model,
    dataset,
    update_steps: Sequence[np.ndarray],
    loss_fn: Callable | None = None,
) -> float:
    """Average change of the full training loss over a set of parameter steps.

    Evaluates ``mean_i [J(theta + dtheta_i) - J(theta)]`` with a complete pass
    over ``dataset`` for every step. Far too expensive for training; it exists
    to check the first-order dot-product proxy in tests.

    ``loss_fn(model, theta, dataset)`` defaults to ``model.loss(dataset, theta=theta)``.
    """
    if len(update_steps) == 0:
        raise ValueError("no parameter updates given")
    if loss_fn is None:
        def loss_fn(m, theta, data):
            return m.loss(data, theta=theta)
    theta = np.asarray(model.theta, dtype=float)
    base = loss_fn(model, theta, dataset)
    diffs = [loss_fn(model, theta + np.asarray(dt), dataset) - base for dt in update_steps]
    return float(np.mean(diffs))
