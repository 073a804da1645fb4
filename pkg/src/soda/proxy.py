"""Checks of the first-order proxy against the exact loss discrepancy.

For an SGD step ``dtheta = -alpha * g_k`` the change of the training loss is
approximately ``-alpha * <grad J, g_k>``; the error of that approximation
should shrink like ``alpha**2``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from soda.augment import GeneratorSpec
from soda.feedback import exact_loss_discrepancy_oracle


def _train_loss(model, theta, dataset):
    return model.loss(dataset, theta=theta)


def proxy_errors(model, dataset, g_k: np.ndarray, alphas: Sequence[float]) -> np.ndarray:
    """|exact discrepancy - (-alpha <g0, g_k>)| for each step size."""
    _, g0 = model.loss_and_gradient(dataset)
    out = []
    for alpha in alphas:
        exact = exact_loss_discrepancy_oracle(model, dataset, [-alpha * g_k], loss_fn=_train_loss)
        out.append(abs(exact + alpha * float(g0 @ g_k)))
    return np.array(out)


def convergence_order(alphas, errors) -> float:
    """Slope of log(error) against log(alpha), least squares."""
    return float(np.polyfit(np.log(alphas), np.log(errors), 1)[0])


def sign_agreement(
    model,
    dataset,
    registry: Sequence[GeneratorSpec],
    rng: np.random.Generator,
    draws: int = 100,
    alpha: float = 1e-4,
) -> float:
    """Fraction of random single-sample augmentations where exact and proxy signs agree."""
    _, g0 = model.loss_and_gradient(dataset)
    agree = 0
    for _ in range(draws):
        spec = registry[rng.integers(len(registry))]
        base = dataset[rng.integers(len(dataset))]
        _, g_k = model.loss_and_gradient([spec.apply(base, rng)])
        exact = exact_loss_discrepancy_oracle(model, dataset, [-alpha * g_k], loss_fn=_train_loss)
        agree += np.sign(exact) == np.sign(-alpha * float(g0 @ g_k))
    return agree / draws
