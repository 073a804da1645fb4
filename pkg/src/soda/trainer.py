"""Training loop instrumented with the augmentation allocator."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from soda import hedge
from soda.augment import AugmentedSample, GeneratorSpec, generate_batch
from soda.budget import BudgetAllocation, allocate
from soda.config import TrainConfig
from soda.data import child_seeds, make_synthetic_dataset
from soda.feedback import EpochGradientAccumulator, GradientTracker, cosine_action_loss
from soda.model import ToyModel, make_optimizer, mean_jaccard


@dataclass
class EpochMetrics:
    epoch: int
    pi: np.ndarray
    losses: np.ndarray
    allocation: tuple[int, ...]
    train_loss: float
    test_jaccard: float
    discounted_cum_loss: float


@dataclass
class ExperimentState:
    config: TrainConfig
    strategy: str
    registry: list[GeneratorSpec]
    train: list
    test: list
    model: ToyModel
    optimizer: object
    allocator: hedge.AllocatorState
    trackers: list[GradientTracker]
    accumulators: list[EpochGradientAccumulator]
    aug_rng: np.random.Generator
    shuffle_rng: np.random.Generator
    epoch: int = 0
    discounted_cum_loss: float = 0.0
    # sum over optimizer steps of batch size * step gradient, last epoch only
    gradient_mass: np.ndarray | None = field(default=None, repr=False)

    @property
    def k(self) -> int:
        return len(self.registry)


def new_experiment(
    config: TrainConfig,
    registry: Sequence[GeneratorSpec],
    seed=None,
    strategy: str | None = None,
) -> ExperimentState:
    """Fresh state for one repetition.

    ``seed`` (int or SeedSequence, default ``config.seed``) is split into
    independent streams for the dataset, augmentation, shuffling and
    initialisation, so runs sharing a seed share all four.
    """
    data_ss, aug_ss, shuffle_ss, init_ss = child_seeds(config.seed if seed is None else seed, 4)
    train, test = make_synthetic_dataset(config.n_train, data_ss, n_test=config.n_test, size=config.image_size)
    model = ToyModel.init(config.filters, np.random.default_rng(init_ss))
    registry = list(registry)
    k = len(registry)
    return ExperimentState(
        config=config,
        strategy=strategy or config.strategy,
        registry=registry,
        train=train,
        test=test,
        model=model,
        optimizer=make_optimizer(config.optimizer, config.learning_rate),
        allocator=hedge.new_allocator(k, config.soda.eta, config.soda.beta),
        trackers=[GradientTracker.zeros(model.dim, config.soda.rho) for _ in range(k + 1)],
        accumulators=[EpochGradientAccumulator.zeros(model.dim) for _ in range(k + 1)],
        aug_rng=np.random.default_rng(aug_ss),
        shuffle_rng=np.random.default_rng(shuffle_ss),
    )


def policy(state: ExperimentState) -> np.ndarray:
    """Sampling proportions pi_t for the current epoch."""
    k = state.k
    if state.strategy == "soda":
        return hedge.probabilities(state.allocator)
    if state.strategy == "uniform":
        return np.full(k, 1.0 / k)
    if state.strategy == "target":
        useful = np.array([not g.is_junk for g in state.registry], dtype=float)
        if not useful.any():
            raise ValueError("target strategy needs at least one non-junk generator")
        return useful / useful.sum()
    raise ValueError(f"unknown strategy {state.strategy!r}")


def budget_for(state: ExperimentState, pi: np.ndarray) -> BudgetAllocation:
    n_a = state.config.n_a
    if state.strategy != "target":
        return allocate(pi, n_a)
    # the target policy never queries junk arms, so they get no floor sample
    used = np.flatnonzero(pi > 0)
    counts = np.zeros(len(pi), dtype=int)
    if len(used) == 1:
        counts[used[0]] = n_a
    else:
        counts[used] = allocate(pi[used], n_a).counts
    return BudgetAllocation(tuple(int(c) for c in counts), n_a)


def _train_pass(state: ExperimentState, augmented: list[AugmentedSample]) -> None:
    originals = [AugmentedSample(s.image, s.mask, source=0) for s in state.train]
    stream = originals + augmented
    order = state.shuffle_rng.permutation(len(stream))
    source_index = {0: 0, **{g.id: i + 1 for i, g in enumerate(state.registry)}}
    for acc in state.accumulators:
        acc.reset()
    mass = np.zeros(state.model.dim)
    cfg = state.config
    for start in range(0, len(stream), cfg.batch_size):
        batch = [stream[i] for i in order[start : start + cfg.batch_size]]
        _, grads = state.model.per_sample_loss_and_gradient(batch, cfg.l2_weight)
        step = grads.mean(axis=0)
        for sample, g in zip(batch, grads):
            state.accumulators[source_index[sample.source]].accumulate(g)
        mass += len(batch) * step
        state.model.theta = state.optimizer.step(state.model.theta, step)
    state.gradient_mass = mass


def action_losses(state: ExperimentState) -> np.ndarray:
    """Momentum-update every source seen this epoch and score generators against source 0.

    Generators that received no samples keep their tracker untouched and get NaN.
    """
    smoothed = []
    for acc, tracker in zip(state.accumulators, state.trackers):
        smoothed.append(tracker.update(acc.epoch_average()) if acc.count else None)
    g0 = smoothed[0]
    return np.array(
        [np.nan if gk is None else cosine_action_loss(g0, gk) for gk in smoothed[1:]]
    )


def run_epoch(state: ExperimentState) -> tuple[ExperimentState, EpochMetrics]:
    pi = policy(state)
    allocation = budget_for(state, pi)
    augmented = generate_batch(state.registry, allocation, state.train, state.aug_rng)
    _train_pass(state, augmented)
    losses = action_losses(state)
    if state.strategy == "soda":
        state.allocator = hedge.update(state.allocator, losses)

    observed = ~np.isnan(losses)
    state.discounted_cum_loss = state.config.soda.beta * state.discounted_cum_loss + float(
        np.dot(pi[observed], losses[observed])
    )
    state.epoch += 1
    metrics = EpochMetrics(
        epoch=state.epoch,
        pi=pi,
        losses=losses,
        allocation=allocation.counts,
        train_loss=state.model.loss(state.train, state.config.l2_weight),
        test_jaccard=mean_jaccard(state.model, state.test),
        discounted_cum_loss=state.discounted_cum_loss,
    )
    return state, metrics


def run(state: ExperimentState, epochs: int | None = None) -> list[EpochMetrics]:
    epochs = state.config.epochs if epochs is None else epochs
    out = []
    for _ in range(epochs):
        state, m = run_epoch(state)
        out.append(m)
    return out


def checkpoint(state: ExperimentState) -> dict:
    """Everything needed to resume ``state`` (the dataset is regenerated from the seed)."""
    return {
        "epoch": state.epoch,
        "strategy": state.strategy,
        "theta": [float(v) for v in state.model.theta],
        "optimizer": state.optimizer.state_dict(),
        "allocator": state.allocator.to_dict(),
        "trackers": [t.to_dict() for t in state.trackers],
        "rng": {
            "augmentation": state.aug_rng.bit_generator.state,
            "shuffle": state.shuffle_rng.bit_generator.state,
        },
        "discounted_cum_loss": state.discounted_cum_loss,
    }


def restore(state: ExperimentState, ckpt: dict) -> ExperimentState:
    """Load a checkpoint into a state built by :func:`new_experiment` with the same config and seed."""
    state.epoch = int(ckpt["epoch"])
    state.strategy = ckpt["strategy"]
    state.model.theta = np.asarray(ckpt["theta"], dtype=float)
    state.optimizer.load_state_dict(ckpt["optimizer"])
    state.allocator = hedge.AllocatorState.from_dict(ckpt["allocator"])
    state.trackers = [GradientTracker.from_dict(d) for d in ckpt["trackers"]]
    state.aug_rng.bit_generator.state = ckpt["rng"]["augmentation"]
    state.shuffle_rng.bit_generator.state = ckpt["rng"]["shuffle"]
    state.discounted_cum_loss = float(ckpt["discounted_cum_loss"])
    return state


def save_checkpoint(state: ExperimentState, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(checkpoint(state), fh)


def load_checkpoint(state: ExperimentState, path) -> ExperimentState:
    with open(path, encoding="utf-8") as fh:
        return restore(state, json.load(fh))
