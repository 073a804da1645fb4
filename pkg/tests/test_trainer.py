import json

import numpy as np
import pytest

from soda import hedge
from soda.augment import default_registry
from soda.budget import allocate
from soda.config import SodaParams, TrainConfig
from soda.trainer import load_checkpoint, new_experiment, run, run_epoch, save_checkpoint

SMALL = dict(n_train=6, n_test=4, n_a=12, image_size=12, filters=4, epochs=3)


def small_config(**kw):
    return TrainConfig(**{**SMALL, **kw})


def metrics_key(ms):
    return [
        (m.epoch, m.pi.tobytes(), m.losses.tobytes(), m.allocation, m.train_loss, m.test_jaccard, m.discounted_cum_loss)
        for m in ms
    ]


@pytest.mark.parametrize("strategy", ["uniform", "soda"])
def test_uniform_split_on_first_epoch(strategy):
    state = new_experiment(TrainConfig(epochs=1, n_train=4, n_test=2), default_registry(), seed=0, strategy=strategy)
    _, m = run_epoch(state)
    assert m.allocation == (20, 20, 20)
    np.testing.assert_allclose(m.pi, [1 / 3] * 3)


def test_uniform_never_consults_allocator():
    state = new_experiment(small_config(), default_registry(), seed=0, strategy="uniform")
    for m in run(state):
        np.testing.assert_array_equal(m.pi, [1 / 3] * 3)
        assert m.allocation == (4, 4, 4)
    assert state.allocator.epoch == 0


def test_target_skips_junk():
    state = new_experiment(TrainConfig(epochs=1, n_train=4, n_test=2), default_registry(), seed=0, strategy="target")
    _, m = run_epoch(state)
    assert m.allocation == (30, 30, 0)
    np.testing.assert_array_equal(m.pi, [0.5, 0.5, 0.0])
    assert np.isnan(m.losses[2]) and not np.isnan(m.losses[:2]).any()
    assert state.trackers[3].steps == 0


def test_soda_updates_allocator_each_epoch():
    state = new_experiment(small_config(), default_registry(), seed=0)
    ms = run(state)
    assert state.allocator.epoch == 3
    for m in ms:
        assert abs(m.pi.sum() - 1) <= 1e-12
        assert np.all((m.losses >= 0) & (m.losses <= 1))
        assert sum(m.allocation) == 12 and min(m.allocation) >= 1
    # pi of epoch t+1 comes from the losses of epochs 1..t
    s = hedge.new_allocator(3, 6.0, 0.5)
    for prev, nxt in zip(ms, ms[1:]):
        s = hedge.update(s, prev.losses)
        np.testing.assert_allclose(nxt.pi, hedge.probabilities(s), atol=1e-15)


def test_every_sample_gradient_is_attributed_once():
    state = new_experiment(small_config(batch_size=5), default_registry(), seed=3)
    _, m = run_epoch(state)
    total = sum(acc.count * acc.epoch_average() for acc in state.accumulators)
    np.testing.assert_allclose(total, state.gradient_mass, rtol=0, atol=1e-8)
    assert state.accumulators[0].count == 6
    assert [a.count for a in state.accumulators[1:]] == list(m.allocation)


def test_discounted_cum_loss_matches_history():
    state = new_experiment(small_config(epochs=4), default_registry(), seed=1)
    ms = run(state)
    v = hedge.discounted_cumulative_loss([m.pi for m in ms], [m.losses for m in ms], 0.5)
    assert ms[-1].discounted_cum_loss == pytest.approx(v, abs=1e-12)


@pytest.mark.parametrize("strategy", ["soda", "uniform", "target"])
def test_deterministic(strategy):
    a = run(new_experiment(small_config(), default_registry(), seed=9, strategy=strategy))
    b = run(new_experiment(small_config(), default_registry(), seed=9, strategy=strategy))
    assert metrics_key(a) == metrics_key(b)


def test_shared_seed_sequence_gives_paired_states():
    ss = np.random.SeedSequence(123)
    a = new_experiment(small_config(), default_registry(), seed=ss, strategy="soda")
    b = new_experiment(small_config(), default_registry(), seed=ss, strategy="uniform")
    np.testing.assert_array_equal(a.model.theta, b.model.theta)
    assert metrics_key(run(a, 1)) == metrics_key(run(b, 1))


def test_strategies_share_data_and_init():
    a = new_experiment(small_config(), default_registry(), seed=4, strategy="soda")
    b = new_experiment(small_config(), default_registry(), seed=4, strategy="uniform")
    assert all(x.image.tobytes() == y.image.tobytes() for x, y in zip(a.train + a.test, b.train + b.test))
    np.testing.assert_array_equal(a.model.theta, b.model.theta)
    # identical first epoch: both start from the uniform split
    assert metrics_key(run(a, 1)) == metrics_key(run(b, 1))


@pytest.mark.parametrize("optimizer", ["sgd", "rmsprop"])
def test_checkpoint_resume(tmp_path, optimizer):
    cfg = small_config(epochs=5, optimizer=optimizer, learning_rate=0.05)
    full = run(new_experiment(cfg, default_registry(), seed=2))

    state = new_experiment(cfg, default_registry(), seed=2)
    first = run(state, 3)
    path = tmp_path / "ckpt.json"
    save_checkpoint(state, path)
    assert {"theta", "allocator", "trackers", "rng", "epoch"} <= set(json.loads(path.read_text()))

    resumed = load_checkpoint(new_experiment(cfg, default_registry(), seed=2), path)
    rest = run(resumed, 2)
    assert metrics_key(first + rest) == metrics_key(full)


def test_junk_loss_drives_allocation_to_floor():
    """Allocator + budget chain fed fixed losses, no training."""
    s = hedge.new_allocator(3, 6.0, 0.5)
    loss = np.array([0.1, 0.1, 0.9])
    junk_pi, floor_epoch = [], None
    for t in range(1, 6):
        s = hedge.update(s, loss)
        pi = hedge.probabilities(s)
        # closed form: log w_k = -eta * loss_k * (1 - beta**t) / (1 - beta)
        lw = -6.0 * loss * (1 - 0.5**t) / 0.5
        np.testing.assert_allclose(pi, np.exp(lw) / np.exp(lw).sum(), rtol=1e-12)
        junk_pi.append(pi[2])
        if allocate(pi, 60).counts[2] == 1 and floor_epoch is None:
            floor_epoch = t
    assert all(a > b for a, b in zip(junk_pi, junk_pi[1:]))
    assert floor_epoch is not None and floor_epoch <= 5


def test_new_experiment_defaults_to_config_seed():
    cfg = small_config(seed=17)
    a = new_experiment(cfg, default_registry())
    b = new_experiment(cfg, default_registry(), seed=17)
    np.testing.assert_array_equal(a.model.theta, b.model.theta)


def test_soda_params_reach_allocator():
    cfg = small_config(soda=SodaParams(eta=3.0, rho=0.5, beta=0.9))
    state = new_experiment(cfg, default_registry(), seed=0)
    assert (state.allocator.eta, state.allocator.beta) == (3.0, 0.9)
    assert all(t.rho == 0.5 for t in state.trackers) and len(state.trackers) == 4
