import numpy as np

from soda.data import make_sample, make_synthetic_dataset


def _bytes(samples):
    return b"".join(s.image.tobytes() + s.mask.tobytes() for s in samples)


def test_deterministic():
    a = make_synthetic_dataset(5, 42, n_test=3)
    b = make_synthetic_dataset(5, 42, n_test=3)
    assert _bytes(a[0]) == _bytes(b[0]) and _bytes(a[1]) == _bytes(b[1])
    c = make_synthetic_dataset(5, 43, n_test=3)
    assert _bytes(a[0]) != _bytes(c[0])


def test_sizes_and_defaults():
    train, test = make_synthetic_dataset(20, 0)
    assert len(train) == 20 and len(test) == 30
    assert train[0].image.shape == (32, 32)


def test_train_and_test_disjoint():
    train, test = make_synthetic_dataset(20, 0)
    assert not {s.image.tobytes() for s in train} & {s.image.tobytes() for s in test}


def test_standardized():
    train, test = make_synthetic_dataset(20, 1)
    for s in train + test:
        assert abs(s.image.mean()) < 1e-10
        assert abs(s.image.std() - 1.0) < 1e-10
        assert set(np.unique(s.mask)) <= {0, 1}


def test_masks_nonempty():
    rng = np.random.default_rng(0)
    nonempty = sum(make_sample(rng).mask.any() for _ in range(10_000))
    assert nonempty >= 9_900
