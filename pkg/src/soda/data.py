"""Synthetic shape-segmentation task.

Each image holds one to three bright ellipses or rectangles at random
orientations over a smooth textured background, plus pixel noise. The mask is
the union of the shape interiors. Images are standardized per image.
"""
from __future__ import annotations

import numpy as np

from soda.augment import ImageSample


def child_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """``n`` independent child streams of ``seed`` (int or SeedSequence).

    Unlike ``SeedSequence.spawn`` this keeps no state: the same parent always
    yields the same children, however often it is asked.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [
        np.random.SeedSequence(ss.entropy, spawn_key=(*ss.spawn_key, i), pool_size=ss.pool_size)
        for i in range(n)
    ]


def make_sample(
    rng: np.random.Generator,
    size: int = 32,
    noise: float = 0.25,
    texture: float = 0.25,
) -> ImageSample:
    yy, xx = np.mgrid[0:size, 0:size].astype(float)
    c = (size - 1) / 2.0

    image = np.zeros((size, size))
    for _ in range(2):
        freq = rng.uniform(0.5, 2.5) * 2 * np.pi / size
        angle = rng.uniform(0, np.pi)
        phase = rng.uniform(0, 2 * np.pi)
        image += texture * np.sin(freq * (np.cos(angle) * xx + np.sin(angle) * yy) + phase)

    mask = np.zeros((size, size), dtype=bool)
    for _ in range(rng.integers(1, 4)):
        # keep centres inside the inscribed disc so rotations rarely clip shapes
        r = rng.uniform(0, 0.45 * size)
        phi = rng.uniform(0, 2 * np.pi)
        cy, cx = c + r * np.sin(phi), c + r * np.cos(phi)
        ang = rng.uniform(0, np.pi)
        u = np.cos(ang) * (xx - cx) + np.sin(ang) * (yy - cy)
        v = -np.sin(ang) * (xx - cx) + np.cos(ang) * (yy - cy)
        a, b = rng.uniform(0.08 * size, 0.22 * size, size=2)
        if rng.random() < 0.5:
            inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
        else:
            inside = (np.abs(u) <= a) & (np.abs(v) <= b)
        image[inside] += rng.uniform(0.8, 1.6) - image[inside] * 0.5
        mask |= inside

    image += rng.normal(0.0, noise, size=image.shape)
    image = (image - image.mean()) / image.std()
    return ImageSample(image, mask.astype(np.uint8))


def make_synthetic_dataset(
    n: int,
    seed=0,
    n_test: int = 30,
    size: int = 32,
) -> tuple[list[ImageSample], list[ImageSample]]:
    """``n`` training and ``n_test`` test samples from independent streams."""
    if n < 1:
        raise ValueError("need at least one training sample")
    train_ss, test_ss = child_seeds(seed, 2)
    train_rng = np.random.default_rng(train_ss)
    test_rng = np.random.default_rng(test_ss)
    train = [make_sample(train_rng, size) for _ in range(n)]
    test = [make_sample(test_rng, size) for _ in range(n_test)]
    return train, test
