"""Augmentation generators: noise injection, rotation and a junk arm."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from soda.budget import BudgetAllocation

KINDS = ("noise_injection", "rotation", "junk")
NOISE_MODES = ("multiplicative", "additive", "literal")

DEFAULT_PARAMS = {
    "noise_injection": {"sigmas": [0.01, 0.02, 0.03, 0.04, 0.05], "mode": "multiplicative"},
    "rotation": {"steps": [1, 2, 3, 4, 5, 6, 7, 8]},
    "junk": {"low": 0.0, "high": 1.0},
}


@dataclass
class ImageSample:
    image: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        if self.image.shape != self.mask.shape:
            raise ValueError(f"image {self.image.shape} and mask {self.mask.shape} differ")


@dataclass
class AugmentedSample(ImageSample):
    """A training sample tagged with the source that produced it (0 = original data)."""

    source: int = 0


@dataclass
class GeneratorSpec:
    id: int
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}, expected one of {KINDS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        self.params = {**DEFAULT_PARAMS[self.kind], **self.params}
        p = self.params
        if self.kind == "noise_injection":
            if p["mode"] not in NOISE_MODES:
                raise ValueError(f"noise mode must be one of {NOISE_MODES}, got {p['mode']!r}")
            if not p["sigmas"] or min(p["sigmas"]) < 0:
                raise ValueError("sigmas must be a non-empty list of non-negative values")
        elif self.kind == "rotation":
            if not p["steps"] or any(int(a) != a for a in p["steps"]):
                raise ValueError("rotation steps must be a non-empty list of integers")
        elif not p["low"] < p["high"]:
            raise ValueError("junk range needs low < high")

    @property
    def is_junk(self) -> bool:
        return self.kind == "junk"

    def apply(self, sample: ImageSample, rng: np.random.Generator) -> ImageSample:
        if self.kind == "noise_injection":
            return noise_inject(sample, rng, sigmas=self.params["sigmas"], mode=self.params["mode"])
        if self.kind == "rotation":
            return rotate(sample, rng, steps=self.params["steps"])
        return junk(sample, rng, low=self.params["low"], high=self.params["high"])


def default_registry() -> list[GeneratorSpec]:
    return [GeneratorSpec(i + 1, kind) for i, kind in enumerate(KINDS)]


def noise_inject(
    sample: ImageSample,
    rng: np.random.Generator,
    sigmas: Sequence[float] = DEFAULT_PARAMS["noise_injection"]["sigmas"],
    mode: str = "multiplicative",
    sigma: float | None = None,
) -> ImageSample:
    """Perturb the image with Gaussian noise of a randomly chosen scale.

    ``mode`` picks how the noise eps ~ N(0, sigma^2) is applied:
    ``x * (1 + eps)`` (default), ``x + eps``, or ``x * eps``.
    Passing ``sigma`` skips the draw from ``sigmas``.
    """
    if sigma is None:
        sigma = float(rng.choice(np.asarray(sigmas, dtype=float)))
    eps = rng.normal(0.0, sigma, size=sample.image.shape) if sigma > 0 else np.zeros(sample.image.shape)
    x = sample.image
    if mode == "multiplicative":
        out = x * (1.0 + eps)
    elif mode == "additive":
        out = x + eps
    elif mode == "literal":
        out = x * eps
    else:
        raise ValueError(f"unknown noise mode {mode!r}")
    return ImageSample(out, sample.mask.copy())


def rotate_by(sample: ImageSample, a: int) -> ImageSample:
    """Rotate image and mask counter-clockwise by ``a * 45`` degrees.

    Multiples of 90 degrees are exact pixel permutations. Odd ``a`` adds a
    45 degree turn with bilinear interpolation for the image and nearest
    neighbour for the mask; pixels coming from outside are filled with 0.
    """
    a = int(a) % 8
    image = np.rot90(sample.image, a // 2)
    mask = np.rot90(sample.mask, a // 2)
    if a % 2:
        image = ndimage.rotate(image, 45.0, reshape=False, order=1, mode="constant", cval=0.0)
        mask = ndimage.rotate(mask, 45.0, reshape=False, order=0, mode="constant", cval=0)
    return ImageSample(np.ascontiguousarray(image), np.ascontiguousarray(mask))


def rotate(
    sample: ImageSample,
    rng: np.random.Generator,
    steps: Sequence[int] = DEFAULT_PARAMS["rotation"]["steps"],
) -> ImageSample:
    a = int(rng.choice(np.asarray(steps)))
    return rotate_by(sample, a)


def junk(sample: ImageSample, rng: np.random.Generator, low: float = 0.0, high: float = 1.0) -> ImageSample:
    """Replace the image with i.i.d. uniform pixels; the mask is kept."""
    return ImageSample(rng.uniform(low, high, size=sample.image.shape), sample.mask.copy())


def generate_batch(
    registry: Sequence[GeneratorSpec],
    allocation: BudgetAllocation | Sequence[int],
    pool: Sequence[ImageSample],
    rng: np.random.Generator,
) -> list[AugmentedSample]:
    """Draw ``allocation[k]`` samples from generator ``registry[k]``, shuffled."""
    counts = list(allocation.counts if isinstance(allocation, BudgetAllocation) else allocation)
    if len(counts) != len(registry):
        raise ValueError(f"{len(counts)} counts for {len(registry)} generators")
    if len(pool) == 0:
        raise ValueError("empty sample pool")
    out = []
    for spec, n in zip(registry, counts):
        for base in rng.integers(len(pool), size=n):
            s = spec.apply(pool[base], rng)
            out.append(AugmentedSample(s.image, s.mask, source=spec.id))
    order = rng.permutation(len(out))
    return [out[i] for i in order]
