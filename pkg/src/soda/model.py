"""Two-layer convolutional pixel classifier with hand-derived gradients.

    z = conv3x3(x; W1) + b1        (zero padding, c filters)
    a = relu(z)
    p = sigmoid(a . W2 + b2)       (1x1 projection)

Loss on a batch: mean over samples of the per-pixel mean squared error
``(p - y)**2`` plus ``l2_weight * ||W1||**2``. Only the first-layer kernel
is penalised.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit


def _stack(batch) -> tuple[np.ndarray, np.ndarray]:
    images = np.stack([s.image for s in batch]).astype(float)
    masks = np.stack([s.mask for s in batch]).astype(float)
    return images, masks


def _patches(images: np.ndarray) -> np.ndarray:
    padded = np.pad(images, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(padded, (3, 3), axis=(1, 2))
    return win.reshape(*images.shape, 9)


@dataclass
class ToyModel:
    filters: int
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} parameters, got {self.theta.shape}")

    @classmethod
    def init(cls, filters: int = 8, rng: np.random.Generator | None = None) -> "ToyModel":
        """He-normal kernels, zero biases."""
        rng = rng if rng is not None else np.random.default_rng(0)
        c = filters
        w1 = rng.normal(0.0, np.sqrt(2.0 / 9.0), size=(c, 9))
        w2 = rng.normal(0.0, np.sqrt(1.0 / c), size=c)
        theta = np.concatenate([w1.ravel(), np.zeros(c), w2, [0.0]])
        return cls(filters, theta)

    @classmethod
    def zeros(cls, filters: int = 8) -> "ToyModel":
        return cls(filters, np.zeros(11 * filters + 1))

    @property
    def dim(self) -> int:
        return 11 * self.filters + 1

    def unpack(self, theta: np.ndarray | None = None):
        t = self.theta if theta is None else theta
        c = self.filters
        w1 = t[: 9 * c].reshape(c, 9)
        b1 = t[9 * c : 10 * c]
        w2 = t[10 * c : 11 * c]
        b2 = t[11 * c]
        return w1, b1, w2, b2

    def reg_mask(self) -> np.ndarray:
        m = np.zeros(self.dim)
        m[: 9 * self.filters] = 1.0
        return m

    def _forward(self, images: np.ndarray, theta=None):
        w1, b1, w2, b2 = self.unpack(theta)
        patches = _patches(images)
        z = patches @ w1.T + b1
        a = np.maximum(z, 0.0)
        p = expit(a @ w2 + b2)
        return patches, z, a, p

    def forward(self, image: np.ndarray, theta=None) -> np.ndarray:
        """Foreground probabilities for one (H, W) image or a (B, H, W) stack."""
        image = np.asarray(image, dtype=float)
        if not np.all(np.isfinite(image)):
            raise ValueError("image has non-finite pixels")
        single = image.ndim == 2
        if single:
            image = image[None]
        elif image.ndim != 3:
            raise ValueError(f"expected (H, W) or (B, H, W), got {image.shape}")
        p = self._forward(image, theta)[3]
        return p[0] if single else p

    def per_sample_loss_and_gradient(self, batch, l2_weight: float = 0.0, theta=None):
        """Loss and gradient of every sample separately.

        Each sample's share includes the full L2 term, so the batch objective
        is the plain mean of the returned losses and gradients.
        """
        images, masks = _stack(batch)
        patches, z, a, p = self._forward(images, theta)
        w1, _, w2, _ = self.unpack(theta)
        n_pix = images.shape[1] * images.shape[2]
        err = p - masks
        losses = (err**2).reshape(len(images), -1).mean(axis=1)

        ds = 2.0 * err * p * (1.0 - p) / n_pix
        g_w2 = np.einsum("bhwc,bhw->bc", a, ds)
        g_b2 = ds.sum(axis=(1, 2))
        dz = ds[..., None] * w2 * (z > 0)
        g_w1 = np.einsum("bhwc,bhwk->bck", dz, patches)
        g_b1 = dz.sum(axis=(1, 2))

        grads = np.concatenate(
            [g_w1.reshape(len(images), -1), g_b1, g_w2, g_b2[:, None]], axis=1
        )
        if l2_weight:
            losses = losses + l2_weight * float(np.sum(w1**2))
            grads[:, : w1.size] += 2.0 * l2_weight * w1.ravel()
        return losses, grads

    def loss_and_gradient(self, batch, l2_weight: float = 0.0, theta=None):
        if len(batch) == 0:
            raise ValueError("empty batch")
        losses, grads = self.per_sample_loss_and_gradient(batch, l2_weight, theta)
        return float(losses.mean()), grads.mean(axis=0)

    def loss(self, batch, l2_weight: float = 0.0, theta=None) -> float:
        if len(batch) == 0:
            raise ValueError("empty batch")
        images, masks = _stack(batch)
        p = self._forward(images, theta)[3]
        data = float(((p - masks) ** 2).reshape(len(images), -1).mean(axis=1).mean())
        if l2_weight:
            w1 = self.unpack(theta)[0]
            data += l2_weight * float(np.sum(w1**2))
        return data


@dataclass
class SGD:
    learning_rate: float

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        return theta - self.learning_rate * grad

    def state_dict(self) -> dict:
        return {}

    def load_state_dict(self, d: dict) -> None:
        pass


@dataclass
class RMSProp:
    """Keras-style RMSProp (rho 0.9, epsilon 1e-7, no momentum)."""

    learning_rate: float
    rho: float = 0.9
    epsilon: float = 1e-7
    avg_sq: np.ndarray | None = field(default=None, repr=False)

    def step(self, theta: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.avg_sq is None:
            self.avg_sq = np.zeros_like(theta)
        self.avg_sq = self.rho * self.avg_sq + (1.0 - self.rho) * grad**2
        return theta - self.learning_rate * grad / (np.sqrt(self.avg_sq) + self.epsilon)

    def state_dict(self) -> dict:
        return {"avg_sq": None if self.avg_sq is None else [float(v) for v in self.avg_sq]}

    def load_state_dict(self, d: dict) -> None:
        self.avg_sq = None if d.get("avg_sq") is None else np.asarray(d["avg_sq"], dtype=float)


def make_optimizer(name: str, learning_rate: float):
    if name == "sgd":
        return SGD(learning_rate)
    if name == "rmsprop":
        return RMSProp(learning_rate)
    raise ValueError(f"unknown optimizer {name!r}")


def jaccard(prediction: np.ndarray, mask: np.ndarray, threshold: float = 0.5) -> float:
    """Intersection over union of ``prediction > threshold`` and ``mask``.

    Two empty regions count as a perfect match.
    """
    prediction = np.asarray(prediction)
    mask = np.asarray(mask)
    if prediction.shape != mask.shape:
        raise ValueError(f"shape mismatch: {prediction.shape} vs {mask.shape}")
    pred = prediction > threshold
    truth = mask.astype(bool)
    union = np.count_nonzero(pred | truth)
    if union == 0:
        return 1.0
    return np.count_nonzero(pred & truth) / union


def mean_jaccard(model: ToyModel, samples: Sequence) -> float:
    images = np.stack([s.image for s in samples])
    probs = model.forward(images)
    return float(np.mean([jaccard(p, s.mask) for p, s in zip(probs, samples)]))
