"""Regenerate tests/data/forward_golden.npz (only after the gradient checks pass)."""
from pathlib import Path

import numpy as np

from soda.model import ToyModel

out = Path(__file__).resolve().parents[1] / "tests" / "data" / "forward_golden.npz"
rng = np.random.default_rng(20240101)
model = ToyModel.init(8, rng)
image = rng.normal(size=(16, 16))
np.savez(out, theta=model.theta, image=image, output=model.forward(image))
print(f"wrote {out}")
