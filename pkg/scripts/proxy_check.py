"""Exact loss change vs. the dot-product proxy on the toy model.

Prints, per generator, the proxy error for a range of SGD step sizes and the
fitted order of convergence, then the sign agreement at a small step.
"""
import numpy as np

from soda.augment import default_registry
from soda.data import make_synthetic_dataset
from soda.model import ToyModel
from soda.proxy import convergence_order, proxy_errors, sign_agreement


def main(seed=0):
    train, _ = make_synthetic_dataset(20, seed, n_test=1)
    model = ToyModel.init(8, np.random.default_rng(seed))
    rng = np.random.default_rng(seed + 1)
    alphas = 1e-2 / 2.0 ** np.arange(8)
    for spec in default_registry():
        aug = [spec.apply(train[i], rng) for i in rng.integers(len(train), size=5)]
        _, g_k = model.loss_and_gradient(aug)
        errs = proxy_errors(model, train, g_k, alphas)
        print(f"{spec.kind:16s} order {convergence_order(alphas, errs):.3f}  errors " + " ".join(f"{e:.2e}" for e in errs))
    print(f"sign agreement at alpha=1e-4: {sign_agreement(model, train, default_registry(), rng):.2f}")


if __name__ == "__main__":
    main()
