"""Integer apportionment of the per-epoch augmentation budget.

Largest-remainder (Hamilton) rounding with a floor of one sample per arm:

1. every arm whose quota ``pi_k * n_a`` is below one is pinned at 1;
2. the others get ``floor(quota)``;
3. leftover samples go one at a time to the largest fractional remainders
   (lowest index on ties);
4. if the pinned floors overshoot ``n_a``, samples are withdrawn from the
   largest counts (smallest quota, then highest index, on ties).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# quotas this close to an integer are treated as that integer
_SNAP = 1e-9


@dataclass(frozen=True)
class BudgetAllocation:
    counts: tuple[int, ...]
    total: int

    def __post_init__(self):
        if min(self.counts) < 0:
            raise ValueError(f"negative count in {self.counts}")
        if sum(self.counts) != self.total:
            raise ValueError(f"counts {self.counts} do not sum to {self.total}")

    def __len__(self):
        return len(self.counts)

    def __getitem__(self, k):
        return self.counts[k]


def _quota(p: float, n_a: int) -> float:
    q = p * n_a
    r = round(q)
    return float(r) if abs(q - r) <= _SNAP * max(1.0, q) else q


def allocate(pi, n_a: int) -> BudgetAllocation:
    pi = np.asarray(pi, dtype=float)
    k = len(pi)
    if pi.ndim != 1 or k == 0:
        raise ValueError("pi must be a non-empty vector")
    if not (pi.min() > 0 and abs(pi.sum() - 1.0) <= 1e-9):
        # NaN fails the comparisons above as well
        raise ValueError(f"pi is not a strictly positive probability vector: {pi}")
    if n_a < k:
        raise ValueError(f"budget n_a={n_a} cannot give each of {k} arms one sample")

    q = [_quota(p, n_a) for p in pi.tolist()]
    pinned = [x < 1.0 for x in q]
    counts = [1 if pin else math.floor(x) for x, pin in zip(q, pinned)]

    remaining = n_a - sum(counts)
    if remaining > 0:
        # sort is stable: the lowest index comes first among equal remainders
        order = sorted((i for i in range(k) if not pinned[i]), key=lambda i: counts[i] - q[i])
        for j in range(remaining):
            counts[order[j % len(order)]] += 1
    while remaining < 0:
        # among the largest counts, give up the one with the smallest quota;
        # equal quotas: the later arm gives up first
        top = max(counts)
        i = max((j for j in range(k) if counts[j] == top), key=lambda j: (-q[j], j))
        counts[i] -= 1
        remaining += 1

    return BudgetAllocation(tuple(counts), int(n_a))
