"""Online allocation of a data-augmentation budget with discounted HEDGE."""

from soda.budget import BudgetAllocation, allocate
from soda.feedback import (
    EpochGradientAccumulator,
    GradientTracker,
    cosine_action_loss,
    exact_loss_discrepancy_oracle,
)
from soda.hedge import (
    AllocatorState,
    discounted_cumulative_loss,
    new_allocator,
    probabilities,
    update,
)

__all__ = [
    "AllocatorState",
    "BudgetAllocation",
    "EpochGradientAccumulator",
    "GradientTracker",
    "allocate",
    "cosine_action_loss",
    "discounted_cumulative_loss",
    "exact_loss_discrepancy_oracle",
    "new_allocator",
    "probabilities",
    "update",
]
