"""Network configuration and the data-driven layer-count rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TASKS = ("multilabel-binary", "multiclass")

# Layer-count thresholds on the variance of min-max-normalized per-class
# mean intensities.  Well-separated classes (high variance) get shallower
# stacks, hard-to-separate ones (low variance) deeper stacks.
VAR_2D_SHALLOW = 0.20  # >= -> 4 layers
VAR_2D_DEEP = 0.08  # <= -> 6 layers
VAR_3D_DEEP = 0.12  # <= -> 6 layers


@dataclass
class NetConfig:
    """Hyperparameters of the classifier."""

    in_channels: int
    num_classes: int
    hidden_channels: int = 72
    heads: int = 4
    groups: int = 1
    layers: int = 5
    spatial_dims: int = 2
    task: str = "multiclass"

    def __post_init__(self):
        if not 3 <= self.layers <= 8:
            raise ValueError(f"layer count must lie in [3, 8], got {self.layers}")
        if self.hidden_channels % self.groups:
            raise ValueError(
                f"hidden channels {self.hidden_channels} not divisible by groups {self.groups}"
            )
        if self.hidden_channels % self.heads:
            raise ValueError(
                f"hidden channels {self.hidden_channels} not divisible by heads {self.heads}"
            )
        if self.spatial_dims not in (2, 3):
            raise ValueError("spatial_dims must be 2 or 3")
        if self.task not in TASKS:
            raise ValueError(f"task must be one of {TASKS}")
        if self.in_channels < 1 or self.num_classes < 2:
            raise ValueError("need at least 1 input channel and 2 classes")


def variance_index(per_class_means) -> float:
    """Population variance of the min-max-normalized per-class means."""
    means = np.asarray(per_class_means, dtype=np.float64)
    if means.ndim != 1 or means.size < 2:
        raise ValueError("need mean intensities for at least 2 classes")
    lo, hi = means.min(), means.max()
    if hi > lo:
        means = (means - lo) / (hi - lo)
    else:
        means = np.zeros_like(means)
    return float(np.var(means))


def layers_for_variance_index(variance: float, spatial_dims: int = 2) -> int:
    """Map a variance index to a layer count (2D and 3D use different bands)."""
    if spatial_dims == 2:
        if variance >= VAR_2D_SHALLOW:
            return 4
        if variance <= VAR_2D_DEEP:
            return 6
        return 5
    if variance <= VAR_3D_DEEP:
        return 6
    return 5


def layers_from_variance(per_class_means, spatial_dims: int = 2) -> int:
    """Layer count from raw per-class mean intensities."""
    return layers_for_variance_index(variance_index(per_class_means), spatial_dims)
