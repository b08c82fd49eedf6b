"""Decomposed-archive loading and label handling.

The input is the NPZ archive written by the decomposition pipeline:
`decomposed` is float32 (N, C, H, W) or (N, C, D, H, W); `labels` is
(N,) / (N, 1) class indices, or (N, L) with L > 1 binary indicators for
multilabel tasks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class ArchiveData:
    tensors: np.ndarray  # float32, channels first
    labels: np.ndarray
    task: str  # multilabel-binary | multiclass
    num_classes: int
    spatial_dims: int

    def __len__(self) -> int:
        return len(self.tensors)


def load_decomposed(path: str) -> ArchiveData:
    with np.load(path, allow_pickle=False) as data:
        if "decomposed" not in data.files or "labels" not in data.files:
            raise ValueError(
                f"{path} must contain 'decomposed' and 'labels' (found {data.files})"
            )
        tensors = np.asarray(data["decomposed"], dtype=np.float32)
        labels = np.asarray(data["labels"])
    if tensors.ndim not in (4, 5):
        raise ValueError(f"decomposed must be (N, C, spatial...), got {tensors.shape}")
    if len(tensors) != len(labels):
        raise ValueError(f"{len(tensors)} tensors vs {len(labels)} labels")

    if labels.ndim == 2 and labels.shape[1] == 1:
        labels = labels[:, 0]
    if labels.ndim == 2:
        task = "multilabel-binary"
        num_classes = labels.shape[1]
        labels = labels.astype(np.float32)
    else:
        task = "multiclass"
        labels = labels.astype(np.int64)
        num_classes = int(labels.max()) + 1
    return ArchiveData(tensors, labels, task, num_classes, tensors.ndim - 2)


def per_class_mean_intensity(data: ArchiveData) -> np.ndarray:
    """Mean absolute tensor intensity per class (multiclass only)."""
    if data.task != "multiclass":
        raise ValueError("per-class means are defined for multiclass labels")
    means = np.zeros(data.num_classes)
    for c in range(data.num_classes):
        sel = data.tensors[data.labels == c]
        means[c] = float(np.abs(sel).mean()) if len(sel) else 0.0
    return means


def normalize_tensors(tensors: np.ndarray) -> np.ndarray:
    """Scale each sample to unit max magnitude (decomposed fields are
    signed and unbounded; this keeps batches on a comparable scale)."""
    flat = np.abs(tensors.reshape(len(tensors), -1)).max(axis=1)
    flat = np.where(flat > 0, flat, 1.0)
    shape = (-1,) + (1,) * (tensors.ndim - 1)
    return tensors / flat.reshape(shape)
