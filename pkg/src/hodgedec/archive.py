"""NPZ-style archive I/O for image batches and decomposed tensors.

Archives are zip-of-arrays files with the keys ``images`` / ``labels`` on
the input side and ``decomposed`` / ``labels`` on the output side.
Benchmark-style archives that store ``train_images``, ``val_labels`` etc.
are accepted by passing a split name, which remaps the prefixed keys.
Writing goes through a canonical sorted-key order so identical data gives
byte-identical files.
"""

from __future__ import annotations

import io
import os
from typing import Mapping

import numpy as np

from .errors import InvalidInputError


def load_archive(path: str, split: str | None = None) -> dict[str, np.ndarray]:
    """Read an archive, remapping '<split>_images'/'<split>_labels' if asked."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"input archive not found: {path}")
    try:
        with np.load(path, allow_pickle=False) as data:
            arrays = {k: data[k] for k in data.files}
    except (OSError, ValueError) as exc:
        raise InvalidInputError(f"could not read archive {path}: {exc}") from exc
    if split:
        remapped = {}
        for base in ("images", "labels"):
            key = f"{split}_{base}"
            if key in arrays:
                remapped[base] = arrays[key]
        if "images" not in remapped:
            raise InvalidInputError(
                f"archive {path} has no '{split}_images' key (keys: {sorted(arrays)})"
            )
        return remapped
    return arrays


def save_archive(path: str, arrays: Mapping[str, np.ndarray]) -> None:
    """Write arrays to an uncompressed NPZ with canonical key order."""
    ordered = {k: np.asarray(arrays[k]) for k in sorted(arrays)}
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "wb") as fh:
        np.savez(fh, **ordered)
    os.replace(tmp, path)


def archive_bytes(arrays: Mapping[str, np.ndarray]) -> bytes:
    """The exact byte content `save_archive` would write (for hashing/tests)."""
    ordered = {k: np.asarray(arrays[k]) for k in sorted(arrays)}
    buf = io.BytesIO()
    np.savez(buf, **ordered)
    return buf.getvalue()
