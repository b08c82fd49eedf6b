"""Batch engine: configuration, parallel decomposition, reports, exports.

One worker pool decomposes images independently; results are collected in
input order by a single writer, so a fixed configuration and input always
produce byte-identical archives regardless of worker count.  Per-image
failures are skipped and recorded in the JSON sidecar rather than aborting
the batch.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

import numpy as np

from .archive import load_archive, save_archive
from .decompose import decomposed_image, to_luminance
from .errors import HodgeDecError, InvalidInputError, ParameterError
from .fields import to_cube_field
from .grid import Cochain, build_grid
from .laplacian import assemble, harmonic_space, spectrum
from .manifold import build_support, default_threshold, segment

WORKERS_ENV = "HODGEDEC_WORKERS"

_FIELD_METHODS = ("gradient", "flow", "channel-pair", "patch")
_VARIANTS = ("big", "hodge")
_CONDITIONS = ("normal", "tangential")


@dataclass
class PipelineConfig:
    """Everything a batch run depends on; round-trips through plain text."""

    input_path: str = ""
    output_path: str = ""
    split: str = ""  # '' reads plain images/labels keys
    threshold: float | None = None  # None = automatic per image
    field_method: str = "gradient"
    s: int = 1
    t: int = 1
    direction: str = "descend"
    patch_edge: int = 4
    variant: str = "big"
    solver_tol: float = 1e-10
    max_iters: int = 0  # 0 = 10 * unknowns
    workers: int = 1
    degree: int = 1  # betti / spectra target degree
    condition: str = "tangential"
    count: int = 6  # spectra: eigenvalues per image
    plot_dir: str = ""  # export destination for rasters
    angle_encoding: bool = False

    def __post_init__(self):
        if self.field_method not in _FIELD_METHODS:
            raise ParameterError(f"field_method must be one of {_FIELD_METHODS}")
        if self.variant not in _VARIANTS:
            raise ParameterError(f"variant must be one of {_VARIANTS}")
        if self.condition not in _CONDITIONS:
            raise ParameterError(f"condition must be one of {_CONDITIONS}")
        if self.s < 1 or self.t < 1:
            raise ParameterError("steps s and t must be >= 1")
        if self.patch_edge < 2:
            raise ParameterError("patch_edge must be >= 2")
        if not 0 < self.solver_tol < 1:
            raise ParameterError("solver_tol must lie in (0, 1)")
        if self.max_iters < 0 or self.workers < 1 or self.count < 1:
            raise ParameterError("max_iters, workers, and count must be non-negative/positive")
        if self.threshold is not None and not np.isfinite(self.threshold):
            raise ParameterError("threshold must be finite (omit it for automatic)")

    # -- serialization ---------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                value = "auto"
            elif isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        values: dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParameterError(f"config line {lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values: dict[str, Any]) -> "PipelineConfig":
        kwargs: dict[str, Any] = {}
        by_name = {f.name: f for f in dataclasses.fields(cls)}
        for key, val in values.items():
            if key not in by_name:
                raise ParameterError(f"unknown config key {key!r}")
            if isinstance(val, str):
                val = _parse_value(key, val)
            kwargs[key] = val
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "PipelineConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def effective_workers(self) -> int:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ParameterError(f"{WORKERS_ENV} must be an integer, got {env!r}")
        return self.workers


def _parse_value(key: str, val: str) -> Any:
    if key == "threshold":
        return None if val in ("auto", "none", "") else float(val)
    if key in ("solver_tol",):
        return float(val)
    if key in ("s", "t", "patch_edge", "workers", "max_iters", "degree", "count"):
        return int(val)
    if key in ("angle_encoding",):
        return val.lower() in ("1", "true", "yes", "on")
    return val


# -- per-image work ---------------------------------------------------------


def _field_params(cfg: PipelineConfig) -> dict[str, Any]:
    return {
        "s": cfg.s,
        "t": cfg.t,
        "direction": cfg.direction,
        "patch_edge": cfg.patch_edge,
    }


def _normalize_image(image: np.ndarray) -> np.ndarray:
    """Move a trailing 3-channel axis first; pass plain 2D/3D through."""
    if image.ndim == 3 and image.shape[-1] == 3 and image.shape[0] != 3:
        return np.moveaxis(image, -1, 0)
    return image


def _decompose_task(args) -> tuple[int, np.ndarray | None, dict[str, Any]]:
    index, image, cfg = args
    try:
        out = decomposed_image(
            _normalize_image(image),
            field_method=cfg.field_method,
            params=_field_params(cfg),
            variant=cfg.variant,
            threshold=cfg.threshold,
            tol=cfg.solver_tol,
            maxiter=cfg.max_iters or None,
        )
    except HodgeDecError as exc:
        return index, None, {"index": index, "error": f"{type(exc).__name__}: {exc}"}
    d = out.diagnostics
    per_field = d["per_field"]
    diag = {
        "index": index,
        "mask_vertices": d["mask_vertices"],
        "empty_mask": bool(per_field and per_field[0]["empty_mask"]),
        "orthogonality": max(f["max_orthogonality"] for f in per_field) if per_field else 0.0,
        "iterations": [
            [f["solve_normal"].iterations, f["solve_tangential"].iterations]
            for f in per_field
        ],
        "support_sizes_normal": per_field[0]["support_sizes_normal"] if per_field else [],
        "support_sizes_tangential": per_field[0]["support_sizes_tangential"] if per_field else [],
    }
    return index, out.tensor.astype(np.float32), diag


def _run_tasks(tasks, workers: int, fn):
    if workers <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(tasks) // (workers * 4))
        return list(pool.map(fn, tasks, chunksize=chunk))


def _sidecar_path(output_path: str) -> str:
    base, _ = os.path.splitext(output_path)
    return base + ".json"


def run_decompose(cfg: PipelineConfig) -> int:
    """Decompose a whole archive; returns the process exit code."""
    started = time.time()
    data = load_archive(cfg.input_path, cfg.split or None)
    if "images" not in data:
        raise InvalidInputError(
            f"archive {cfg.input_path} has no 'images' key (keys: {sorted(data)})"
        )
    images = data["images"]
    workers = cfg.effective_workers()
    tasks = [(i, images[i], cfg) for i in range(len(images))]
    results = _run_tasks(tasks, workers, _decompose_task)

    tensors, diags, skipped = [], [], []
    for index, tensor, diag in results:
        diags.append(diag)
        if tensor is None:
            skipped.append(index)
        else:
            tensors.append(tensor)

    arrays: dict[str, np.ndarray] = {}
    if tensors:
        arrays["decomposed"] = np.stack(tensors)
    else:
        arrays["decomposed"] = np.zeros((0,), dtype=np.float32)
    if "labels" in data:
        labels = np.asarray(data["labels"])
        if skipped:
            keep = [i for i in range(len(images)) if i not in set(skipped)]
            labels = labels[keep]
        arrays["labels"] = labels
    save_archive(cfg.output_path, arrays)

    sidecar = {
        "config_text": cfg.to_text(),
        "config_hash": cfg.config_hash(),
        "workers": workers,
        "images": int(len(images)),
        "written": int(len(tensors)),
        "skipped": skipped,
        "per_image": diags,
        "elapsed_s": time.time() - started,
    }
    with open(_sidecar_path(cfg.output_path), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=1, sort_keys=True)
    return 1 if skipped else 0


# -- reports -----------------------------------------------------------------


def _betti_task(args) -> tuple[int, int | None]:
    index, image, cfg = args
    image = _normalize_image(image)
    scalar = to_luminance(image) if image.ndim == 3 and image.shape[0] == 3 else image
    thr = cfg.threshold if cfg.threshold is not None else default_threshold(image)
    mask = segment(scalar, thr)
    if mask.is_empty:
        return index, None
    g = build_grid(scalar.shape)
    s = build_support(g, mask, cfg.condition)
    L = assemble(g, s, cfg.degree, cfg.variant)
    return index, harmonic_space(L).dimension


def run_betti(cfg: PipelineConfig) -> dict[str, Any]:
    data = load_archive(cfg.input_path, cfg.split or None)
    images = data["images"]
    tasks = [(i, images[i], cfg) for i in range(len(images))]
    results = _run_tasks(tasks, cfg.effective_workers(), _betti_task)
    return {
        "config_hash": cfg.config_hash(),
        "degree": cfg.degree,
        "condition": cfg.condition,
        "variant": cfg.variant,
        "betti": [dim for _, dim in sorted(results)],
    }


def _spectra_task(args) -> tuple[int, list[float] | None]:
    index, image, cfg = args
    image = _normalize_image(image)
    scalar = to_luminance(image) if image.ndim == 3 and image.shape[0] == 3 else image
    thr = cfg.threshold if cfg.threshold is not None else default_threshold(image)
    mask = segment(scalar, thr)
    if mask.is_empty:
        return index, None
    g = build_grid(scalar.shape)
    s = build_support(g, mask, cfg.condition)
    L = assemble(g, s, cfg.degree, cfg.variant)
    count = min(cfg.count, L.shape[0])
    return index, [float(x) for x in spectrum(L, count)]


def run_spectra(cfg: PipelineConfig) -> dict[str, Any]:
    data = load_archive(cfg.input_path, cfg.split or None)
    images = data["images"]
    tasks = [(i, images[i], cfg) for i in range(len(images))]
    results = _run_tasks(tasks, cfg.effective_workers(), _spectra_task)
    report = {
        "config_hash": cfg.config_hash(),
        "degree": cfg.degree,
        "condition": cfg.condition,
        "variant": cfg.variant,
        "count": cfg.count,
        "eigenvalues": [vals for _, vals in sorted(results)],
    }
    if cfg.plot_dir:
        export_harmonic_rasters(cfg, images)
    return report


# -- raster export -------------------------------------------------------------


def _to_uint8(values: np.ndarray) -> np.ndarray:
    lo, hi = float(values.min()), float(values.max())
    if hi <= lo:
        return np.full(values.shape, 127, dtype=np.uint8)
    return np.round(255 * (values - lo) / (hi - lo)).astype(np.uint8)


def _save_png(path: str, gray: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(gray, mode="L").save(path)


def _save_angle_png(path: str, vx: np.ndarray, vy: np.ndarray) -> None:
    """Direction as hue, magnitude as value (2D only)."""
    import colorsys

    from PIL import Image

    mag = np.sqrt(vx ** 2 + vy ** 2)
    hi = mag.max()
    val = mag / hi if hi > 0 else mag
    hue = (np.arctan2(vy, vx) + np.pi) / (2 * np.pi)
    rgb = np.zeros((*vx.shape, 3), dtype=np.uint8)
    for idx in np.ndindex(*vx.shape):
        r, g_, b = colorsys.hsv_to_rgb(hue[idx], 1.0, val[idx])
        rgb[idx] = (int(255 * r), int(255 * g_), int(255 * b))
    Image.fromarray(rgb, mode="RGB").save(path)


def _component_rasters(tensor: np.ndarray, m: int) -> list[np.ndarray]:
    """Per-component magnitude images from a stacked (3m, ...) tensor."""
    mags = []
    for c in range(3):
        block = tensor[c * m : (c + 1) * m]
        mags.append(np.sqrt((block.astype(np.float64) ** 2).sum(axis=0)))
    return mags


_COMPONENT_NAMES = ("curlfree", "divfree", "harmonic")


def run_export_plot(cfg: PipelineConfig) -> list[str]:
    """Rasterize per-component magnitudes for every image in the archive."""
    if not cfg.plot_dir:
        raise ParameterError("export-plot needs plot_dir")
    os.makedirs(cfg.plot_dir, exist_ok=True)
    data = load_archive(cfg.input_path, cfg.split or None)
    images = data["images"]
    written: list[str] = []
    for i in range(len(images)):
        image = _normalize_image(images[i])
        out = decomposed_image(
            image,
            field_method=cfg.field_method,
            params=_field_params(cfg),
            variant=cfg.variant,
            threshold=cfg.threshold,
            tol=cfg.solver_tol,
        )
        m = out.tensor.ndim - 1
        mags = _component_rasters(out.tensor[: 3 * m], m)
        for name, mag in zip(_COMPONENT_NAMES, mags):
            if m == 2:
                path = os.path.join(cfg.plot_dir, f"img{i:04d}_{name}.png")
                _save_png(path, _to_uint8(mag))
                written.append(path)
                if cfg.angle_encoding:
                    block = out.tensor[
                        _COMPONENT_NAMES.index(name) * m : _COMPONENT_NAMES.index(name) * m + 2
                    ]
                    path = os.path.join(cfg.plot_dir, f"img{i:04d}_{name}_angle.png")
                    _save_angle_png(path, block[0], block[1])
                    written.append(path)
            else:
                for axis in range(3):
                    mid = mag.shape[axis] // 2
                    sl = [slice(None)] * 3
                    sl[axis] = mid
                    path = os.path.join(
                        cfg.plot_dir, f"img{i:04d}_{name}_axis{axis}.png"
                    )
                    _save_png(path, _to_uint8(mag[tuple(sl)]))
                    written.append(path)
    return written


def export_harmonic_rasters(cfg: PipelineConfig, images: np.ndarray) -> list[str]:
    """Rasterize near-zero eigenvectors of the configured Laplacian."""
    os.makedirs(cfg.plot_dir, exist_ok=True)
    written: list[str] = []
    for i in range(len(images)):
        image = _normalize_image(images[i])
        scalar = to_luminance(image) if image.ndim == 3 and image.shape[0] == 3 else image
        thr = cfg.threshold if cfg.threshold is not None else default_threshold(image)
        mask = segment(scalar, thr)
        if mask.is_empty:
            continue
        g = build_grid(scalar.shape)
        s = build_support(g, mask, cfg.condition)
        L = assemble(g, s, cfg.degree, cfg.variant)
        basis = harmonic_space(L)
        P = s.projection(cfg.degree)
        for j in range(basis.dimension):
            full = P.T @ basis.vectors[:, j]
            raster = _cell_magnitude_raster(g, cfg.degree, full)
            if raster.ndim == 3:
                mid = raster.shape[0] // 2
                raster = raster[mid]
            path = os.path.join(cfg.plot_dir, f"img{i:04d}_harmonic{j}.png")
            _save_png(path, _to_uint8(raster))
            written.append(path)
    return written


def _cell_magnitude_raster(g, k: int, values: np.ndarray) -> np.ndarray:
    """|cochain| resampled on a vertex- or cube-shaped array for plotting."""
    if k == 0:
        return np.abs(values).reshape(g.dims)
    if k == 1:
        return to_cube_field(Cochain(1, "full", values), g).magnitude
    # anchor-shaped blocks summed in quadrature over axis sets
    cube_shape = tuple(n - 1 for n in g.dims)
    acc = np.zeros(cube_shape)
    off = 0
    for axes in g.axis_sets(k):
        shape = g.cell_shape(axes)
        n = int(np.prod(shape))
        block = values[off : off + n].reshape(shape)
        acc += block[tuple(slice(0, c) for c in cube_shape)] ** 2
        off += n
    return np.sqrt(acc)


def inspect_archive(path: str) -> dict[str, Any]:
    data = load_archive(path)
    return {
        key: {"shape": list(arr.shape), "dtype": str(arr.dtype)}
        for key, arr in data.items()
    }
