"""Vector fields from images and conversions between vertex, edge, and cube data.

Vertex fields carry one m-vector per grid vertex.  They are averaged onto
edges to form 1-cochains (one scalar per edge), and 1-cochains are averaged
back onto m-cells to form cube fields, the raster representation written to
decomposed archives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, ParameterError
from .grid import Cochain, GridComplex
from .manifold import default_threshold, segment

_NEIGHBOR_CAP = {2: 8, 3: 26}


@dataclass
class VertexField:
    """m real components per grid vertex, stored as (m, *dims)."""

    dims: tuple[int, ...]
    components: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.components = np.asarray(self.components, dtype=np.float64)
        m = len(self.dims)
        if self.components.shape != (m, *self.dims):
            raise InvalidInputError(
                f"components shape {self.components.shape} != {(m, *self.dims)}"
            )


@dataclass
class CubeField:
    """m real components per m-cell, stored as (m, *(dims - 1))."""

    dims: tuple[int, ...]  # vertex extents of the parent grid
    components: np.ndarray

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.components = np.asarray(self.components, dtype=np.float64)
        m = len(self.dims)
        cube_shape = tuple(n - 1 for n in self.dims)
        if self.components.shape != (m, *cube_shape):
            raise InvalidInputError(
                f"components shape {self.components.shape} != {(m, *cube_shape)}"
            )

    @property
    def magnitude(self) -> np.ndarray:
        return np.sqrt((self.components ** 2).sum(axis=0))


def _clamped_shift(image: np.ndarray, axis: int, step: int) -> np.ndarray:
    """image sampled at index + step along axis, replicating at the borders."""
    n = image.shape[axis]
    idx = np.clip(np.arange(n) + step, 0, n - 1)
    return np.take(image, idx, axis=axis)


def gradient_field(image: np.ndarray, s: int = 1, t: int = 1) -> VertexField:
    """Centered differences with forward step s and backward step t.

    Component a at a vertex is (I[.. +s ..] - I[.. -t ..]) / 2 along axis a;
    out-of-range samples replicate the nearest valid vertex.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim not in (2, 3):
        raise InvalidInputError(f"image must be 2-d or 3-d, got shape {image.shape}")
    if s < 1 or t < 1:
        raise ParameterError(f"steps must be >= 1, got s={s}, t={t}")
    if any(s >= n or t >= n for n in image.shape):
        raise ParameterError(
            f"steps (s={s}, t={t}) must be smaller than every extent {image.shape}"
        )
    comps = [
        (_clamped_shift(image, a, s) - _clamped_shift(image, a, -t)) / 2.0
        for a in range(image.ndim)
    ]
    return VertexField(image.shape, np.stack(comps))


def flow_field(image: np.ndarray, direction: str = "descend") -> VertexField:
    """Steepest-flow field: each vertex points at its extremal neighbors.

    Among the 8 (2D) or 26 (3D) neighbors, take those strictly smaller than
    the center (descend; ascend uses strictly larger).  No such neighbor
    gives the zero vector.  Otherwise the unit directions toward the
    extremal-valued neighbors are averaged and rescaled so the vector's
    magnitude equals the center value.
    """
    image = np.asarray(image, dtype=np.float64)
    m = image.ndim
    if m not in (2, 3):
        raise InvalidInputError(f"image must be 2-d or 3-d, got shape {image.shape}")
    if direction not in ("descend", "ascend"):
        raise InvalidInputError(f"direction must be 'descend' or 'ascend'")
    sign = 1.0 if direction == "descend" else -1.0
    work = sign * image  # descend logic on the (possibly negated) values

    offsets = []
    for delta in np.ndindex(*(3,) * m):
        d = np.array(delta) - 1
        if np.any(d):
            offsets.append(d)
    assert len(offsets) == _NEIGHBOR_CAP[m]

    pad = np.pad(work, 1, mode="constant", constant_values=np.inf)
    center_sl = tuple(slice(1, 1 + n) for n in image.shape)
    neighbor_vals = np.stack(
        [
            pad[tuple(slice(1 + d[a], 1 + d[a] + image.shape[a]) for a in range(m))]
            for d in offsets
        ]
    )
    units = np.stack([d / np.linalg.norm(d) for d in offsets])  # (26, m)

    smaller = neighbor_vals < work[None]
    masked = np.where(smaller, neighbor_vals, np.inf)
    best = masked.min(axis=0)
    has_any = np.isfinite(best)
    is_best = smaller & (masked == best[None])

    counts = is_best.sum(axis=0)
    counts_safe = np.where(counts > 0, counts, 1)
    mean_dir = np.tensordot(is_best.astype(np.float64), units, axes=([0], [0]))
    mean_dir = np.moveaxis(mean_dir, -1, 0) / counts_safe[None]

    norms = np.sqrt((mean_dir ** 2).sum(axis=0))
    ok = has_any & (norms > 1e-300)
    scale = np.where(ok, image / np.where(norms > 0, norms, 1.0), 0.0)
    comps = mean_dir * scale[None]
    return VertexField(image.shape, comps)


def channel_pair_fields(rgb_image: np.ndarray) -> tuple[VertexField, VertexField, VertexField]:
    """Three 2-component fields from the (r,g), (r,b), (g,b) channel pairs."""
    rgb_image = np.asarray(rgb_image, dtype=np.float64)
    if rgb_image.ndim != 3 or rgb_image.shape[0] != 3:
        raise InvalidInputError(
            f"expected a (3, H, W) color image, got shape {rgb_image.shape}"
        )
    r, g, b = rgb_image
    dims = r.shape
    return (
        VertexField(dims, np.stack([r, g])),
        VertexField(dims, np.stack([r, b])),
        VertexField(dims, np.stack([g, b])),
    )


def patch_topology_field(
    image: np.ndarray,
    patch_edge: int,
    threshold: float | None = None,
) -> VertexField:
    """Per-patch Betti vector field on the coarse patch grid.

    The image is cut into patch_edge^m blocks; each block is thresholded and
    its (beta_0, beta_1[, beta_2]) becomes the vector of the corresponding
    coarse vertex.
    """
    from .grid import build_grid
    from .laplacian import betti

    image = np.asarray(image)
    m = image.ndim
    if m not in (2, 3):
        raise InvalidInputError(f"image must be 2-d or 3-d, got shape {image.shape}")
    if patch_edge < 2:
        raise ParameterError(f"patch_edge must be >= 2, got {patch_edge}")
    if any(n % patch_edge for n in image.shape):
        raise ParameterError(
            f"extents {image.shape} are not divisible by patch_edge {patch_edge}"
        )
    if threshold is None:
        threshold = default_threshold(image)
    coarse = tuple(n // patch_edge for n in image.shape)
    patch_grid = build_grid((patch_edge,) * m)
    comps = np.zeros((m, *coarse))
    for pos in np.ndindex(*coarse):
        sl = tuple(slice(p * patch_edge, (p + 1) * patch_edge) for p in pos)
        mask = segment(image[sl], threshold)
        if mask.is_empty:
            continue  # background patch: (0, ..., 0)
        for k in range(m):
            comps[(k, *pos)] = betti(patch_grid, mask, k, "tangential")
    return VertexField(coarse, comps)


def to_one_form(f: VertexField, g: GridComplex) -> Cochain:
    """Average vertex components onto edges: the induced 1-cochain.

    The value on an axis-a edge is the mean of component a at its two
    endpoint vertices; blocks are ordered x, y[, z] per the grid numbering.
    """
    if f.dims != g.dims:
        raise InvalidInputError(f"field dims {f.dims} do not match grid {g.dims}")
    parts = []
    for a in range(g.m):
        comp = f.components[a]
        lo = tuple(slice(0, n - 1) if ax == a else slice(None) for ax, n in enumerate(g.dims))
        hi = tuple(slice(1, n) if ax == a else slice(None) for ax, n in enumerate(g.dims))
        parts.append(((comp[lo] + comp[hi]) / 2.0).ravel())
    return Cochain(1, "full", np.concatenate(parts))


def to_cube_field(omega: Cochain, g: GridComplex) -> CubeField:
    """Average a full-grid 1-cochain onto m-cells.

    Component a of a cube is the mean of the cochain over the cube's
    2^(m-1) axis-a edges (4 in 3D, 2 in 2D).
    """
    if omega.degree != 1 or omega.support != "full":
        raise InvalidInputError("expected a degree-1 cochain on the full grid")
    if omega.values.size != g.num_cells(1):
        raise InvalidInputError(
            f"cochain length {omega.values.size} != edge count {g.num_cells(1)}"
        )
    cube_shape = tuple(n - 1 for n in g.dims)
    comps = np.zeros((g.m, *cube_shape))
    offsets = g.block_offsets(1)
    for a in range(g.m):
        block = omega.values[
            offsets[(a,)] : offsets[(a,)] + int(np.prod(g.cell_shape((a,))))
        ].reshape(g.cell_shape((a,)))
        acc = np.zeros(cube_shape)
        other = [ax for ax in range(g.m) if ax != a]
        for shifts in np.ndindex(*(2,) * (g.m - 1)):
            sl = [slice(None)] * g.m
            for ax, sh in zip(other, shifts):
                sl[ax] = slice(sh, sh + cube_shape[ax])
            acc += block[tuple(sl)]
        comps[a] = acc / 2 ** (g.m - 1)
    return CubeField(g.dims, comps)
