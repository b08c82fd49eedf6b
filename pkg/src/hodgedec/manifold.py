"""Foreground extraction and boundary-condition supports.

The foreground manifold M of an image is the set of vertices whose value
meets a threshold.  Two cell subsets of the grid discretize M, one per
boundary condition:

* normal support: a cell is included when at least one of its corner
  vertices is inside M (upward closed: every coface of an included cell
  is included);
* tangential support: a cell is included when at least one vertex of its
  dual cell is inside, where a dual vertex (the center of an m-cell)
  counts as inside when the m-cell has at least one inside corner, i.e.
  when multilinear interpolation of the inside indicator at the center is
  positive (downward closed: the support is a subcomplex).

Projection matrices P_k select the included k-cells from the full grid;
restricted operators are the P-sandwiches P_{k+1} D_k P_k^T and
P_k S_k P_k^T.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegreeError, InvalidInputError
from .grid import Axes, GridComplex

CONDITIONS = ("normal", "tangential")


@dataclass
class VertexMask:
    """Boolean foreground indicator on the grid vertices."""

    dims: tuple[int, ...]
    inside: np.ndarray  # bool, shape == dims

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.inside = np.asarray(self.inside, dtype=bool)
        if self.inside.shape != self.dims:
            raise InvalidInputError(
                f"mask shape {self.inside.shape} does not match dims {self.dims}"
            )

    @property
    def count(self) -> int:
        return int(self.inside.sum())

    @property
    def is_empty(self) -> bool:
        return not self.inside.any()


def default_threshold(image: np.ndarray) -> float:
    """Segmentation threshold: 1/255 of the dynamic range.

    Integer images use the dtype's range (uint8 -> 1.0, so strictly
    positive pixels are foreground).  Float images use the observed
    maximum; a non-positive maximum yields +inf, i.e. an empty mask.
    """
    image = np.asarray(image)
    if np.issubdtype(image.dtype, np.integer):
        info = np.iinfo(image.dtype)
        return (info.max - min(info.min, 0)) / 255.0
    top = float(image.max()) if image.size else 0.0
    return top / 255.0 if top > 0 else np.inf


def segment(image: np.ndarray, threshold: float | None = None) -> VertexMask:
    """Threshold a vertex scalar field: inside <=> value >= threshold."""
    image = np.asarray(image)
    if image.ndim not in (2, 3):
        raise InvalidInputError(f"image must be 2-d or 3-d, got shape {image.shape}")
    if threshold is None:
        threshold = default_threshold(image)
    inside = image.astype(np.float64, copy=False) >= threshold
    return VertexMask(image.shape, inside)


def _corner_any(field: np.ndarray, g: GridComplex, axes: Axes) -> np.ndarray:
    """OR of a boolean vertex field over the 2^|axes| corners of each cell."""
    shape = g.cell_shape(axes)
    out = np.zeros(shape, dtype=bool)
    ranges = [(0, 1) if a in axes else (0,) for a in range(g.m)]
    for corner in itertools.product(*ranges):
        sl = tuple(slice(c, c + shape[a]) for a, c in enumerate(corner))
        out |= field[sl]
    return out


def _touching_mcell_any(dual: np.ndarray, g: GridComplex, axes: Axes) -> np.ndarray:
    """OR of an m-cell field over the m-cells incident to each `axes`-cell.

    An m-cell with anchor q contains the cell (axes, p) iff q == p on the
    cell's own axes and q in {p-1, p} on the remaining ones.
    """
    shape = g.cell_shape(axes)
    out = np.zeros(shape, dtype=bool)
    free = [a for a in range(g.m) if a not in axes]
    for deltas in itertools.product(*[(-1, 0) for _ in free]):
        src, dst = [], []
        for a in range(g.m):
            n_anchor = shape[a]
            n_dual = g.dims[a] - 1
            if a in axes:
                src.append(slice(0, n_anchor))
                dst.append(slice(0, n_anchor))
            else:
                d = deltas[free.index(a)]
                lo, hi = max(0, -d), min(n_anchor, n_dual - d)
                dst.append(slice(lo, hi))
                src.append(slice(lo + d, hi + d))
        if all(s.start < s.stop for s in dst):
            out[tuple(dst)] |= dual[tuple(src)]
    return out


@dataclass
class SupportSet:
    """Per-degree inclusion masks and projections for one boundary condition."""

    condition: str
    grid: GridComplex
    masks: list[np.ndarray]  # masks[k]: bool over all grid k-cells
    _proj: dict[int, sp.csr_matrix] = field(default_factory=dict, repr=False)
    _dcache: dict[int, sp.csr_matrix] = field(default_factory=dict, repr=False)

    def size(self, k: int) -> int:
        return int(self.masks[k].sum())

    def sizes(self) -> list[int]:
        return [self.size(k) for k in range(self.grid.m + 1)]

    def projection(self, k: int) -> sp.csr_matrix:
        """Row-selection map P_k: one unit entry per included k-cell."""
        if k not in self._proj:
            idx = np.flatnonzero(self.masks[k])
            self._proj[k] = sp.csr_matrix(
                (np.ones(idx.size), (np.arange(idx.size), idx)),
                shape=(idx.size, self.masks[k].size),
            )
        return self._proj[k]


def build_support(g: GridComplex, mask: VertexMask, condition: str) -> SupportSet:
    """Compute the inclusion masks of one boundary condition for mask."""
    if condition not in CONDITIONS:
        raise InvalidInputError(f"condition must be one of {CONDITIONS}")
    if mask.dims != g.dims:
        raise InvalidInputError(f"mask dims {mask.dims} do not match grid {g.dims}")
    inside = mask.inside
    masks: list[np.ndarray] = []
    if condition == "normal":
        for k in range(g.m + 1):
            parts = [_corner_any(inside, g, axes).ravel() for axes in g.axis_sets(k)]
            masks.append(np.concatenate(parts))
    else:
        dual_inside = _corner_any(inside, g, tuple(range(g.m)))
        for k in range(g.m + 1):
            parts = [
                _touching_mcell_any(dual_inside, g, axes).ravel()
                for axes in g.axis_sets(k)
            ]
            masks.append(np.concatenate(parts))
    return SupportSet(condition, g, masks)


def restricted_derivative(g: GridComplex, s: SupportSet, k: int) -> sp.csr_matrix:
    """D_{k,bc} = P_{k+1} D_k P_k^T on the support's cells."""
    if not 0 <= k <= g.m - 1:
        raise DegreeError(f"degree {k} outside 0..{g.m - 1}")
    if k not in s._dcache:
        D = g.exterior_derivative(k)
        out = (s.projection(k + 1) @ D @ s.projection(k).T).tocsr()
        out.sort_indices()
        s._dcache[k] = out
    return s._dcache[k]


def restricted_star(g: GridComplex, s: SupportSet, k: int) -> sp.dia_matrix:
    """S_{k,bc} = P_k S_k P_k^T: diagonal positive on the support."""
    if not 0 <= k <= g.m:
        raise DegreeError(f"degree {k} outside 0..{g.m}")
    ratio = g.spacing ** (g.m - 2 * k)
    return sp.diags(np.full(s.size(k), ratio))
