"""Cartesian cell complexes: cell indexing, exterior derivative, Hodge star.

A grid with vertex extents ``dims = (n_0, ..., n_{m-1})`` carries cells of
every degree k in 0..m.  A k-cell is an axis-aligned unit k-cube identified by

* its *axis set* A, the k axes it extends along (|A| = k), and
* its *anchor*, the lowest-indexed corner vertex.

Cells are numbered contiguously per degree: axis sets in lexicographic order
(x < y < z, so edges order x,y,z and 3D faces order xy,xz,yz), anchors in
row-major (C) order within each axis set.  All operator matrices follow this
numbering, which makes outputs reproducible across runs.

The exterior derivative ``D_k`` is the transpose of the cubical boundary
matrix with the usual anti-symmetrized signs, so ``D_{k+1} @ D_k == 0``
holds exactly in integer arithmetic.  The Hodge star ``S_k`` is diagonal
with dual-to-primal volume ratios ``h**(m - 2k)``; dual cells are not
clipped at any boundary (whole-grid volumes).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DegreeError, InvalidGeometryError, InvalidInputError

Axes = tuple[int, ...]

SUPPORT_TAGS = ("full", "normal", "tangential")


def axis_sets(m: int, k: int) -> list[Axes]:
    """All k-element axis subsets of range(m), lexicographically ordered."""
    return list(itertools.combinations(range(m), k))


@dataclass(frozen=True)
class CellId:
    """A single cell: degree, axes it extends along, lowest corner."""

    degree: int
    axes: Axes
    anchor: tuple[int, ...]


@dataclass
class Cochain:
    """A discrete k-form: one value per k-cell of the given support."""

    degree: int
    support: str
    values: np.ndarray

    def __post_init__(self):
        if self.support not in SUPPORT_TAGS:
            raise InvalidInputError(f"unknown support tag {self.support!r}")
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise InvalidInputError("cochain values must be a 1-d vector")

    def copy(self) -> "Cochain":
        return Cochain(self.degree, self.support, self.values.copy())


class GridComplex:
    """Immutable cell complex of an m-dimensional Cartesian grid.

    Parameters
    ----------
    dims:
        Vertex counts per axis; every extent must be >= 2.  Length 2 or 3.
    spacing:
        Uniform grid step h > 0 (dimensionless).
    """

    def __init__(self, dims: Sequence[int], spacing: float = 1.0):
        dims = tuple(int(n) for n in dims)
        if len(dims) not in (2, 3):
            raise InvalidGeometryError(f"ambient dimension must be 2 or 3, got {len(dims)}")
        if any(n < 2 for n in dims):
            raise InvalidGeometryError(f"every extent must be >= 2, got {dims}")
        spacing = float(spacing)
        if not spacing > 0:
            raise InvalidGeometryError(f"spacing must be positive, got {spacing}")
        self.dims = dims
        self.m = len(dims)
        self.spacing = spacing
        self._d_cache: dict[int, sp.csr_matrix] = {}

    # -- cell bookkeeping -------------------------------------------------

    def cell_shape(self, axes: Axes) -> tuple[int, ...]:
        """Anchor-array shape for cells extending along `axes`."""
        return tuple(
            self.dims[a] - 1 if a in axes else self.dims[a] for a in range(self.m)
        )

    def axis_sets(self, k: int) -> list[Axes]:
        self._check_degree(k, self.m)
        return axis_sets(self.m, k)

    def block_offsets(self, k: int) -> dict[Axes, int]:
        """Starting global index of each axis-set block at degree k."""
        offs: dict[Axes, int] = {}
        pos = 0
        for axes in self.axis_sets(k):
            offs[axes] = pos
            pos += int(np.prod(self.cell_shape(axes)))
        return offs

    def num_cells(self, k: int) -> int:
        self._check_degree(k, self.m)
        return sum(int(np.prod(self.cell_shape(axes))) for axes in axis_sets(self.m, k))

    def cell_index(self, cell: CellId) -> int:
        """Global index of a cell (inverse of `cell_of`)."""
        axes = tuple(cell.axes)
        shape = self.cell_shape(axes)
        anchor = tuple(cell.anchor)
        if len(anchor) != self.m or any(
            not 0 <= anchor[a] < shape[a] for a in range(self.m)
        ):
            raise InvalidInputError(f"anchor {anchor} outside grid for axes {axes}")
        return self.block_offsets(cell.degree)[axes] + int(
            np.ravel_multi_index(anchor, shape)
        )

    def cell_of(self, k: int, index: int) -> CellId:
        """CellId of the cell with global index `index` at degree k."""
        if not 0 <= index < self.num_cells(k):
            raise InvalidInputError(f"cell index {index} out of range at degree {k}")
        for axes in self.axis_sets(k):
            shape = self.cell_shape(axes)
            n = int(np.prod(shape))
            if index < n:
                anchor = tuple(int(c) for c in np.unravel_index(index, shape))
                return CellId(k, axes, anchor)
            index -= n
        raise AssertionError("unreachable")

    # -- operators ---------------------------------------------------------

    def exterior_derivative(self, k: int) -> sp.csr_matrix:
        """Signed incidence matrix D_k from k-cells to (k+1)-cells.

        Entries lie in {-1, 0, +1}; each row has exactly 2(k+1) nonzeros and
        D_{k+1} @ D_k vanishes identically.
        """
        self._check_degree(k, self.m - 1)
        if k in self._d_cache:
            return self._d_cache[k]
        col_off = self.block_offsets(k)
        rows, cols, vals = [], [], []
        row_off = 0
        for upper_axes in axis_sets(self.m, k + 1):
            shape_up = self.cell_shape(upper_axes)
            n_up = int(np.prod(shape_up))
            anchors = np.indices(shape_up).reshape(self.m, -1)
            ridx = row_off + np.arange(n_up)
            for j, a in enumerate(upper_axes):
                sub_axes = tuple(x for x in upper_axes if x != a)
                shape_sub = self.cell_shape(sub_axes)
                sign = float((-1) ** j)
                for shifted in (True, False):
                    anc = anchors.copy()
                    if shifted:
                        anc[a] += 1
                    cidx = col_off[sub_axes] + np.ravel_multi_index(tuple(anc), shape_sub)
                    rows.append(ridx)
                    cols.append(cidx)
                    vals.append(np.full(n_up, sign if shifted else -sign))
            row_off += n_up
        D = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.num_cells(k + 1), self.num_cells(k)),
        )
        D.sum_duplicates()
        D.sort_indices()
        self._d_cache[k] = D
        return D

    def hodge_star(self, k: int) -> sp.dia_matrix:
        """Diagonal star S_k: dual (m-k)-volume over primal k-volume."""
        self._check_degree(k, self.m)
        ratio = self.spacing ** (self.m - 2 * k)
        n = self.num_cells(k)
        return sp.diags(np.full(n, ratio))

    def _check_degree(self, k: int, upper: int) -> None:
        if not 0 <= k <= upper:
            raise DegreeError(f"degree {k} outside 0..{upper}")

    def __repr__(self) -> str:
        return f"GridComplex(dims={self.dims}, spacing={self.spacing})"


def build_grid(dims: Sequence[int], spacing: float = 1.0) -> GridComplex:
    """Construct the cell complex for vertex extents `dims` and step `spacing`."""
    return GridComplex(dims, spacing)
