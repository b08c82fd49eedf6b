import numpy as np
import pytest

from hodgedec import (
    CellId,
    DegreeError,
    InvalidGeometryError,
    build_grid,
)


def test_smallest_2d_counts():
    g = build_grid([2, 2])
    assert [g.num_cells(k) for k in range(3)] == [4, 4, 1]


def test_3x3_counts_match_formula():
    # (n-1)*n + n*(n-1) edges
    g = build_grid([3, 3])
    n = 3
    assert g.num_cells(0) == n * n == 9
    assert g.num_cells(1) == (n - 1) * n + n * (n - 1) == 12
    assert g.num_cells(2) == (n - 1) * (n - 1) == 4


def test_unit_cube_counts():
    g = build_grid([2, 2, 2])
    assert [g.num_cells(k) for k in range(4)] == [8, 12, 6, 1]


@pytest.mark.parametrize("dims", [[2, 2], [1, 5], [4, 0, 4]])
def test_bad_extents_rejected(dims):
    if min(dims) >= 2:
        build_grid(dims)
    else:
        with pytest.raises(InvalidGeometryError):
            build_grid(dims)


def test_bad_spacing_rejected():
    with pytest.raises(InvalidGeometryError):
        build_grid([3, 3], spacing=0.0)
    with pytest.raises(InvalidGeometryError):
        build_grid([3, 3], spacing=-1.0)


def test_gradient_of_constant_vanishes():
    g = build_grid([4, 5])
    c = np.full(g.num_cells(0), 3.7)
    assert np.all(g.exterior_derivative(0) @ c == 0)


def test_dd_zero_smallest_grid():
    g = build_grid([2, 2])
    DD = (g.exterior_derivative(1) @ g.exterior_derivative(0)).toarray()
    assert DD.shape == (1, 4)
    assert np.all(DD == 0)


def test_d0_on_coordinate_ramp():
    # f(i, j) = i: +1 on every x-edge, 0 on every y-edge
    g = build_grid([3, 3])
    f = np.indices((3, 3))[0].ravel().astype(float)
    df = g.exterior_derivative(0) @ f
    n_x = 6
    assert np.all(df[:n_x] == 1.0)
    assert np.all(df[n_x:] == 0.0)


@pytest.mark.parametrize(
    "dims",
    [(2, 2), (3, 4), (5, 2), (8, 8), (2, 2, 2), (3, 4, 5), (2, 5, 3)],
)
def test_dd_zero_and_row_counts(dims):
    g = build_grid(dims)
    m = g.m
    for k in range(m - 1):
        DD = g.exterior_derivative(k + 1) @ g.exterior_derivative(k)
        DD.eliminate_zeros()
        assert DD.nnz == 0
    for k in range(m):
        D = g.exterior_derivative(k)
        assert np.all(np.diff(D.indptr) == 2 * (k + 1))
        assert set(np.unique(D.data)) <= {-1.0, 1.0}


def test_star_unit_spacing_is_identity():
    g = build_grid([4, 4, 4], spacing=1.0)
    for k in range(4):
        S = g.hodge_star(k)
        assert np.all(S.diagonal() == 1.0)


def test_star_2d_spacing_two():
    g = build_grid([4, 4], spacing=2.0)
    assert np.all(g.hodge_star(0).diagonal() == 4.0)
    assert np.all(g.hodge_star(1).diagonal() == 1.0)
    assert np.all(g.hodge_star(2).diagonal() == 0.25)


def test_star_reciprocal_spacings():
    h = 3.0
    a = build_grid([5, 5], spacing=h)
    b = build_grid([5, 5], spacing=1.0 / h)
    for k in (0, 2):
        assert np.allclose(a.hodge_star(k).diagonal() * b.hodge_star(k).diagonal(), 1.0)


def test_degree_bounds_raise():
    g = build_grid([3, 3])
    with pytest.raises(DegreeError):
        g.exterior_derivative(2)  # top degree has no derivative
    with pytest.raises(DegreeError):
        g.hodge_star(3)
    with pytest.raises(DegreeError):
        g.num_cells(-1)


@pytest.mark.parametrize("dims", [(3, 4), (2, 3, 4)])
def test_index_maps_are_bijections(dims):
    g = build_grid(dims)
    for k in range(g.m + 1):
        for i in range(g.num_cells(k)):
            cell = g.cell_of(k, i)
            assert g.cell_index(cell) == i
            assert cell.degree == k
            # cell fits inside the grid
            for a in range(g.m):
                extent = 1 if a in cell.axes else 0
                assert cell.anchor[a] + extent <= dims[a] - 1


def test_axis_set_ordering_is_lexicographic():
    g = build_grid([3, 3, 3])
    assert g.axis_sets(1) == [(0,), (1,), (2,)]
    assert g.axis_sets(2) == [(0, 1), (0, 2), (1, 2)]


def test_d_matches_manual_boundary_on_2d_face():
    # boundary of the face anchored at (i, j): +x-edge(i,j) +y-edge(i+1,j)
    # -x-edge(i,j+1) -y-edge(i,j)
    g = build_grid([3, 3])
    D1 = g.exterior_derivative(1).toarray()
    f = g.cell_index(CellId(2, (0, 1), (1, 1)))
    row = D1[f]
    ex = lambda i, j: g.cell_index(CellId(1, (0,), (i, j)))
    ey = lambda i, j: g.cell_index(CellId(1, (1,), (i, j)))
    expected = np.zeros(g.num_cells(1))
    expected[ex(1, 1)] = 1
    expected[ey(2, 1)] = 1
    expected[ex(1, 2)] = -1
    expected[ey(1, 1)] = -1
    assert np.array_equal(row, expected)
