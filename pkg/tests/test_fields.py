import numpy as np
import pytest

from hodgedec import (
    InvalidInputError,
    ParameterError,
    build_grid,
    channel_pair_fields,
    flow_field,
    gradient_field,
    patch_topology_field,
    to_cube_field,
    to_one_form,
)
from hodgedec.grid import Cochain
from hodgedec.fields import VertexField


def test_gradient_constant_image_zero():
    f = gradient_field(np.full((5, 7), 4.0))
    assert np.all(f.components == 0)


def test_gradient_ramp():
    img = np.indices((6, 6))[0].astype(float)
    f = gradient_field(img)
    assert np.all(f.components[0][1:-1, :] == 1.0)
    assert np.all(f.components[1] == 0.0)
    # replicated border: one-sided half-step
    assert np.all(f.components[0][0, :] == 0.5)
    assert np.all(f.components[0][-1, :] == 0.5)


def test_gradient_direct_substitution():
    img = np.array([[0.0, 1.0, 4.0]] * 3).T  # rows 0,1,4 along axis 0
    f = gradient_field(img)
    assert np.all(f.components[0][1] == (4.0 - 0.0) / 2)


def test_gradient_steps():
    img = np.arange(25, dtype=float).reshape(5, 5) ** 2
    f = gradient_field(img, s=2, t=1)
    i, j = 2, 2
    expected = (img[i + 2, j] - img[i - 1, j]) / 2
    assert f.components[0][i, j] == expected


def test_gradient_parameter_errors():
    img = np.zeros((4, 4))
    with pytest.raises(ParameterError):
        gradient_field(img, s=0)
    with pytest.raises(ParameterError):
        gradient_field(img, s=4)
    with pytest.raises(ParameterError):
        gradient_field(img, t=7)


def test_flow_constant_zero():
    f = flow_field(np.full((5, 5), 2.0))
    assert np.all(f.components == 0)


def test_flow_strict_descent_along_x():
    img = (10.0 - np.indices((5, 5))[0]).astype(float)
    f = flow_field(img)
    inner = (slice(1, -1), slice(1, -1))
    # all three +x neighbors tie; their average direction is +x
    assert np.allclose(f.components[0][inner], img[inner])
    assert np.allclose(f.components[1][inner], 0.0)


def test_flow_two_way_tie_diagonal():
    img = np.full((3, 3), 5.0)
    img[2, 1] = 1.0  # +x neighbor of the center
    img[1, 2] = 1.0  # +y neighbor of the center
    f = flow_field(img)
    v = 5.0
    expected = v * np.array([1.0, 1.0]) / np.sqrt(2)
    assert np.allclose([f.components[0][1, 1], f.components[1][1, 1]], expected)


def test_flow_magnitude_is_zero_or_value():
    rng = np.random.default_rng(0)
    img = rng.random((8, 8))
    f = flow_field(img)
    mag = np.sqrt((f.components ** 2).sum(axis=0))
    ok = (np.abs(mag) < 1e-12) | (np.abs(mag - img) < 1e-12)
    assert ok.all()


def test_flow_ascend_mirrors_descend():
    img = np.indices((5, 5))[0].astype(float) + 1.0
    up = flow_field(img, "ascend")
    inner = (slice(1, -1), slice(1, -1))
    assert np.allclose(up.components[0][inner], img[inner])  # toward +x growth


def test_flow_3d_unique_minimum():
    img = np.full((3, 3, 3), 4.0)
    img[1, 1, 0] = 1.0  # -z neighbor of center
    f = flow_field(img)
    center = (1, 1, 1)
    vec = [f.components[a][center] for a in range(3)]
    assert np.allclose(vec, [0.0, 0.0, -4.0])


def test_channel_pairs_equal_channels():
    img = np.random.default_rng(1).random((3, 4, 4))
    img[1] = img[0]
    img[2] = img[0]
    f1, f2, f3 = channel_pair_fields(img)
    assert np.allclose(f1.components, f2.components)
    assert np.allclose(f2.components, f3.components)
    assert np.allclose(f1.components[0], f1.components[1])


def test_channel_pairs_pure_red():
    img = np.zeros((3, 4, 5))
    img[0] = 2.0
    f_rg, f_rb, f_gb = channel_pair_fields(img)
    assert np.all(f_rg.components[0] == 2.0)
    assert np.all(f_rg.components[1] == 0.0)
    assert np.all(f_gb.components == 0.0)


def test_channel_pairs_swap_symmetry():
    rng = np.random.default_rng(2)
    img = rng.random((3, 4, 4))
    swapped = img[[0, 2, 1]]
    _, f_rb, f_gb = channel_pair_fields(img)
    _, g_rb, g_gb = channel_pair_fields(swapped)
    assert np.allclose(g_rb.components[1], img[1])  # swapped b" = g
    assert np.allclose(g_gb.components[0], img[2])
    assert np.allclose(g_gb.components[1], img[1])


def test_channel_pairs_need_three_channels():
    with pytest.raises(InvalidInputError):
        channel_pair_fields(np.zeros((4, 4)))
    with pytest.raises(InvalidInputError):
        channel_pair_fields(np.zeros((2, 4, 4)))


def test_patch_field_background_solid_and_holed():
    img = np.zeros((12, 12))
    img[4:8, 0:4] = 9.0  # solid patch at coarse (1, 0)
    img[8:12, 8:12] = 9.0
    img[9:11, 9:11] = 0.0  # 2x2 hole in the (2, 2) patch
    f = patch_topology_field(img, 4, threshold=1.0)
    assert f.dims == (3, 3)
    assert f.components[0][0, 0] == 0 and f.components[1][0, 0] == 0
    assert f.components[0][1, 0] == 1 and f.components[1][1, 0] == 0
    assert f.components[0][2, 2] == 1 and f.components[1][2, 2] == 1


def test_patch_divisibility_enforced():
    with pytest.raises(ParameterError):
        patch_topology_field(np.zeros((10, 12)), 4)


def test_one_form_constant_field():
    g = build_grid([4, 4])
    f = VertexField((4, 4), np.stack([np.ones((4, 4)), np.zeros((4, 4))]))
    omega = to_one_form(f, g)
    n_x = 12
    assert np.all(omega.values[:n_x] == 1.0)
    assert np.all(omega.values[n_x:] == 0.0)


def test_one_form_zero_field():
    g = build_grid([3, 3, 3])
    f = VertexField((3, 3, 3), np.zeros((3, 3, 3, 3)))
    assert np.all(to_one_form(f, g).values == 0.0)


def test_one_form_endpoint_average():
    g = build_grid([2, 2])
    comps = np.zeros((2, 2, 2))
    comps[0, 0, 0] = 2.0
    comps[0, 1, 0] = 4.0
    f = VertexField((2, 2), comps)
    omega = to_one_form(f, g)
    from hodgedec import CellId

    e = g.cell_index(CellId(1, (0,), (0, 0)))
    assert omega.values[e] == 3.0


def test_cube_field_uniform_x():
    g = build_grid([4, 4])
    values = np.concatenate([np.ones(12), np.zeros(12)])
    cf = to_cube_field(Cochain(1, "full", values), g)
    assert np.all(cf.components[0] == 1.0)
    assert np.all(cf.components[1] == 0.0)


def test_cube_field_single_face_average():
    g = build_grid([2, 2])
    # x-edges at (0,0) and (0,1) valued 1 and 3: cube x-component 2
    values = np.zeros(4)
    values[0] = 1.0
    values[1] = 3.0
    cf = to_cube_field(Cochain(1, "full", values), g)
    assert cf.components[0][0, 0] == 2.0


def test_cube_field_3d_averages_four_edges():
    g = build_grid([2, 2, 2])
    from hodgedec import CellId

    values = np.zeros(12)
    for (j, k), v in zip([(0, 0), (0, 1), (1, 0), (1, 1)], [1.0, 2.0, 3.0, 6.0]):
        values[g.cell_index(CellId(1, (0,), (0, j, k)))] = v
    cf = to_cube_field(Cochain(1, "full", values), g)
    assert cf.components[0][0, 0, 0] == 3.0


def test_conversions_are_linear():
    rng = np.random.default_rng(5)
    g = build_grid([5, 6])
    u = rng.standard_normal((2, 5, 6))
    w = rng.standard_normal((2, 5, 6))
    a, b = 1.7, -0.3
    lhs = to_one_form(VertexField((5, 6), a * u + b * w), g).values
    rhs = a * to_one_form(VertexField((5, 6), u), g).values + b * to_one_form(
        VertexField((5, 6), w), g
    ).values
    assert np.allclose(lhs, rhs, atol=1e-12)
    x = rng.standard_normal(g.num_cells(1))
    y = rng.standard_normal(g.num_cells(1))
    lhs_c = to_cube_field(Cochain(1, "full", a * x + b * y), g).components
    rhs_c = a * to_cube_field(Cochain(1, "full", x), g).components + b * to_cube_field(
        Cochain(1, "full", y), g
    ).components
    assert np.allclose(lhs_c, rhs_c, atol=1e-12)


def test_gradient_one_form_composition():
    # s=t=1 gradient then edge averaging = mean of the two centered diffs
    rng = np.random.default_rng(6)
    img = rng.random((6, 6))
    g = build_grid([6, 6])
    f = gradient_field(img)
    omega = to_one_form(f, g)
    # interior x-edge (i, j)-(i+1, j), 1 <= i <= 3
    from hodgedec import CellId

    for (i, j) in [(1, 2), (2, 4), (3, 3)]:
        e = g.cell_index(CellId(1, (0,), (i, j)))
        expected = ((img[i + 1, j] - img[i - 1, j]) / 2 + (img[i + 2, j] - img[i, j]) / 2) / 2
        assert np.isclose(omega.values[e], expected, atol=1e-12)
