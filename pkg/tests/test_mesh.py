import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pdecont.mesh import (MeshError, SEG_BOTTOM, SEG_LEFT, SEG_RIGHT, SEG_TOP,
                          build_rect_mesh, node_to_triangle)


def test_counts_and_extent():
    m = build_rect_mesh(1.0, 0.9, 6, 5)
    assert m.npoints == 7 * 6
    assert m.ntri == 2 * 6 * 5
    assert m.points[:, 0].min() == -1.0 and m.points[:, 0].max() == 1.0
    assert m.points[:, 1].min() == -0.9 and m.points[:, 1].max() == 0.9


def test_positive_orientation_and_area():
    m = build_rect_mesh(2.0, 1.0, 7, 3)
    areas = m.tri_areas()
    assert np.all(areas > 0)
    assert np.isclose(areas.sum(), 4.0 * 2.0, rtol=0, atol=1e-12)


def test_hat_gradients_partition_of_unity():
    m = build_rect_mesh(1.0, 1.0, 4, 4)
    g = m.tri_grads()
    # gradients of the three hat functions sum to zero on every triangle
    assert np.allclose(g.sum(axis=1), 0.0, atol=1e-13)
    # each hat is linear with value 1 at its vertex, 0 at the others
    p = m.points[m.triangles]           # (nt, 3, 2)
    for i in range(3):
        for j in range(3):
            vals = np.einsum("td,td->t", g[:, i], p[:, j] - p[:, i]) + 1.0
            assert np.allclose(vals, 1.0 if i == j else 0.0, atol=1e-12)


def test_boundary_edges_ccw_and_arclength():
    m = build_rect_mesh(1.0, 0.5, 4, 2)
    assert len(m.edges) == 2 * (4 + 2)
    # counterclockwise: bottom, right, top, left
    segs = list(m.edge_seg)
    expected = [SEG_BOTTOM] * 4 + [SEG_RIGHT] * 2 + [SEG_TOP] * 4 + [SEG_LEFT] * 2
    assert segs == expected
    # arclength positions start at 0 on each side and are increasing
    for seg in (SEG_BOTTOM, SEG_RIGHT, SEG_TOP, SEG_LEFT):
        s = m.edge_s[m.edge_seg == seg]
        assert s[0, 0] == 0.0
        assert np.all(s[:, 1] > s[:, 0])
    # edges chain: each edge ends where the next starts
    assert np.all(m.edges[:-1, 1] == m.edges[1:, 0])
    assert m.edges[-1, 1] == m.edges[0, 0]


def test_invalid_arguments():
    with pytest.raises(MeshError):
        build_rect_mesh(-1.0, 1.0, 4, 4)
    with pytest.raises(MeshError):
        build_rect_mesh(1.0, 1.0, 0, 4)


@settings(max_examples=25, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), c=st.floats(-3, 3))
def test_node_to_triangle_exact_for_linear_fields(a, b, c):
    m = build_rect_mesh(1.0, 1.0, 5, 4)
    v = a * m.points[:, 0] + b * m.points[:, 1] + c
    tv = node_to_triangle(m, v)
    cent = m.points[m.triangles].mean(axis=1)
    assert np.allclose(tv, a * cent[:, 0] + b * cent[:, 1] + c, atol=1e-12)


def test_node_to_triangle_systems_and_errors():
    m = build_rect_mesh(1.0, 1.0, 3, 3)
    v = np.arange(2 * m.npoints, dtype=float)
    tv = node_to_triangle(m, v, neq=2)
    assert tv.shape == (2, m.ntri)
    with pytest.raises(MeshError):
        node_to_triangle(m, v[:-1], neq=2)
