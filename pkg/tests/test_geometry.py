import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rayhooks.geometry import (
    EMPTY_AABB,
    Aabb,
    Ray,
    aabb_contains,
    aabb_grow,
    aabb_surface_area,
    aabb_union,
    barycentric_lerp,
    make_triangle,
    primitive_bounds,
    triangle_array,
    triangle_bounds,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)
point = st.tuples(finite, finite, finite)
vec2 = st.tuples(finite, finite)


@st.composite
def boxes(draw):
    a, b = draw(point), draw(point)
    return Aabb(tuple(map(min, a, b)), tuple(map(max, a, b)))


def test_lerp_vertices():
    a, b, c = (0.3, 0.7), (2.0, -1.0), (5.0, 4.0)
    assert barycentric_lerp(a, b, c, 0.0, 0.0) == a
    assert barycentric_lerp(a, b, c, 1.0, 0.0) == b
    assert barycentric_lerp(a, b, c, 0.0, 1.0) == c


def test_lerp_unit_triangle():
    assert barycentric_lerp((0.0, 0.0), (1.0, 0.0), (0.0, 1.0), 0.25, 0.25) == (0.25, 0.25)


@given(vec2, vec2, vec2, st.floats(0, 1), st.floats(0, 1))
def test_lerp_is_affine(a, b, c, u, v):
    got = barycentric_lerp(a, b, c, u, v)
    for k in range(2):
        want = a[k] + u * (b[k] - a[k]) + v * (c[k] - a[k])
        scale = max(abs(a[k]), abs(b[k]), abs(c[k]), 1e-300)
        assert abs(got[k] - want) <= 1e-12 * scale * 4


def test_union_with_empty_is_identity():
    b = Aabb((0.0, 1.0, 2.0), (3.0, 4.0, 5.0))
    assert aabb_union(EMPTY_AABB, b) == b
    assert aabb_union(b, EMPTY_AABB) == b


def test_unit_cube_area():
    assert aabb_surface_area(Aabb((0, 0, 0), (1, 1, 1))) == 6
    assert aabb_surface_area(EMPTY_AABB) == 0


def test_triangle_bounds():
    tri = make_triangle((0, 0, 0), (1, 0, 0), (0, 1, 0))
    assert triangle_bounds(tri) == Aabb((0, 0, 0), (1, 1, 0))


@given(boxes(), boxes(), point)
def test_union_contains_members(a, b, p):
    u = aabb_union(a, b)
    if aabb_contains(a, p) or aabb_contains(b, p):
        assert aabb_contains(u, p)


@given(boxes(), point, point)
def test_grow_contains_point_and_box(a, p, q):
    g = aabb_grow(a, p)
    assert aabb_contains(g, p)
    if aabb_contains(a, q):
        assert aabb_contains(g, q)


def test_bounds_contain_kernel_vertices(rng):
    # v0 + e1 is rounded in float32; bounds must still cover the exact corner
    verts = rng.random((500, 3, 3)) * 1e3 - 500
    tris = triangle_array(verts)
    lo, hi = primitive_bounds(tris)
    exact = tris.v0.astype(np.float64)[:, None] + np.stack(
        [np.zeros_like(tris.e1), tris.e1, tris.e2], axis=1).astype(np.float64)
    assert (lo[:, None] <= exact).all() and (exact <= hi[:, None]).all()


def test_ray_defaults_and_validation():
    r = Ray((0, 0, 0), (0, 0, 2))
    assert r.tmin == np.float32(1e-4) and math.isinf(r.tmax)
    assert r.direction[2].dtype == np.float32
    with pytest.raises(ValueError):
        Ray((0, 0, 0), (0, 0, 0))
    with pytest.raises(ValueError):
        Ray((0, 0, 0), (1, 0, 0), tmin=2, tmax=1)
    with pytest.raises(ValueError):
        Ray((math.nan, 0, 0), (1, 0, 0))


def test_ingestion_rejects_bad_triangles():
    with pytest.raises(ValueError, match="degenerate"):
        triangle_array([[(0, 0, 0), (1, 1, 1), (2, 2, 2)]])
    with pytest.raises(ValueError, match="finite"):
        triangle_array([[(0, 0, 0), (1, 0, 0), (0, math.inf, 0)]])
    with pytest.raises(ValueError):
        make_triangle((0, 0, 0), (1, 0, 0), (1, 0, 0))


def test_triangle_array_layout():
    tris = triangle_array([[(1, 1, 1), (2, 1, 1), (1, 3, 1)]], geom_ids=[4])
    assert tris.v0.dtype == np.float32 and tris.prim_id.dtype == np.int64
    np.testing.assert_array_equal(tris.e1, [[1, 0, 0]])
    np.testing.assert_array_equal(tris.e2, [[0, 2, 0]])
    assert tris.geom_id[0] == 4 and tris.prim_id[0] == 0
