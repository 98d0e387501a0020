"""Value types shared by every kernel: rays, boxes, triangles and hit records.

All geometry is single precision. Vectors are plain tuples of ``np.float32`` so
they can be passed straight into compiled kernels; the namedtuple classes below
double as numba tuple types.
"""
from __future__ import annotations

import math
from collections import namedtuple

import numpy as np
from numba import njit

f32 = np.float32

TMIN = f32(1e-4)
INF32 = f32(np.inf)
ZERO32 = f32(0.0)


def _vec(values, n=3):
    out = tuple(f32(x) for x in values)
    if len(out) != n:
        raise ValueError(f"expected {n} components, got {len(out)}")
    return out


class Ray(namedtuple("Ray", "origin direction tmin tmax")):
    """Ray ``origin + t * direction`` restricted to ``tmin <= t <= tmax``.

    The direction does not need to be normalized; ``t`` is measured in units of
    the direction's length.
    """

    __slots__ = ()

    def __new__(cls, origin, direction, tmin=TMIN, tmax=INF32):
        origin = _vec(origin)
        direction = _vec(direction)
        tmin, tmax = f32(tmin), f32(tmax)
        if not all(map(math.isfinite, origin)):
            raise ValueError("ray origin must be finite")
        if not any(direction) or not all(map(math.isfinite, direction)):
            raise ValueError("ray direction must be finite and nonzero")
        if not tmin < tmax:
            raise ValueError("ray requires tmin < tmax")
        return super().__new__(cls, origin, direction, tmin, tmax)


Aabb = namedtuple("Aabb", "min max")

# hit point = v0 + u * e1 + v * e2
Triangle = namedtuple("Triangle", "v0 e1 e2 prim_id geom_id")

HitRecord = namedtuple("HitRecord", "hit t prim_id geom_id u v")

BoxHit = namedtuple("BoxHit", "hit tnear tfar")

# Structure-of-arrays triangle storage: v0/e1/e2 are (N, 3) float32,
# prim_id/geom_id are (N,) int64.
TriangleArray = namedtuple("TriangleArray", "v0 e1 e2 prim_id geom_id")

EMPTY_AABB = Aabb((INF32,) * 3, (-INF32,) * 3)


@njit(inline="always")
def miss_record():
    return HitRecord(False, INF32, -1, -1, ZERO32, ZERO32)


@njit(inline="always")
def get_triangle(tris, i):
    v0, e1, e2 = tris.v0, tris.e1, tris.e2
    return Triangle(
        (v0[i, 0], v0[i, 1], v0[i, 2]),
        (e1[i, 0], e1[i, 1], e1[i, 2]),
        (e2[i, 0], e2[i, 1], e2[i, 2]),
        tris.prim_id[i],
        tris.geom_id[i],
    )


@njit
def barycentric_lerp(a, b, c, u, v):
    w = 1 - u - v
    return (w * a[0] + u * b[0] + v * c[0], w * a[1] + u * b[1] + v * c[1])


def make_triangle(v0, v1, v2, prim_id=0, geom_id=0):
    v0 = np.asarray(v0, dtype=np.float32)
    e1 = np.asarray(v1, dtype=np.float32) - v0
    e2 = np.asarray(v2, dtype=np.float32) - v0
    if not np.any(np.cross(e1.astype(np.float64), e2.astype(np.float64))):
        raise ValueError("degenerate triangle")
    return Triangle(_vec(v0), _vec(e1), _vec(e2), int(prim_id), int(geom_id))


def degenerate_mask(vertices):
    """True for each (3, 3) vertex triple whose edge cross product vanishes."""
    vertices = np.asarray(vertices, dtype=np.float32)
    e1 = (vertices[:, 1] - vertices[:, 0]).astype(np.float64)
    e2 = (vertices[:, 2] - vertices[:, 0]).astype(np.float64)
    return ~np.any(np.cross(e1, e2) != 0, axis=1)


def triangle_array(vertices, geom_ids=None, prim_ids=None) -> TriangleArray:
    """Pack an (N, 3, 3) vertex array into kernel storage.

    Non-finite coordinates and zero-area triangles are rejected; callers that
    want to drop them silently should filter with :func:`degenerate_mask` first.
    """
    vertices = np.asarray(vertices, dtype=np.float32).reshape(-1, 3, 3)
    n = len(vertices)
    if not np.isfinite(vertices).all():
        raise ValueError("triangle vertices must be finite")
    bad = np.flatnonzero(degenerate_mask(vertices))
    if len(bad):
        raise ValueError(f"degenerate triangle at index {bad[0]}")
    v0 = np.ascontiguousarray(vertices[:, 0])
    e1 = np.ascontiguousarray(vertices[:, 1] - v0)
    e2 = np.ascontiguousarray(vertices[:, 2] - v0)
    prim_ids = np.arange(n, dtype=np.int64) if prim_ids is None else np.asarray(prim_ids, dtype=np.int64)
    geom_ids = np.zeros(n, dtype=np.int64) if geom_ids is None else np.asarray(geom_ids, dtype=np.int64)
    if prim_ids.shape != (n,) or geom_ids.shape != (n,):
        raise ValueError("id arrays must have one entry per triangle")
    return TriangleArray(v0, e1, e2, np.ascontiguousarray(prim_ids), np.ascontiguousarray(geom_ids))


def triangles_from_list(triangles) -> TriangleArray:
    """Pack a sequence of :class:`Triangle` values, keeping their ids."""
    v0 = np.array([t.v0 for t in triangles], dtype=np.float32).reshape(-1, 3)
    e1 = np.array([t.e1 for t in triangles], dtype=np.float32).reshape(-1, 3)
    e2 = np.array([t.e2 for t in triangles], dtype=np.float32).reshape(-1, 3)
    pid = np.array([t.prim_id for t in triangles], dtype=np.int64)
    gid = np.array([t.geom_id for t in triangles], dtype=np.int64)
    return TriangleArray(v0, e1, e2, pid, gid)


def triangle_at(tris: TriangleArray, i: int) -> Triangle:
    return Triangle(
        tuple(tris.v0[i]), tuple(tris.e1[i]), tuple(tris.e2[i]),
        int(tris.prim_id[i]), int(tris.geom_id[i]),
    )


def triangle_vertices(tris: TriangleArray) -> np.ndarray:
    """Float64 (N, 3, 3) corners exactly as the intersection kernel sees them."""
    v0 = tris.v0.astype(np.float64)
    return np.stack([v0, v0 + tris.e1, v0 + tris.e2], axis=1)


def _round_down(x):
    f = x.astype(np.float32)
    return np.where(f > x, np.nextafter(f, np.float32(-np.inf)), f)


def _round_up(x):
    f = x.astype(np.float32)
    return np.where(f < x, np.nextafter(f, np.float32(np.inf)), f)


def primitive_bounds(tris: TriangleArray):
    """Per-triangle (min, max) corners as (N, 3) float32, rounded outward.

    ``v0 + e1`` is exact in float64 but not always in float32, hence the
    conservative rounding.
    """
    verts = triangle_vertices(tris)
    return _round_down(verts.min(axis=1)), _round_up(verts.max(axis=1))


def triangle_bounds(tri: Triangle) -> Aabb:
    bmin, bmax = primitive_bounds(triangles_from_list([tri]))
    return Aabb(_vec(bmin[0]), _vec(bmax[0]))


def aabb_union(a: Aabb, b: Aabb) -> Aabb:
    return Aabb(
        tuple(min(x, y) for x, y in zip(a.min, b.min)),
        tuple(max(x, y) for x, y in zip(a.max, b.max)),
    )


def aabb_grow(a: Aabb, p) -> Aabb:
    return Aabb(
        tuple(min(x, y) for x, y in zip(a.min, p)),
        tuple(max(x, y) for x, y in zip(a.max, p)),
    )


def aabb_surface_area(a: Aabb) -> float:
    w, h, d = (hi - lo for lo, hi in zip(a.min, a.max))
    if w < 0 or h < 0 or d < 0:
        return 0.0
    return 2.0 * (w * h + w * d + h * d)


def aabb_contains(a: Aabb, p) -> bool:
    return all(lo <= x <= hi for lo, x, hi in zip(a.min, p, a.max))
