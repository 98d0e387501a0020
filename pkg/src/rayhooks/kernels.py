"""Default ray/triangle and ray/box tests.

These are the routines every intersector falls back to. Epsilon policy lives
here and nowhere else: a determinant below ``DET_EPS`` means the ray is parallel
to the triangle plane, and the default ``Ray.tmin`` doubles as the
self-intersection offset. Triangles are hit from both sides; results for rays
grazing a shared edge are not guaranteed to be watertight.
"""
import numpy as np
from numba import njit

from .geometry import BoxHit, HitRecord, INF32, miss_record

f32 = np.float32

DET_EPS = f32(1e-12)
ONE32 = f32(1.0)


@njit(inline="always", error_model="numpy")
def inverse_direction(ray):
    d = ray.direction
    return (ONE32 / d[0], ONE32 / d[1], ONE32 / d[2])


@njit(error_model="numpy")
def intersect_triangle(ray, tri):
    o, d = ray.origin, ray.direction
    v0, e1, e2 = tri.v0, tri.e1, tri.e2

    px = d[1] * e2[2] - d[2] * e2[1]
    py = d[2] * e2[0] - d[0] * e2[2]
    pz = d[0] * e2[1] - d[1] * e2[0]
    det = e1[0] * px + e1[1] * py + e1[2] * pz
    if abs(det) < DET_EPS:
        return miss_record()
    inv_det = ONE32 / det

    sx = o[0] - v0[0]
    sy = o[1] - v0[1]
    sz = o[2] - v0[2]
    u = (sx * px + sy * py + sz * pz) * inv_det
    if u < 0 or u > 1:
        return miss_record()

    qx = sy * e1[2] - sz * e1[1]
    qy = sz * e1[0] - sx * e1[2]
    qz = sx * e1[1] - sy * e1[0]
    v = (d[0] * qx + d[1] * qy + d[2] * qz) * inv_det
    if v < 0 or u + v > 1:
        return miss_record()

    t = (e2[0] * qx + e2[1] * qy + e2[2] * qz) * inv_det
    if t < ray.tmin or t > ray.tmax:
        return miss_record()
    return HitRecord(True, t, tri.prim_id, tri.geom_id, u, v)


@njit(inline="always", error_model="numpy")
def _slab(lo, hi, o, inv):
    t0 = (lo - o) * inv
    t1 = (hi - o) * inv
    # 0 * inf: origin on the slab plane with a parallel ray; the slab does not
    # constrain t at all.
    if t0 != t0 or t1 != t1:
        return -INF32, INF32
    if t0 > t1:
        return t1, t0
    return t0, t1


@njit(error_model="numpy")
def intersect_aabb(ray, box, inv_dir):
    o = ray.origin
    n0, f0 = _slab(box.min[0], box.max[0], o[0], inv_dir[0])
    n1, f1 = _slab(box.min[1], box.max[1], o[1], inv_dir[1])
    n2, f2 = _slab(box.min[2], box.max[2], o[2], inv_dir[2])
    tnear = max(n0, max(n1, n2))
    tfar = min(f0, min(f1, f2))
    hit = max(tnear, ray.tmin) <= min(tfar, ray.tmax)
    return BoxHit(hit, tnear, tfar)
