"""Closest-, any- and multi-hit queries over primitive sequences.

``prims`` is either a :class:`TriangleArray` (tested linearly, one hook call
per triangle) or a tuple / typed list of :class:`Bvh` values. A BVH in the
sequence is a compound primitive: the intersector is handed to its traversal
and replaces the tests *inside* it. Which of the two implementations runs is
decided when numba types the call, never per primitive.

Every query takes an optional intersector; leaving it out is the same as
passing :class:`DefaultIntersector`.
"""
from __future__ import annotations

from collections import namedtuple

import numpy as np
from numba import njit, types
from numba.core.errors import TypingError
from numba.extending import overload

from .bvh import Bvh, empty_hit_list, insert_sorted, intersect_bvh_any, intersect_bvh_closest, intersect_bvh_multi
from .geometry import Ray, TriangleArray, get_triangle, miss_record
from .intersector import effective, triangle_hook


def _is_triangle_array(t):
    return isinstance(t, types.BaseNamedTuple) and t.instance_class is TriangleArray


def _is_bvh(t):
    return isinstance(t, types.BaseNamedTuple) and issubclass(t.instance_class, Bvh)


def _sequence_kind(prims):
    if _is_triangle_array(prims):
        return "linear"
    if isinstance(prims, types.BaseTuple) and not isinstance(prims, types.BaseNamedTuple):
        if len(prims.types) == 0:
            return "empty"
        if all(_is_bvh(t) for t in prims.types):
            return "bvhs"
    if isinstance(prims, types.ListType) and _is_bvh(prims.item_type):
        return "bvhs"
    raise TypingError(f"prims must be a TriangleArray or a sequence of Bvh, got {prims}")


@njit
def _closest_linear(ray, tris, isect):
    best = miss_record()
    for i in range(len(tris.prim_id)):
        hr = triangle_hook(isect, ray, get_triangle(tris, i))
        if hr.hit and hr.t < best.t:
            best = hr
    return best


@njit
def _closest_bvhs(ray, bvhs, isect):
    best = miss_record()
    for bvh in bvhs:
        hr = intersect_bvh_closest(ray, bvh, isect)
        if hr.hit and hr.t < best.t:
            best = hr
    return best


@njit
def _any_linear(ray, tris, isect):
    for i in range(len(tris.prim_id)):
        hr = triangle_hook(isect, ray, get_triangle(tris, i))
        if hr.hit:
            return hr
    return miss_record()


@njit
def _any_bvhs(ray, bvhs, isect):
    for bvh in bvhs:
        hr = intersect_bvh_any(ray, bvh, isect)
        if hr.hit:
            return hr
    return miss_record()


@njit
def _multi_linear(ray, tris, isect, n):
    buf = empty_hit_list()
    for i in range(len(tris.prim_id)):
        hr = triangle_hook(isect, ray, get_triangle(tris, i))
        if hr.hit:
            insert_sorted(buf, hr, n)
    return buf


@njit
def _multi_bvhs(ray, bvhs, isect, n):
    buf = empty_hit_list()
    for bvh in bvhs:
        for hr in intersect_bvh_multi(ray, bvh, isect, n):
            insert_sorted(buf, hr, n)
    return buf


def _closest(ray, prims, isect):
    pass


def _any(ray, prims, isect):
    pass


def _multi(ray, prims, isect, n):
    pass


@overload(_closest)
def _closest_ol(ray, prims, isect):
    kind = _sequence_kind(prims)
    if kind == "linear":
        return lambda ray, prims, isect: _closest_linear(ray, prims, isect)
    if kind == "bvhs":
        return lambda ray, prims, isect: _closest_bvhs(ray, prims, isect)
    return lambda ray, prims, isect: miss_record()


@overload(_any)
def _any_ol(ray, prims, isect):
    kind = _sequence_kind(prims)
    if kind == "linear":
        return lambda ray, prims, isect: _any_linear(ray, prims, isect)
    if kind == "bvhs":
        return lambda ray, prims, isect: _any_bvhs(ray, prims, isect)
    return lambda ray, prims, isect: miss_record()


@overload(_multi)
def _multi_ol(ray, prims, isect, n):
    kind = _sequence_kind(prims)
    if kind == "linear":
        return lambda ray, prims, isect, n: _multi_linear(ray, prims, isect, n)
    if kind == "bvhs":
        return lambda ray, prims, isect, n: _multi_bvhs(ray, prims, isect, n)
    return lambda ray, prims, isect, n: empty_hit_list()


@njit(error_model="numpy")
def closest_hit(ray, prims, isect=None):
    """Smallest-t hit accepted by ``isect``; a miss has ``hit == False``."""
    return _closest(ray, prims, effective(isect))


@njit(error_model="numpy")
def any_hit(ray, prims, isect=None):
    """Some accepted hit: the first in sequence order for a triangle list,
    the first in traversal order inside a BVH."""
    return _any(ray, prims, effective(isect))


@njit(error_model="numpy")
def multi_hit(ray, prims, isect=None, n=1):
    """Up to ``n`` accepted hits with the smallest t, ascending."""
    if n < 1:
        raise ValueError("multi-hit requires n >= 1")
    return _multi(ray, prims, effective(isect), n)


HitArrays = namedtuple("HitArrays", "hit t prim_id geom_id u v")


def _ray_arrays(origins, directions, tmin, tmax):
    origins = np.ascontiguousarray(origins, dtype=np.float32).reshape(-1, 3)
    directions = np.ascontiguousarray(directions, dtype=np.float32).reshape(-1, 3)
    if origins.shape != directions.shape:
        raise ValueError("origins and directions must have the same shape")
    return origins, directions, np.float32(tmin), np.float32(tmax)


@njit(inline="always")
def _ray_at(origins, directions, i, tmin, tmax):
    return Ray(
        (origins[i, 0], origins[i, 1], origins[i, 2]),
        (directions[i, 0], directions[i, 1], directions[i, 2]),
        tmin,
        tmax,
    )


@njit(error_model="numpy", nogil=True)
def _closest_batch(origins, directions, tmin, tmax, prims, isect, hit, t, pid, gid, u, v):
    hooks = effective(isect)
    for i in range(origins.shape[0]):
        hr = _closest(_ray_at(origins, directions, i, tmin, tmax), prims, hooks)
        hit[i] = hr.hit
        t[i] = hr.t
        pid[i] = hr.prim_id
        gid[i] = hr.geom_id
        u[i] = hr.u
        v[i] = hr.v


@njit(error_model="numpy", nogil=True)
def _any_batch(origins, directions, tmin, tmax, prims, isect, hit):
    hooks = effective(isect)
    for i in range(origins.shape[0]):
        hit[i] = _any(_ray_at(origins, directions, i, tmin, tmax), prims, hooks).hit


def _empty_hits(n):
    return HitArrays(
        np.zeros(n, np.bool_), np.full(n, np.inf, np.float32), np.full(n, -1, np.int64),
        np.full(n, -1, np.int64), np.zeros(n, np.float32), np.zeros(n, np.float32),
    )


def closest_hit_batch(origins, directions, prims, isect=None, tmin=1e-4, tmax=np.inf) -> HitArrays:
    """:func:`closest_hit` for every row of ``origins``/``directions``.

    The intersector instance is shared by all rays in the batch.
    """
    origins, directions, tmin, tmax = _ray_arrays(origins, directions, tmin, tmax)
    out = _empty_hits(len(origins))
    _closest_batch(origins, directions, tmin, tmax, prims, isect, *out)
    return out


def any_hit_batch(origins, directions, prims, isect=None, tmin=1e-4, tmax=np.inf) -> np.ndarray:
    origins, directions, tmin, tmax = _ray_arrays(origins, directions, tmin, tmax)
    hit = np.zeros(len(origins), np.bool_)
    _any_batch(origins, directions, tmin, tmax, prims, isect, hit)
    return hit
