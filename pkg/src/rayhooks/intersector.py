"""Custom intersectors: user code spliced into every traversal at compile time.

An intersector is a jitclass with two hooks::

    triangle(self, ray, tri) -> HitRecord
    box(self, ray, box, inv_dir, *extra) -> BoxHit

Derive from :class:`BasicIntersector`, override the hooks you care about and
decorate with :func:`intersector`::

    @intersector([("count", int64)])
    class CountTriangles(BasicIntersector):
        def __init__(self):
            self.count = 0

        def triangle(self, ray, tri):
            self.count += 1
            return intersect_triangle(ray, tri)

Queries and traversal call hooks through :func:`triangle_hook` and
:func:`box_hook`. Those are resolved per intersector *type* when numba compiles
the query, so there is no registration table and no runtime check. Hooks
inherited from :class:`BasicIntersector` compile to a direct kernel call, same
as passing no intersector at all.
"""
from __future__ import annotations

import math

import numpy as np
from numba import float32, int64, njit, types
from numba.core.errors import TypingError
from numba.experimental import jitclass
from numba.extending import overload

from .geometry import HitRecord, barycentric_lerp
from .kernels import intersect_aabb, intersect_triangle
from .texture import tex2d, texture_list, texture_type

HOOKS = ("triangle", "box")


class BasicIntersector:
    """Base for custom intersectors; every hook forwards to the default kernel."""

    def __init__(self):
        pass

    def triangle(self, ray, tri):
        return intersect_triangle(ray, tri)

    def box(self, ray, box, *args):
        return intersect_aabb(ray, box, *args)


def intersector(spec=()):
    """Compile a :class:`BasicIntersector` subclass into a jitclass.

    jitclass ignores base classes, so the class body is flattened along the
    MRO first; hooks that are still the base implementations are recorded so
    the dispatcher can bypass them.
    """

    def wrap(cls):
        if not issubclass(cls, BasicIntersector):
            raise TypeError("intersectors must derive from BasicIntersector")
        body = {}
        for klass in reversed(cls.__mro__[:-1]):
            for name, value in vars(klass).items():
                if name in ("__dict__", "__weakref__"):
                    continue
                body[name] = value
        flat = type(cls.__name__, (), body)
        flat.__module__ = cls.__module__
        flat.__qualname__ = cls.__qualname__
        return jitclass(list(spec))(flat)

    return wrap


def _is_default(isect, hook):
    method = isect.class_type.methods.get(hook)
    return method is None or method is getattr(BasicIntersector, hook)


def _no_intersector(isect):
    return isect is None or isinstance(isect, (types.NoneType, types.Omitted))


def triangle_hook(isect, ray, tri):
    """Ray/triangle test as seen by ``isect`` (compiled code only)."""
    raise NotImplementedError("triangle_hook is only callable from compiled code")


def box_hook(isect, ray, box, inv_dir):
    """Ray/box test as seen by ``isect`` (compiled code only)."""
    raise NotImplementedError("box_hook is only callable from compiled code")


def effective(isect):
    """``None`` for an intersector that overrides no hook, else ``isect`` (compiled code only)."""
    raise NotImplementedError("effective is only callable from compiled code")


@overload(effective, inline="always")
def _effective(isect):
    # erasing hook-free intersectors makes them compile to the intersector-free code
    if _no_intersector(isect) or (
        isinstance(isect, types.ClassInstanceType) and all(_is_default(isect, h) for h in HOOKS)
    ):
        return lambda isect: None
    return lambda isect: isect


@overload(triangle_hook, inline="always")
def _triangle_hook(isect, ray, tri):
    if _no_intersector(isect) or (isinstance(isect, types.ClassInstanceType) and _is_default(isect, "triangle")):
        return lambda isect, ray, tri: intersect_triangle(ray, tri)
    if isinstance(isect, types.ClassInstanceType):
        return lambda isect, ray, tri: isect.triangle(ray, tri)
    raise TypingError(f"{isect} is not an intersector")


@overload(box_hook, inline="always")
def _box_hook(isect, ray, box, inv_dir):
    if _no_intersector(isect) or (isinstance(isect, types.ClassInstanceType) and _is_default(isect, "box")):
        return lambda isect, ray, box, inv_dir: intersect_aabb(ray, box, inv_dir)
    if isinstance(isect, types.ClassInstanceType):
        return lambda isect, ray, box, inv_dir: isect.box(ray, box, inv_dir)
    raise TypingError(f"{isect} is not an intersector")


@intersector()
class DefaultIntersector(BasicIntersector):
    pass


@njit(inline="always")
def _cleared(hr):
    return HitRecord(False, hr.t, hr.prim_id, hr.geom_id, hr.u, hr.v)


@intersector(
    [
        ("textures", types.ListType(texture_type)),
        ("tex_coords", float32[:, ::1]),
        ("threshold", float32),
    ]
)
class AlphaMaskIntersector(BasicIntersector):
    """Rejects triangle hits where the geometry's texture alpha is below ``threshold``.

    ``textures`` is indexed by ``geom_id``; ``tex_coords`` holds three rows per
    primitive, ``3 * prim_id`` to ``3 * prim_id + 2``. Use
    :func:`alpha_mask_intersector` to build one from plain Python lists.
    """

    def __init__(self, textures, tex_coords, threshold):
        self.textures = textures
        self.tex_coords = tex_coords
        self.threshold = threshold

    def triangle(self, ray, tri):
        hr = intersect_triangle(ray, tri)
        if not hr.hit:
            return hr
        tc = self.tex_coords
        p = 3 * hr.prim_id
        coord = barycentric_lerp(
            (tc[p, 0], tc[p, 1]), (tc[p + 1, 0], tc[p + 1, 1]), (tc[p + 2, 0], tc[p + 2, 1]), hr.u, hr.v
        )
        color = tex2d(self.textures[hr.geom_id], coord)
        if color[3] >= self.threshold:
            return hr
        return _cleared(hr)


def alpha_mask_intersector(textures, tex_coords, threshold=0.01):
    tex_coords = np.ascontiguousarray(tex_coords, dtype=np.float32).reshape(-1, 2)
    return AlphaMaskIntersector(texture_list(textures), tex_coords, np.float32(threshold))


@intersector([("checker_frequency", int64)])
class ProceduralMaskIntersector(BasicIntersector):
    """Barycentric checkerboard: keeps hits where ``floor(u*M) + floor(v*M)`` is even."""

    def __init__(self, checker_frequency=8):
        if checker_frequency < 1:
            raise ValueError("checker_frequency must be positive")
        self.checker_frequency = checker_frequency

    def triangle(self, ray, tri):
        hr = intersect_triangle(ray, tri)
        if not hr.hit:
            return hr
        m = self.checker_frequency
        cell = int(math.floor(np.float64(hr.u) * m)) + int(math.floor(np.float64(hr.v) * m))
        if cell % 2 == 0:
            return hr
        return _cleared(hr)


@intersector([("num_boxes", int64), ("num_tris", int64)])
class CostCountingIntersector(BasicIntersector):
    """Counts box and triangle tests; results are those of the default kernels."""

    def __init__(self):
        self.num_boxes = 0
        self.num_tris = 0

    def box(self, ray, box, *args):
        self.num_boxes += 1
        return intersect_aabb(ray, box, *args)

    def triangle(self, ray, tri):
        self.num_tris += 1
        return intersect_triangle(ray, tri)
