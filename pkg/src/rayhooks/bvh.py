"""Binned-SAH BVH construction and while-while traversal with intersector hooks.

Both ``intersect`` call sites of the traversal, the one against node bounds and
the one against leaf primitives, go through :func:`box_hook` and
:func:`triangle_hook`, so the supplied intersector replaces them statically.

Traversal convention: the root bounds are tested exactly once before the loop;
every inner node visited then tests both children, so a ray costs at most
``2 * inner_nodes + 1`` box tests.
"""
from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from numba import njit

from .geometry import Aabb, Ray, TriangleArray, get_triangle, miss_record, primitive_bounds
from .intersector import box_hook, triangle_hook
from .kernels import inverse_direction

STACK_SIZE = 64


@dataclass(frozen=True)
class BuildParams:
    max_leaf_size: int = 4
    sah_bin_count: int = 16
    traversal_cost: float = 1.0
    intersection_cost: float = 1.0

    def __post_init__(self):
        if self.max_leaf_size < 1 or self.sah_bin_count < 1:
            raise ValueError("max_leaf_size and sah_bin_count must be positive")


class Bvh(namedtuple("Bvh", "node_min node_max left right split_axis first_prim prim_count prims")):
    """Flat node arrays (node 0 is the root) plus leaf-ordered primitives.

    A node is a leaf iff ``prim_count > 0``; its primitives are
    ``prims[first_prim:first_prim + prim_count]``. Inner nodes use ``left``,
    ``right`` and ``split_axis``.
    """

    __slots__ = ()

    @property
    def node_count(self):
        return len(self.prim_count)

    @property
    def inner_count(self):
        return int(np.count_nonzero(self.prim_count == 0))

    def node(self, i) -> "BvhNode":
        bounds = Aabb(tuple(self.node_min[i]), tuple(self.node_max[i]))
        if self.prim_count[i] > 0:
            return BvhNode(bounds, first_prim=int(self.first_prim[i]), prim_count=int(self.prim_count[i]))
        return BvhNode(bounds, left=int(self.left[i]), right=int(self.right[i]), split_axis=int(self.split_axis[i]))


@dataclass(frozen=True)
class BvhNode:
    bounds: Aabb
    left: int = -1
    right: int = -1
    split_axis: int = -1
    first_prim: int = -1
    prim_count: int = 0

    @property
    def is_leaf(self):
        return self.prim_count > 0


class EmptySceneError(ValueError):
    pass


@njit(cache=True)
def _range_bounds(bmin, bmax, order, s, e):
    lo = np.full(3, np.inf)
    hi = np.full(3, -np.inf)
    for k in range(s, e):
        p = order[k]
        for a in range(3):
            lo[a] = min(lo[a], bmin[p, a])
            hi[a] = max(hi[a], bmax[p, a])
    return lo, hi


@njit(inline="always")
def _area(lo, hi):
    dx = hi[0] - lo[0]
    dy = hi[1] - lo[1]
    dz = hi[2] - lo[2]
    if dx < 0 or dy < 0 or dz < 0:
        return 0.0
    return 2.0 * (dx * dy + dx * dz + dy * dz)


@njit(inline="always")
def _bin_of(c, cmin, scale, nbins):
    b = int((c - cmin) * scale)
    return min(max(b, 0), nbins - 1)


@njit(cache=True)
def _build(bmin, bmax, max_leaf, nbins, c_trav, c_isect):
    n = bmin.shape[0]
    cap = 2 * n
    node_min = np.empty((cap, 3), np.float32)
    node_max = np.empty((cap, 3), np.float32)
    left = np.full(cap, -1, np.int64)
    right = np.full(cap, -1, np.int64)
    axis_of = np.full(cap, -1, np.int64)
    first = np.full(cap, -1, np.int64)
    count = np.zeros(cap, np.int64)
    order = np.arange(n)
    cent = 0.5 * (bmin.astype(np.float64) + bmax.astype(np.float64))

    bin_cnt = np.empty(nbins, np.int64)
    bin_lo = np.empty((nbins, 3))
    bin_hi = np.empty((nbins, 3))
    right_area = np.empty(nbins)
    right_cnt = np.empty(nbins, np.int64)

    stack = [(0, 0, n)]
    used = 1
    while len(stack) > 0:
        node, s, e = stack.pop()
        lo, hi = _range_bounds(bmin, bmax, order, s, e)
        node_min[node] = lo
        node_max[node] = hi
        m = e - s
        if m <= max_leaf:
            first[node] = s
            count[node] = m
            continue

        clo = np.full(3, np.inf)
        chi = np.full(3, -np.inf)
        for k in range(s, e):
            p = order[k]
            for a in range(3):
                clo[a] = min(clo[a], cent[p, a])
                chi[a] = max(chi[a], cent[p, a])

        node_area = _area(lo, hi)
        best_cost = np.inf
        best_axis = -1
        best_split = -1
        for a in range(3):
            extent = chi[a] - clo[a]
            if not extent > 0:
                continue
            scale = nbins / extent
            bin_cnt[:] = 0
            bin_lo[:] = np.inf
            bin_hi[:] = -np.inf
            for k in range(s, e):
                p = order[k]
                b = _bin_of(cent[p, a], clo[a], scale, nbins)
                bin_cnt[b] += 1
                for j in range(3):
                    bin_lo[b, j] = min(bin_lo[b, j], bmin[p, j])
                    bin_hi[b, j] = max(bin_hi[b, j], bmax[p, j])
            # suffix sweep: right side of boundary i is bins i..nbins-1
            rlo = np.full(3, np.inf)
            rhi = np.full(3, -np.inf)
            rc = 0
            for b in range(nbins - 1, 0, -1):
                rc += bin_cnt[b]
                for j in range(3):
                    rlo[j] = min(rlo[j], bin_lo[b, j])
                    rhi[j] = max(rhi[j], bin_hi[b, j])
                right_area[b] = _area(rlo, rhi)
                right_cnt[b] = rc
            llo = np.full(3, np.inf)
            lhi = np.full(3, -np.inf)
            lc = 0
            for b in range(1, nbins):
                lc += bin_cnt[b - 1]
                for j in range(3):
                    llo[j] = min(llo[j], bin_lo[b - 1, j])
                    lhi[j] = max(lhi[j], bin_hi[b - 1, j])
                if lc == 0 or right_cnt[b] == 0:
                    continue
                cost = c_trav * node_area + c_isect * (_area(llo, lhi) * lc + right_area[b] * right_cnt[b])
                if cost < best_cost:
                    best_cost = cost
                    best_axis = a
                    best_split = b

        mid = s + m // 2
        if best_axis >= 0:
            a = best_axis
            scale = nbins / (chi[a] - clo[a])
            i = s
            j = e - 1
            while i <= j:
                if _bin_of(cent[order[i], a], clo[a], scale, nbins) < best_split:
                    i += 1
                else:
                    order[i], order[j] = order[j], order[i]
                    j -= 1
            mid = i
            axis_of[node] = a
        else:
            # coincident centroids: median split in array order
            axis_of[node] = int(np.argmax(hi - lo))

        left[node] = used
        right[node] = used + 1
        stack.append((used + 1, mid, e))
        stack.append((used, s, mid))
        used += 2

    return (
        node_min[:used].copy(), node_max[:used].copy(), left[:used].copy(), right[:used].copy(),
        axis_of[:used].copy(), first[:used].copy(), count[:used].copy(), order,
    )


def build_bvh(prims: TriangleArray, params: BuildParams | None = None) -> Bvh:
    params = params or BuildParams()
    n = len(prims.prim_id)
    if n == 0:
        raise EmptySceneError("empty scene")
    bmin, bmax = primitive_bounds(prims)
    node_min, node_max, left, right, axis, first, count, order = _build(
        bmin, bmax, params.max_leaf_size, params.sah_bin_count,
        float(params.traversal_cost), float(params.intersection_cost),
    )
    reordered = TriangleArray(*(np.ascontiguousarray(a[order]) for a in prims))
    return Bvh(node_min, node_max, left, right, axis, first, count, reordered)


def validate_bvh(bvh: Bvh, max_leaf_size: int | None = None, slack: float = 1e-5) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    n_nodes = bvh.node_count
    n_prims = len(bvh.prims.prim_id)
    if n_nodes == 0:
        return ["bvh has no nodes"]
    pmin, pmax = primitive_bounds(bvh.prims)
    seen_nodes = np.zeros(n_nodes, dtype=bool)
    covered = np.zeros(n_prims, dtype=np.int64)
    parent_bounds = {0: None}
    stack = [0]
    while stack:
        i = stack.pop()
        if seen_nodes[i]:
            problems.append(f"node {i}: reached twice (cycle or shared child)")
            continue
        seen_nodes[i] = True
        lo, hi = bvh.node_min[i], bvh.node_max[i]
        if not np.all(lo <= hi):
            problems.append(f"node {i}: min exceeds max")
        outer = parent_bounds.pop(i)
        if outer is not None:
            olo, ohi = outer
            if np.any(lo < olo - slack) or np.any(hi > ohi + slack):
                problems.append(f"node {i}: bounds not contained in parent bounds")
        c = int(bvh.prim_count[i])
        if c > 0:
            f = int(bvh.first_prim[i])
            if f < 0 or f + c > n_prims:
                problems.append(f"node {i}: primitive range [{f}, {f + c}) out of bounds")
                continue
            if max_leaf_size is not None and c > max_leaf_size:
                problems.append(f"node {i}: leaf holds {c} primitives, more than {max_leaf_size}")
            covered[f:f + c] += 1
            if np.any(pmin[f:f + c] < lo - slack) or np.any(pmax[f:f + c] > hi + slack):
                problems.append(f"node {i}: primitive bounds not contained in leaf bounds")
        else:
            if c < 0:
                problems.append(f"node {i}: negative primitive count")
                continue
            kids = (int(bvh.left[i]), int(bvh.right[i]))
            if int(bvh.split_axis[i]) not in (0, 1, 2):
                problems.append(f"node {i}: split axis {int(bvh.split_axis[i])} not in 0..2")
            for k in kids:
                if not 0 < k < n_nodes:
                    problems.append(f"node {i}: child index {k} out of range")
                    continue
                parent_bounds[k] = (lo, hi)
                stack.append(k)
    unreached = np.flatnonzero(~seen_nodes)
    if len(unreached):
        problems.append(f"nodes unreachable from root: {unreached[:8].tolist()}")
    if np.any(covered != 1):
        bad = np.flatnonzero(covered != 1)
        problems.append(f"primitive slots not covered by exactly one leaf: {bad[:8].tolist()}")
    if len(np.unique(bvh.prims.prim_id)) != n_prims:
        problems.append("duplicate prim_id in reordered primitives")
    return problems


@njit(inline="always")
def _node_box(bvh, i):
    lo, hi = bvh.node_min, bvh.node_max
    return Aabb((lo[i, 0], lo[i, 1], lo[i, 2]), (hi[i, 0], hi[i, 1], hi[i, 2]))


@njit(inline="always")
def _with_tmax(ray, tmax):
    return Ray(ray.origin, ray.direction, ray.tmin, tmax)


@njit(inline="always")
def _descend(ray, bvh, isect, inv, node, stack, stack_t, sp):
    """Walk inner nodes from ``node`` until a leaf; returns (leaf or -1, sp)."""
    while bvh.prim_count[node] == 0:
        l = bvh.left[node]
        r = bvh.right[node]
        hl = box_hook(isect, ray, _node_box(bvh, l), inv)
        hr = box_hook(isect, ray, _node_box(bvh, r), inv)
        if ray.direction[bvh.split_axis[node]] < 0:
            near, far, hn, hf = r, l, hr, hl
        else:
            near, far, hn, hf = l, r, hl, hr
        if hn.hit:
            if hf.hit:
                if sp == STACK_SIZE:
                    raise ValueError("BVH too deep")
                stack[sp] = far
                stack_t[sp] = hf.tnear
                sp += 1
            node = near
        elif hf.hit:
            node = far
        else:
            return -1, sp
    return node, sp


@njit(inline="always")
def _pop(ray, stack, stack_t, sp):
    while sp > 0:
        sp -= 1
        # entry beyond the current tmax cannot hold anything nearer
        if stack_t[sp] <= ray.tmax:
            return stack[sp], sp
    return -1, sp


@njit(error_model="numpy")
def intersect_bvh_closest(ray, bvh, isect=None):
    best = miss_record()
    inv = inverse_direction(ray)
    if not box_hook(isect, ray, _node_box(bvh, 0), inv).hit:
        return best
    stack = np.empty(STACK_SIZE, np.int64)
    stack_t = np.empty(STACK_SIZE, np.float32)
    sp = 0
    node = 0
    while node >= 0:
        node, sp = _descend(ray, bvh, isect, inv, node, stack, stack_t, sp)
        if node >= 0:
            f = bvh.first_prim[node]
            for i in range(f, f + bvh.prim_count[node]):
                hr = triangle_hook(isect, ray, get_triangle(bvh.prims, i))
                if hr.hit and hr.t < best.t:
                    best = hr
                    ray = _with_tmax(ray, hr.t)
        node, sp = _pop(ray, stack, stack_t, sp)
    return best


@njit(error_model="numpy")
def intersect_bvh_any(ray, bvh, isect=None):
    inv = inverse_direction(ray)
    if not box_hook(isect, ray, _node_box(bvh, 0), inv).hit:
        return miss_record()
    stack = np.empty(STACK_SIZE, np.int64)
    stack_t = np.empty(STACK_SIZE, np.float32)
    sp = 0
    node = 0
    while node >= 0:
        node, sp = _descend(ray, bvh, isect, inv, node, stack, stack_t, sp)
        if node >= 0:
            f = bvh.first_prim[node]
            for i in range(f, f + bvh.prim_count[node]):
                hr = triangle_hook(isect, ray, get_triangle(bvh.prims, i))
                if hr.hit:
                    return hr
        node, sp = _pop(ray, stack, stack_t, sp)
    return miss_record()


@njit(inline="always")
def empty_hit_list():
    return [miss_record() for _ in range(0)]


@njit(inline="always")
def insert_sorted(buf, hr, n):
    """Insert into an ascending-t buffer capped at ``n`` entries."""
    k = len(buf)
    if k == n and not hr.t < buf[k - 1].t:
        return
    i = k
    while i > 0 and buf[i - 1].t > hr.t:
        i -= 1
    buf.insert(i, hr)
    if len(buf) > n:
        buf.pop()


@njit(error_model="numpy")
def intersect_bvh_multi(ray, bvh, isect, n):
    if n < 1:
        raise ValueError("multi-hit requires n >= 1")
    buf = empty_hit_list()
    inv = inverse_direction(ray)
    if not box_hook(isect, ray, _node_box(bvh, 0), inv).hit:
        return buf
    stack = np.empty(STACK_SIZE, np.int64)
    stack_t = np.empty(STACK_SIZE, np.float32)
    sp = 0
    node = 0
    while node >= 0:
        node, sp = _descend(ray, bvh, isect, inv, node, stack, stack_t, sp)
        if node >= 0:
            f = bvh.first_prim[node]
            for i in range(f, f + bvh.prim_count[node]):
                hr = triangle_hook(isect, ray, get_triangle(bvh.prims, i))
                if hr.hit:
                    insert_sorted(buf, hr, n)
                    if len(buf) == n and buf[n - 1].t < ray.tmax:
                        ray = _with_tmax(ray, buf[n - 1].t)
        node, sp = _pop(ray, stack, stack_t, sp)
    return buf
