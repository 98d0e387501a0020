"""Primary-ray renderer for the four demo modes.

* ``plain``: closest hit with the default intersector; alpha is ignored.
* ``alpha``: texture alpha masks cut holes, rays continue behind them.
* ``procedural``: barycentric checkerboard mask.
* ``heatmap``: per-pixel box/triangle test counts mapped to a color ramp.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .bvh import BuildParams, build_bvh
from .geometry import Ray, TMIN, INF32, barycentric_lerp
from .intersector import (
    AlphaMaskIntersector,
    CostCountingIntersector,
    DefaultIntersector,
    ProceduralMaskIntersector,
    alpha_mask_intersector,
)
from .queries import closest_hit
from .scene_io import Scene, encode_ppm
from .texture import tex2d, texture_list

MODES = ("plain", "alpha", "procedural", "heatmap")


@dataclass(frozen=True)
class Camera:
    eye: tuple
    look_at: tuple
    up: tuple = (0.0, 1.0, 0.0)
    vertical_fov: float = 45.0
    width: int = 1024
    height: int = 768

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        if not 0 < self.vertical_fov < 180:
            raise ValueError("vertical_fov must lie in (0, 180) degrees")
        forward = np.subtract(self.look_at, self.eye, dtype=np.float64)
        if not np.any(forward):
            raise ValueError("eye and look_at coincide")
        if not np.any(np.cross(forward, np.asarray(self.up, dtype=np.float64))):
            raise ValueError("up is parallel to the view direction")

    def basis(self):
        """Orthonormal (right, up, forward), right-handed."""
        w = np.subtract(self.look_at, self.eye, dtype=np.float64)
        w /= np.linalg.norm(w)
        u = np.cross(w, np.asarray(self.up, dtype=np.float64))
        u /= np.linalg.norm(u)
        v = np.cross(u, w)
        return u, v, w

    def ray_directions(self):
        """(height, width, 3) float32 directions through pixel centers, top row first."""
        u, v, w = self.basis()
        half = math.tan(math.radians(self.vertical_fov) / 2)
        aspect = self.width / self.height
        sx = (2 * (np.arange(self.width) + 0.5) / self.width - 1) * half * aspect
        sy = (1 - 2 * (np.arange(self.height) + 0.5) / self.height) * half
        d = w + sx[None, :, None] * u + sy[:, None, None] * v
        return np.ascontiguousarray(d, dtype=np.float32)

    @classmethod
    def framing(cls, lo, hi, width=1024, height=768, vertical_fov=45.0, up=(0.0, 1.0, 0.0)):
        """Camera on +z looking at the center of the box ``[lo, hi]``, fitting it in view."""
        lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
        center = (lo + hi) / 2
        radius = max(np.linalg.norm(hi - lo) / 2, 1e-3)
        dist = radius / math.sin(math.radians(vertical_fov) / 2)
        eye = center + np.array([0.0, 0.0, dist])
        return cls(tuple(eye), tuple(center), up, vertical_fov, width, height)


@dataclass(frozen=True)
class RenderOptions:
    alpha_threshold: float = 0.01
    checker: int = 8
    filter: str = "nearest"
    heat_weight: float = 1.0
    background: tuple = (0.1, 0.1, 0.12)
    threads: int = 1
    build: BuildParams = field(default_factory=BuildParams)


@dataclass
class RenderResult:
    image: np.ndarray  # (H, W, 3) uint8
    hit_mask: np.ndarray  # (H, W) bool
    costs: np.ndarray | None = None  # (H, W, 2) int64: num_boxes, num_tris


@njit(inline="always")
def _pixel_ray(eye, dirs, y, x):
    return Ray(eye, (dirs[y, x, 0], dirs[y, x, 1], dirs[y, x, 2]), TMIN, INF32)


@njit(inline="always")
def _shade_rows(y0, y1, eye, dirs, bvhs, isect, tris, tex_coords, textures, bg, image, mask):
    for y in range(y0, y1):
        for x in range(dirs.shape[1]):
            ray = _pixel_ray(eye, dirs, y, x)
            hr = closest_hit(ray, bvhs, isect)
            if not hr.hit:
                image[y, x, :] = bg
                continue
            mask[y, x] = True
            p = hr.prim_id
            e1 = tris.e1[p]
            e2 = tris.e2[p]
            nx = e1[1] * e2[2] - e1[2] * e2[1]
            ny = e1[2] * e2[0] - e1[0] * e2[2]
            nz = e1[0] * e2[1] - e1[1] * e2[0]
            d = ray.direction
            cos = abs(nx * d[0] + ny * d[1] + nz * d[2]) / (
                math.sqrt(nx * nx + ny * ny + nz * nz) * math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
            )
            tc = tex_coords
            k = 3 * p
            coord = barycentric_lerp(
                (tc[k, 0], tc[k, 1]), (tc[k + 1, 0], tc[k + 1, 1]), (tc[k + 2, 0], tc[k + 2, 1]), hr.u, hr.v
            )
            color = tex2d(textures[hr.geom_id], coord)
            image[y, x, 0] = color[0] * cos
            image[y, x, 1] = color[1] * cos
            image[y, x, 2] = color[2] * cos


# One kernel per mode, each constructing its own intersector, so that numba can
# cache them on disk (jitclass arguments are not cacheable).


@njit(nogil=True, error_model="numpy", cache=True)
def _plain_rows(y0, y1, eye, dirs, bvhs, tris, tex_coords, textures, bg, image, mask, threshold, checker):
    _shade_rows(y0, y1, eye, dirs, bvhs, DefaultIntersector(), tris, tex_coords, textures, bg, image, mask)


@njit(nogil=True, error_model="numpy", cache=True)
def _alpha_rows(y0, y1, eye, dirs, bvhs, tris, tex_coords, textures, bg, image, mask, threshold, checker):
    isect = AlphaMaskIntersector(textures, tex_coords, threshold)
    _shade_rows(y0, y1, eye, dirs, bvhs, isect, tris, tex_coords, textures, bg, image, mask)


@njit(nogil=True, error_model="numpy", cache=True)
def _procedural_rows(y0, y1, eye, dirs, bvhs, tris, tex_coords, textures, bg, image, mask, threshold, checker):
    isect = ProceduralMaskIntersector(checker)
    _shade_rows(y0, y1, eye, dirs, bvhs, isect, tris, tex_coords, textures, bg, image, mask)


_SHADERS = {"plain": _plain_rows, "alpha": _alpha_rows, "procedural": _procedural_rows}


@njit(nogil=True, error_model="numpy", cache=True)
def _cost_rows(y0, y1, eye, dirs, bvhs, costs, mask):
    for y in range(y0, y1):
        for x in range(dirs.shape[1]):
            counter = CostCountingIntersector()
            hr = closest_hit(_pixel_ray(eye, dirs, y, x), bvhs, counter)
            costs[y, x, 0] = counter.num_boxes
            costs[y, x, 1] = counter.num_tris
            mask[y, x] = hr.hit


HEAT_STOPS = np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]])


def heat_colors(costs, weight=1.0):
    """Map ``weight * num_boxes + num_tris`` through blue -> green -> red, scaled by the frame max."""
    value = weight * costs[..., 0].astype(np.float64) + costs[..., 1]
    peak = value.max()
    s = value / peak if peak > 0 else np.zeros_like(value)
    x = np.clip(s, 0.0, 1.0) * (len(HEAT_STOPS) - 1)
    i = np.minimum(x.astype(np.int64), len(HEAT_STOPS) - 2)
    f = (x - i)[..., None]
    return HEAT_STOPS[i] * (1 - f) + HEAT_STOPS[i + 1] * f


def _row_chunks(height, threads):
    threads = max(1, min(threads, height))
    edges = np.linspace(0, height, threads + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_rows(kernel, height, threads, *args):
    chunks = _row_chunks(height, threads)
    if len(chunks) == 1:
        kernel(*chunks[0], *args)
        return
    with ThreadPoolExecutor(len(chunks)) as pool:
        for f in [pool.submit(kernel, y0, y1, *args) for y0, y1 in chunks]:
            f.result()


def make_intersector(mode, scene: Scene, options: RenderOptions):
    """The intersector a shading mode traces with (heatmap uses a fresh counter per pixel)."""
    if mode == "plain":
        return DefaultIntersector()
    if mode == "alpha":
        textures = [t.with_modes(filter=options.filter) for t in scene.textures]
        return alpha_mask_intersector(textures, scene.tex_coords, options.alpha_threshold)
    if mode == "procedural":
        return ProceduralMaskIntersector(options.checker)
    raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")


def render(scene: Scene, camera: Camera, mode: str, options: RenderOptions | None = None, bvh=None) -> RenderResult:
    options = options or RenderOptions()
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    bvh = bvh if bvh is not None else build_bvh(scene.triangles, options.build)
    bvhs = (bvh,)
    dirs = camera.ray_directions()
    eye = tuple(np.float32(c) for c in camera.eye)
    h, w = camera.height, camera.width
    mask = np.zeros((h, w), np.bool_)

    if mode == "heatmap":
        costs = np.zeros((h, w, 2), np.int64)
        _run_rows(_cost_rows, h, options.threads, eye, dirs, bvhs, costs, mask)
        image = np.rint(heat_colors(costs, options.heat_weight) * 255).astype(np.uint8)
        return RenderResult(image, mask, costs)

    textures = texture_list(t.with_modes(filter=options.filter) for t in scene.textures)
    shaded = np.zeros((h, w, 3), np.float32)
    bg = np.asarray(options.background, dtype=np.float32)
    _run_rows(
        _SHADERS[mode], h, options.threads, eye, dirs, bvhs, scene.triangles,
        np.ascontiguousarray(scene.tex_coords, dtype=np.float32), textures, bg, shaded, mask,
        np.float32(options.alpha_threshold), int(options.checker),
    )
    image = np.rint(np.clip(shaded, 0.0, 1.0) * 255).astype(np.uint8)
    return RenderResult(image, mask)


def write_image(image, path):
    """Binary PPM (P6), 8-bit, rows top to bottom."""
    with open(path, "wb") as f:
        f.write(encode_ppm(image))


def write_costs_csv(costs, path):
    h, w = costs.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    table = np.column_stack([xs.ravel(), ys.ravel(), costs[..., 0].ravel(), costs[..., 1].ravel()])
    np.savetxt(path, table, fmt="%d", delimiter=",", header="x,y,num_boxes,num_tris", comments="")
