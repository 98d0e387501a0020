"""Synthetic billboard scene: textured quads carrying leaf-shaped alpha masks.

The packaged copy under ``data/billboards`` is the output of
``write_billboard_scene(seed=7)``.
"""
from __future__ import annotations

import math
import os
from importlib import resources

import numpy as np

from .scene_io import save_image

TEXTURE_SIZE = 128


def leaf_texture(variant, size=TEXTURE_SIZE):
    """RGBA float array with a cluster of leaves; alpha is exactly 0 or 1."""
    rng = np.random.default_rng(100 + variant)
    ys, xs = (np.mgrid[0:size, 0:size] + 0.5) / size
    alpha = np.zeros((size, size), bool)
    shade = np.zeros((size, size))
    n_leaves = 3 + variant % 3
    for k in range(n_leaves):
        angle = 2 * math.pi * k / n_leaves + rng.uniform(-0.3, 0.3)
        length = rng.uniform(0.32, 0.45)
        width = rng.uniform(0.35, 0.5)
        # leaf-local coordinates: s along the midrib from the cluster center
        dx, dy = xs - 0.5, ys - 0.5
        s = (dx * math.cos(angle) + dy * math.sin(angle)) / length
        r = (-dx * math.sin(angle) + dy * math.cos(angle)) / length
        inside = (s > 0) & (s < 1) & (np.abs(r) < width * np.sin(np.pi * np.clip(s, 0, 1)) ** 0.7)
        vein = np.abs(r) < 0.02
        alpha |= inside
        shade = np.where(inside, 0.75 + 0.25 * s - 0.3 * vein, shade)
    stem = (np.abs(xs - 0.5) < 0.012) & (ys > 0.5)
    alpha |= stem
    shade = np.where(stem & (shade == 0), 0.5, shade)
    hue = [(0.25, 0.62, 0.18), (0.45, 0.68, 0.12), (0.18, 0.5, 0.3), (0.7, 0.55, 0.12)][variant % 4]
    rgba = np.zeros((size, size, 4))
    rgba[..., :3] = np.clip(shade[..., None] * np.asarray(hue), 0, 1)
    rgba[..., 3] = alpha
    return rgba


def billboard_quads(seed=7, count=40):
    """(count, 4, 3) quad corners and a texture variant per quad.

    Corners run counter-clockwise from the bottom-left, matching texture
    coordinates (0,0) (1,0) (1,1) (0,1) in OBJ orientation.
    """
    rng = np.random.default_rng(seed)
    quads = []
    variants = []
    for i in range(count):
        center = np.array([rng.uniform(-2.2, 2.2), rng.uniform(-1.4, 1.4), rng.uniform(-2.5, 1.0)])
        size = rng.uniform(0.9, 1.6)
        yaw = rng.uniform(-0.6, 0.6)
        roll = rng.uniform(-0.4, 0.4)
        right = np.array([math.cos(yaw), 0.0, math.sin(yaw)])
        up = np.array([0.0, 1.0, 0.0])
        right, up = right * math.cos(roll) + up * math.sin(roll), up * math.cos(roll) - right * math.sin(roll)
        h = size / 2
        corners = [center - h * right - h * up, center + h * right - h * up, center + h * right + h * up,
                   center - h * right + h * up]
        quads.append(corners)
        variants.append(i % 4)
    return np.array(quads), variants


def write_billboard_scene(out_dir, seed=7, count=40):
    """Write billboards.obj/.mtl plus one PAM texture per leaf variant; returns the OBJ path."""
    os.makedirs(out_dir, exist_ok=True)
    quads, variants = billboard_quads(seed, count)
    used = sorted(set(variants))
    mtl = []
    for v in used:
        save_image(leaf_texture(v), os.path.join(out_dir, f"leaf_{v}.pam"))
        mtl += [f"newmtl leaf_{v}", f"map_Kd leaf_{v}.pam", ""]
    with open(os.path.join(out_dir, "billboards.mtl"), "w", encoding="utf-8") as f:
        f.write("\n".join(mtl))

    lines = ["# synthetic billboards with leaf alpha masks", "mtllib billboards.mtl",
             "vt 0 0", "vt 1 0", "vt 1 1", "vt 0 1"]
    for q in quads:
        for p in q:
            lines.append("v %.6f %.6f %.6f" % tuple(p))
    for i, (q, v) in enumerate(zip(quads, variants)):
        b = 4 * i
        lines += [f"g billboard_{i}", f"usemtl leaf_{v}", f"f {b + 1}/1 {b + 2}/2 {b + 3}/3 {b + 4}/4"]
    path = os.path.join(out_dir, "billboards.obj")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return path


def shipped_scene_path():
    return str(resources.files("rayhooks") / "data" / "billboards" / "billboards.obj")
