import numpy as np

from rayhooks.geometry import triangle_array


def random_triangles(rng, n, scale=None):
    """n random non-degenerate triangles scattered through the unit cube."""
    scale = 0.5 / n ** (1 / 3) if scale is None else scale
    centers = rng.random((n, 1, 3))
    verts = centers + scale * rng.standard_normal((n, 3, 3))
    return triangle_array(verts)


def random_rays(rng, n, spread=0.2):
    """Rays from a shell around the unit cube aimed at points inside it, plus a few strays."""
    d = rng.standard_normal((n, 3))
    origins = 0.5 + 2.0 * d / np.linalg.norm(d, axis=1, keepdims=True)
    targets = rng.uniform(-spread, 1 + spread, (n, 3))
    return origins.astype(np.float32), (targets - origins).astype(np.float32)


def quad(z, size=1.0, cx=0.0, cy=0.0):
    h = size / 2
    a, b, c, d = (cx - h, cy - h, z), (cx + h, cy - h, z), (cx + h, cy + h, z), (cx - h, cy + h, z)
    return [(a, b, c), (a, c, d)]


def quad_tex_coords():
    """Texture coordinates for the two triangles produced by :func:`quad`."""
    return [(0, 0), (1, 0), (1, 1), (0, 0), (1, 1), (0, 1)]


def stacked_quads(zs):
    return triangle_array(np.array([t for z in zs for t in quad(z)], dtype=np.float32))
