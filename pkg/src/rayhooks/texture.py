"""2-D RGBA textures and point sampling.

Texel ``(i, j)`` has its center at ``((i + 0.5) / width, (j + 0.5) / height)``
and row 0 is the top of the image.
"""
from __future__ import annotations

import math
from collections import namedtuple

import numpy as np
from numba import njit, typed, typeof

WRAP, CLAMP = 0, 1
NEAREST, BILINEAR = 0, 1

ADDRESS_MODES = {"wrap": WRAP, "clamp": CLAMP}
FILTERS = {"nearest": NEAREST, "bilinear": BILINEAR}


def _enum(value, table, what):
    if isinstance(value, str):
        try:
            return table[value]
        except KeyError:
            raise ValueError(f"unknown {what} {value!r}") from None
    value = int(value)
    if value not in table.values():
        raise ValueError(f"unknown {what} {value!r}")
    return value


class Texture2D(namedtuple("Texture2D", "texels address_mode filter")):
    """RGBA image stored as a C-contiguous (height, width, 4) float32 array."""

    __slots__ = ()

    def __new__(cls, texels, address_mode=WRAP, filter=NEAREST):
        texels = np.ascontiguousarray(texels, dtype=np.float32)
        if texels.ndim != 3 or texels.shape[2] != 4 or texels.shape[0] < 1 or texels.shape[1] < 1:
            raise ValueError(f"texels must have shape (height, width, 4), got {texels.shape}")
        if not ((texels >= 0) & (texels <= 1)).all():
            raise ValueError("texel channels must lie in [0, 1]")
        return super().__new__(
            cls, texels, _enum(address_mode, ADDRESS_MODES, "address mode"), _enum(filter, FILTERS, "filter")
        )

    @property
    def width(self):
        return self.texels.shape[1]

    @property
    def height(self):
        return self.texels.shape[0]

    def with_modes(self, address_mode=None, filter=None):
        return Texture2D(
            self.texels,
            self.address_mode if address_mode is None else address_mode,
            self.filter if filter is None else filter,
        )


def solid_texture(rgba=(1.0, 1.0, 1.0, 1.0), **kw) -> Texture2D:
    return Texture2D(np.array(rgba, dtype=np.float32).reshape(1, 1, 4), **kw)


texture_type = typeof(solid_texture())


def texture_list(textures):
    """Typed list suitable for passing textures into compiled code."""
    out = typed.List.empty_list(texture_type)
    for tex in textures:
        out.append(tex if isinstance(tex, Texture2D) else Texture2D(*tex))
    return out


@njit(inline="always")
def _resolve(x, mode):
    if mode == WRAP:
        return x - math.floor(x)
    if x < 0.0:
        return 0.0
    if x >= 1.0:
        # largest double below 1
        return 0.9999999999999999
    return x


@njit(inline="always")
def _index(i, n, mode):
    if mode == WRAP:
        i %= n
        return i + n if i < 0 else i
    return min(max(i, 0), n - 1)


@njit(inline="always")
def _texel(texels, j, i):
    return (texels[j, i, 0], texels[j, i, 1], texels[j, i, 2], texels[j, i, 3])


@njit(inline="always")
def _mix(a, b, w):
    return a + (b - a) * w


@njit
def tex2d(tex, coord):
    """Sample ``tex`` at ``coord = (u, v)``; returns an RGBA tuple of float32."""
    texels = tex.texels
    h, w = texels.shape[0], texels.shape[1]
    x = _resolve(np.float64(coord[0]), tex.address_mode)
    y = _resolve(np.float64(coord[1]), tex.address_mode)
    if tex.filter == NEAREST:
        i = min(int(x * w), w - 1)
        j = min(int(y * h), h - 1)
        return _texel(texels, j, i)

    fx = x * w - 0.5
    fy = y * h - 0.5
    i0 = math.floor(fx)
    j0 = math.floor(fy)
    ax = fx - i0
    ay = fy - j0
    i0, j0 = int(i0), int(j0)
    i1 = _index(i0 + 1, w, tex.address_mode)
    j1 = _index(j0 + 1, h, tex.address_mode)
    i0 = _index(i0, w, tex.address_mode)
    j0 = _index(j0, h, tex.address_mode)
    c00 = _texel(texels, j0, i0)
    c10 = _texel(texels, j0, i1)
    c01 = _texel(texels, j1, i0)
    c11 = _texel(texels, j1, i1)
    r0 = _mix(_mix(np.float64(c00[0]), c10[0], ax), _mix(np.float64(c01[0]), c11[0], ax), ay)
    r1 = _mix(_mix(np.float64(c00[1]), c10[1], ax), _mix(np.float64(c01[1]), c11[1], ax), ay)
    r2 = _mix(_mix(np.float64(c00[2]), c10[2], ax), _mix(np.float64(c01[2]), c11[2], ax), ay)
    r3 = _mix(_mix(np.float64(c00[3]), c10[3], ax), _mix(np.float64(c01[3]), c11[3], ax), ay)
    return (np.float32(r0), np.float32(r1), np.float32(r2), np.float32(r3))
