"""Scene ingestion: a Wavefront OBJ subset plus binary PPM/PAM images."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .geometry import TriangleArray, degenerate_mask, triangle_array
from .texture import Texture2D, solid_texture

log = logging.getLogger(__name__)


class SceneError(ValueError):
    pass


class ImageError(ValueError):
    pass


@dataclass
class Scene:
    triangles: TriangleArray
    tex_coords: np.ndarray  # (3 * N, 2) float32, three rows per triangle
    textures: list  # Texture2D per geom_id
    group_names: list = field(default_factory=list)
    dropped_degenerate: int = 0

    def __post_init__(self):
        n = len(self.triangles.prim_id)
        if self.tex_coords.shape != (3 * n, 2):
            raise SceneError(f"expected {3 * n} texture coordinates, got {len(self.tex_coords)}")
        if n and self.triangles.geom_id.max() >= len(self.textures):
            raise SceneError("geom_id without a texture")

    @property
    def num_triangles(self):
        return len(self.triangles.prim_id)


# -- images -----------------------------------------------------------------

_WS = b" \t\r\n\v\f"


def _header_tokens(data, count, pos):
    """Read ``count`` whitespace-separated header tokens, honoring '#' comments."""
    tokens = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WS:
            pos += 1
        if pos < n and data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WS:
            pos += 1
        if start == pos:
            raise ImageError("truncated header")
        tokens.append(data[start:pos])
    return tokens, pos


def _to_int(token, what):
    try:
        return int(token)
    except ValueError:
        raise ImageError(f"bad {what} {token!r}") from None


def decode_image(data: bytes) -> Texture2D:
    magic = data[:2]
    if magic == b"P6":
        (w, h, maxval), pos = _header_tokens(data, 3, 2)
        w, h, maxval = _to_int(w, "width"), _to_int(h, "height"), _to_int(maxval, "maxval")
        if pos >= len(data) or data[pos] not in _WS:
            raise ImageError("truncated header")
        pos += 1
        depth = 3
    elif magic == b"P7":
        fields = {}
        pos = 2
        for line in data[2:].split(b"\n"):
            pos += len(line) + 1
            line = line.split(b"#", 1)[0].strip()
            if not line:
                continue
            if line == b"ENDHDR":
                break
            key, _, value = line.partition(b" ")
            fields[key.decode("ascii", "replace")] = value.strip()
        else:
            raise ImageError("truncated header: no ENDHDR")
        try:
            w, h = _to_int(fields["WIDTH"], "width"), _to_int(fields["HEIGHT"], "height")
            depth, maxval = _to_int(fields["DEPTH"], "depth"), _to_int(fields["MAXVAL"], "maxval")
        except KeyError as e:
            raise ImageError(f"PAM header missing {e.args[0]}") from None
        tupltype = fields.get("TUPLTYPE", b"").decode("ascii", "replace")
        if (depth, tupltype) not in ((3, "RGB"), (4, "RGB_ALPHA")):
            raise ImageError(f"unsupported PAM tuple type {tupltype!r} with depth {depth}")
    else:
        raise ImageError(f"unknown magic {magic!r}")
    if maxval != 255:
        raise ImageError(f"maxval {maxval} unsupported, expected 255")
    if w < 1 or h < 1:
        raise ImageError(f"bad image size {w}x{h}")
    size = w * h * depth
    payload = data[pos:pos + size]
    if len(payload) < size:
        raise ImageError("truncated payload")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(h, w, depth).astype(np.float32) / 255
    if depth == 3:
        pixels = np.concatenate([pixels, np.ones((h, w, 1), np.float32)], axis=2)
    return Texture2D(pixels)


def load_image(path) -> Texture2D:
    with open(path, "rb") as f:
        data = f.read()
    try:
        return decode_image(data)
    except ImageError as e:
        raise ImageError(f"{path}: {e}") from None


def to_bytes8(pixels) -> np.ndarray:
    """Quantize [0, 1] floats to uint8 (round to nearest); uint8 passes through."""
    pixels = np.asarray(pixels)
    if pixels.dtype == np.uint8:
        return pixels
    return np.rint(np.clip(pixels, 0.0, 1.0) * 255).astype(np.uint8)


def encode_ppm(pixels) -> bytes:
    rgb = to_bytes8(pixels)[..., :3]
    h, w = rgb.shape[:2]
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb).tobytes()


def encode_pam(pixels) -> bytes:
    rgba = to_bytes8(pixels)
    h, w, depth = rgba.shape
    tupltype = {3: b"RGB", 4: b"RGB_ALPHA"}[depth]
    header = b"P7\nWIDTH %d\nHEIGHT %d\nDEPTH %d\nMAXVAL 255\nTUPLTYPE %s\nENDHDR\n" % (w, h, depth, tupltype)
    return header + np.ascontiguousarray(rgba).tobytes()


def save_image(pixels, path):
    """Write (H, W, 3) as PPM or (H, W, 4) as PAM, chosen by the ``.pam`` suffix."""
    if isinstance(pixels, Texture2D):
        pixels = pixels.texels
    data = encode_pam(pixels) if str(path).lower().endswith(".pam") else encode_ppm(pixels)
    with open(path, "wb") as f:
        f.write(data)


# -- OBJ ----------------------------------------------------------------------


def _parse_mtl(path):
    """Material name -> {"map_Kd": path, "map_d": path}."""
    materials = {}
    current = None
    base = os.path.dirname(path)
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, rest = line.partition(" ")
            if key == "newmtl":
                current = materials.setdefault(rest.strip(), {})
            elif key in ("map_Kd", "map_d") and current is not None:
                # options like -clamp precede the file name; the name is last
                current[key] = os.path.join(base, rest.split()[-1])
    return materials


def _material_texture(maps, load):
    kd = load(maps["map_Kd"]) if "map_Kd" in maps else None
    d = load(maps["map_d"]) if "map_d" in maps else None
    if kd is None:
        return d
    if d is None:
        return kd
    if d.texels.shape != kd.texels.shape:
        raise SceneError(f"map_d {maps['map_d']} and map_Kd {maps['map_Kd']} differ in size")
    # alpha from map_d: its alpha channel when present, otherwise its red channel
    dt = d.texels
    alpha = dt[..., 3] if (dt[..., 3] < 1).any() else dt[..., 0]
    texels = kd.texels.copy()
    texels[..., 3] = alpha
    return Texture2D(texels)


def _resolve_index(token, count, lineno, what):
    try:
        i = int(token)
    except ValueError:
        raise SceneError(f"line {lineno}: malformed {what} index {token!r}") from None
    if i < 0:
        i += count
    else:
        i -= 1
    if not 0 <= i < count:
        raise SceneError(f"line {lineno}: {what} index {token} out of range (have {count})")
    return i


def load_obj(path, material_overrides=None) -> Scene:
    """Load triangles, texture coordinates and per-group textures from an OBJ file.

    Each distinct (object/group name, material) pair becomes one geom_id.
    ``material_overrides`` maps a group or material name to an image path that
    replaces whatever the MTL file says.
    """
    overrides = dict(material_overrides or {})
    verts, uvs = [], []
    tri_v, tri_t, tri_g = [], [], []
    groups = {}
    group_keys = []
    name, material = "default", None
    materials = {}
    base = os.path.dirname(os.fspath(path))
    try:
        f = open(path, encoding="utf-8")
    except OSError as e:
        raise SceneError(f"cannot read {path}: {e.strerror}") from None
    with f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, *args = line.split()
            try:
                if key == "v":
                    verts.append([float(a) for a in args[:3]])
                    if len(args) < 3:
                        raise ValueError
                elif key == "vt":
                    if not args:
                        raise ValueError
                    u = float(args[0])
                    v = float(args[1]) if len(args) > 1 else 0.0
                    uvs.append([u, 1.0 - v])
                elif key in ("o", "g"):
                    name = " ".join(args) or "default"
                elif key == "usemtl":
                    material = " ".join(args)
                elif key == "mtllib":
                    for lib in args:
                        materials.update(_parse_mtl(os.path.join(base, lib)))
                elif key == "f":
                    if len(args) < 3:
                        raise SceneError(f"line {lineno}: face needs at least 3 vertices")
                    corners = []
                    for tok in args:
                        parts = tok.split("/")
                        vi = _resolve_index(parts[0], len(verts), lineno, "vertex")
                        if len(parts) > 1 and parts[1]:
                            ti = _resolve_index(parts[1], len(uvs), lineno, "texcoord")
                        else:
                            ti = -1
                        corners.append((vi, ti))
                    gkey = (name, material)
                    if gkey not in groups:
                        groups[gkey] = len(group_keys)
                        group_keys.append(gkey)
                    g = groups[gkey]
                    for k in range(1, len(corners) - 1):
                        tri = (corners[0], corners[k], corners[k + 1])
                        tri_v.append([c[0] for c in tri])
                        tri_t.append([c[1] for c in tri])
                        tri_g.append(g)
            except ValueError as e:
                if isinstance(e, SceneError):
                    raise
                raise SceneError(f"line {lineno}: malformed {key} statement") from None

    verts = np.asarray(verts, dtype=np.float64).reshape(-1, 3)
    if not np.isfinite(verts).all():
        raise SceneError("non-finite vertex coordinates")
    uv_table = np.vstack([np.asarray(uvs, dtype=np.float32).reshape(-1, 2), np.zeros((1, 2), np.float32)])
    tri_v = np.asarray(tri_v, dtype=np.int64).reshape(-1, 3)
    tri_t = np.asarray(tri_t, dtype=np.int64).reshape(-1, 3)
    tri_g = np.asarray(tri_g, dtype=np.int64)

    corners = verts[tri_v].astype(np.float32)
    bad = degenerate_mask(corners)
    dropped = int(bad.sum())
    if dropped:
        log.warning("%s: dropped %d degenerate triangles", path, dropped)
    keep = ~bad
    tri_t, tri_g = tri_t[keep], tri_g[keep]
    triangles = triangle_array(corners[keep], geom_ids=tri_g)
    # missing vt -> the appended (0, 0) row
    tex_coords = np.ascontiguousarray(uv_table[tri_t.reshape(-1)])

    cache = {}

    def load(image_path):
        if image_path not in cache:
            cache[image_path] = load_image(image_path)
        return cache[image_path]

    textures = []
    for gname, mat in group_keys:
        image = overrides.get(gname) or overrides.get(mat)
        if image is not None:
            tex = load(image)
        elif materials.get(mat):
            tex = _material_texture(materials[mat], load)
        else:
            tex = None
        textures.append(tex if tex is not None else solid_texture())
    names = [g if m is None else f"{g}/{m}" for g, m in group_keys]
    return Scene(triangles, tex_coords, textures, names, dropped)


def write_obj(path, vertices, tex_coords=None, groups=None):
    """Write an OBJ with one ``v`` per triangle corner (used for round trips).

    ``vertices`` is (N, 3, 3); ``tex_coords`` (N, 3, 2) in texture space is
    written with v flipped back; ``groups`` gives a group name per triangle.
    """
    vertices = np.asarray(vertices, dtype=np.float64).reshape(-1, 3, 3)
    lines = []
    for p in vertices.reshape(-1, 3):
        lines.append("v %.9g %.9g %.9g" % tuple(p))
    if tex_coords is not None:
        for uv in np.asarray(tex_coords, dtype=np.float64).reshape(-1, 2):
            lines.append("vt %.9g %.9g" % (uv[0], 1.0 - uv[1]))
    current = None
    for i in range(len(vertices)):
        if groups is not None and groups[i] != current:
            current = groups[i]
            lines.append(f"g {current}")
        a, b, c = 3 * i + 1, 3 * i + 2, 3 * i + 3
        if tex_coords is not None:
            lines.append(f"f {a}/{a} {b}/{b} {c}/{c}")
        else:
            lines.append(f"f {a} {b} {c}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
