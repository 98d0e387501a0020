import logging

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from rayhooks.geometry import triangle_vertices
from rayhooks.scene_io import (
    ImageError,
    SceneError,
    decode_image,
    encode_pam,
    encode_ppm,
    load_image,
    load_obj,
    save_image,
    write_obj,
)

QUAD = """v 0 0 0
v 1 0 0
v 1 1 0
v 0 1 0
vt 0 0
vt 1 0
vt 1 1
vt 0 1
f 1/1 2/2 3/3 4/4
"""


def write(tmp_path, text, name="scene.obj"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_quad_fan_triangulation(tmp_path):
    scene = load_obj(write(tmp_path, QUAD))
    assert scene.num_triangles == 2
    assert scene.tex_coords.shape == (6, 2)
    v = triangle_vertices(scene.triangles)
    np.testing.assert_array_equal(v[0], [(0, 0, 0), (1, 0, 0), (1, 1, 0)])
    np.testing.assert_array_equal(v[1], [(0, 0, 0), (1, 1, 0), (0, 1, 0)])
    # vt is flipped to the top-row-first texture convention
    np.testing.assert_array_equal(scene.tex_coords, [(0, 1), (1, 1), (1, 0), (0, 1), (1, 0), (0, 0)])
    assert list(scene.triangles.prim_id) == [0, 1]
    assert len(scene.textures) == 1 and scene.textures[0].texels.shape == (1, 1, 4)


@pytest.mark.parametrize("face", ["f 1 2 0", "f 1 2 5", "f 1 2 -5", "f 1 2", "f 1 x 3", "f 1/9 2 3"])
def test_bad_faces_name_the_line(tmp_path, face):
    text = "v 0 0 0\nv 1 0 0\n# comment\nv 0 1 0\n" + face + "\n"
    with pytest.raises(SceneError, match="line 5"):
        load_obj(write(tmp_path, text))


def test_unreadable_file(tmp_path):
    with pytest.raises(SceneError, match="cannot read"):
        load_obj(tmp_path / "missing.obj")


def test_negative_indices_and_missing_vt(tmp_path):
    text = "v 0 0 0\nv 2 0 0\nv 0 2 0\nvt 0.5 0.25\nf -3 -2/-1 -1\n"
    scene = load_obj(write(tmp_path, text))
    np.testing.assert_array_equal(triangle_vertices(scene.triangles)[0], [(0, 0, 0), (2, 0, 0), (0, 2, 0)])
    np.testing.assert_array_equal(scene.tex_coords, [(0, 0), (0.5, 0.75), (0, 0)])


def test_degenerate_triangles_dropped(tmp_path, caplog):
    text = "v 0 0 0\nv 1 0 0\nv 2 0 0\nv 0 1 0\nf 1 2 3\nf 1 2 4\n"
    with caplog.at_level(logging.WARNING):
        scene = load_obj(write(tmp_path, text))
    assert scene.num_triangles == 1 and scene.dropped_degenerate == 1
    assert scene.tex_coords.shape == (3, 2)
    assert "degenerate" in caplog.text


def test_groups_materials_and_overrides(tmp_path):
    red = np.zeros((1, 2, 3))
    red[..., 0] = 1
    save_image(red, tmp_path / "red.ppm")
    mask = np.zeros((1, 2, 4))
    mask[0, 1] = 1
    save_image(mask, tmp_path / "mask.pam")
    blue = np.zeros((1, 1, 3))
    blue[..., 2] = 1
    save_image(blue, tmp_path / "blue.ppm")
    (tmp_path / "m.mtl").write_text("newmtl leaf\nmap_Kd red.ppm\nmap_d mask.pam\n\nnewmtl bare\nKd 1 0 0\n")
    text = "mtllib m.mtl\nv 0 0 0\nv 1 0 0\nv 0 1 0\ng a\nusemtl leaf\nf 1 2 3\ng b\nf 1 2 3\nusemtl bare\nf 1 3 2\ng a\nusemtl leaf\nf 2 3 1\n"
    path = write(tmp_path, text)
    scene = load_obj(path)
    assert list(scene.triangles.geom_id) == [0, 1, 2, 0]
    assert len(scene.textures) == 3
    leaf = scene.textures[0].texels
    np.testing.assert_array_equal(leaf[0, :, :3], [(1, 0, 0), (1, 0, 0)])
    # map_d alpha is taken from the mask's alpha channel
    np.testing.assert_array_equal(leaf[0, :, 3], [0, 1])
    np.testing.assert_array_equal(scene.textures[2].texels, np.ones((1, 1, 4)))
    over = load_obj(path, material_overrides={"b": str(tmp_path / "blue.ppm")})
    np.testing.assert_array_equal(over.textures[1].texels[0, 0], (0, 0, 1, 1))
    np.testing.assert_array_equal(over.textures[0].texels, leaf)


def test_round_trip(tmp_path, rng):
    verts = rng.uniform(-100, 100, (200, 3, 3))
    uv = rng.random((200, 3, 2))
    write_obj(tmp_path / "r.obj", verts, uv, groups=["g%d" % (i // 50) for i in range(200)])
    scene = load_obj(tmp_path / "r.obj")
    np.testing.assert_allclose(triangle_vertices(scene.triangles), verts, rtol=1e-6, atol=1e-5)
    np.testing.assert_allclose(scene.tex_coords, uv.reshape(-1, 2), atol=1e-6)
    assert len(scene.textures) == 4


@st.composite
def obj_files(draw):
    nv = draw(st.integers(3, 12))
    coords = st.floats(-10, 10, allow_nan=False).map(lambda x: round(x, 3))
    verts = [draw(st.tuples(coords, coords, coords)) for _ in range(nv)]
    nt = draw(st.integers(0, 5))
    uvs = [draw(st.tuples(st.floats(0, 1), st.floats(0, 1))) for _ in range(nt)]
    lines = ["v %r %r %r" % v for v in verts] + ["vt %r %r" % t for t in uvs]
    for _ in range(draw(st.integers(0, 8))):
        if draw(st.booleans()):
            lines.append("g grp%d" % draw(st.integers(0, 2)))
        k = draw(st.integers(3, 6))
        corners = []
        for _ in range(k):
            vi = draw(st.integers(1, nv))
            vi = vi if draw(st.booleans()) else vi - nv - 1
            tok = str(vi)
            if nt and draw(st.booleans()):
                tok += "/%d" % draw(st.integers(1, nt))
            corners.append(tok)
        lines.append("f " + " ".join(corners))
    return "\n".join(lines) + "\n"


@settings(max_examples=150, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(text=obj_files())
def test_loaded_scenes_satisfy_invariants(tmp_path, text):
    scene = load_obj(write(tmp_path, text, "fuzz.obj"))
    n = scene.num_triangles
    assert scene.tex_coords.shape == (3 * n, 2)
    if n:
        assert scene.triangles.geom_id.max() < len(scene.textures)
        v = triangle_vertices(scene.triangles)
        area = np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)
        assert (area > 0).all()
        assert sorted(scene.triangles.prim_id) == list(range(n))


@given(k=st.integers(3, 24), radius=st.floats(0.1, 100), phase=st.floats(0, 6.28))
@settings(max_examples=50, suppress_health_check=[HealthCheck.function_scoped_fixture])
def test_fan_preserves_polygon_area(tmp_path, k, radius, phase):
    ang = phase + 2 * np.pi * np.arange(k) / k
    pts = np.column_stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(k)])
    text = "".join("v %.17g %.17g %.17g\n" % tuple(p) for p in pts)
    text += "f " + " ".join(str(i + 1) for i in range(k)) + "\n"
    scene = load_obj(write(tmp_path, text, "poly.obj"))
    v = triangle_vertices(scene.triangles)
    signed = 0.5 * np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])[:, 2].sum()
    x, y = pts[:, 0], pts[:, 1]
    shoelace = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    assert abs(signed - shoelace) <= 1e-5 * abs(shoelace)


def test_ppm_example():
    tex = decode_image(b"P6\n2 1\n255\n" + bytes([255, 0, 0, 0, 255, 0]))
    np.testing.assert_array_equal(tex.texels[0], [(1, 0, 0, 1), (0, 1, 0, 1)])


def test_pam_alpha_example():
    data = b"P7\nWIDTH 1\nHEIGHT 1\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\nENDHDR\n" + bytes([0, 0, 0, 128])
    assert decode_image(data).texels[0, 0, 3] == np.float32(128 / 255)


def test_ppm_header_comments():
    tex = decode_image(b"P6 # made by hand\n1 # width\n1\n255\n" + bytes([1, 2, 3]))
    assert tuple(np.rint(tex.texels[0, 0] * 255)) == (1, 2, 3, 255)


@pytest.mark.parametrize(
    "data,message",
    [
        (b"P6\n2 1\n255\n" + bytes(5), "truncated"),
        (b"P6\n2 1\n65535\n" + bytes(12), "maxval"),
        (b"P5\n1 1\n255\n" + bytes(1), "unknown magic"),
        (b"P6\n2", "truncated"),
        (b"P7\nWIDTH 1\nHEIGHT 1\nDEPTH 4\nMAXVAL 255\nTUPLTYPE RGB_ALPHA\n", "truncated"),
        (b"P7\nWIDTH 1\nHEIGHT 1\nDEPTH 1\nMAXVAL 255\nTUPLTYPE GRAYSCALE\nENDHDR\n\0", "unsupported"),
    ],
)
def test_image_errors(data, message):
    with pytest.raises(ImageError, match=message):
        decode_image(data)


@pytest.mark.parametrize("suffix,depth,encode", [(".ppm", 3, encode_ppm), (".pam", 4, encode_pam)])
def test_image_round_trip_bytes(tmp_path, rng, suffix, depth, encode):
    pixels = rng.integers(0, 256, (7, 5, depth), dtype=np.uint8)
    path = tmp_path / ("img" + suffix)
    path.write_bytes(encode(pixels))
    tex = load_image(path)
    save_image(tex.texels[..., :depth], tmp_path / ("again" + suffix))
    assert (tmp_path / ("again" + suffix)).read_bytes() == path.read_bytes()


def test_load_image_names_path(tmp_path):
    (tmp_path / "bad.ppm").write_bytes(b"XX")
    with pytest.raises(ImageError, match="bad.ppm"):
        load_image(tmp_path / "bad.ppm")
