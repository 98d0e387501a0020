"""Command line entry point: ``rayhooks render ...`` and ``rayhooks scene ...``."""
from __future__ import annotations

import argparse
import logging
import sys
import time

from .bvh import BuildParams
from .geometry import triangle_vertices
from .render import MODES, Camera, RenderOptions, render, write_costs_csv, write_image
from .scene_io import load_obj
from .scenes import shipped_scene_path, write_billboard_scene


def _vec3(text):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}") from None
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return tuple(parts)


def _positive(kind):
    def parse(text):
        value = kind(text)
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value

    return parse


def build_parser():
    parser = argparse.ArgumentParser(prog="rayhooks", description="Render OBJ scenes through custom ray intersectors.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", help="render an OBJ scene to a PPM image")
    r.add_argument("--obj", help="scene file (default: the packaged billboard scene)")
    r.add_argument("--mode", choices=MODES, default="plain")
    r.add_argument("--out", required=True, help="output .ppm path")
    r.add_argument("--width", type=int, default=1024)
    r.add_argument("--height", type=int, default=768)
    r.add_argument("--eye", type=_vec3)
    r.add_argument("--lookat", type=_vec3)
    r.add_argument("--up", type=_vec3, default=(0.0, 1.0, 0.0))
    r.add_argument("--fov", type=float, default=45.0)
    r.add_argument("--alpha-threshold", type=float, default=0.01)
    r.add_argument("--checker", type=_positive(int), default=8)
    r.add_argument("--filter", choices=("nearest", "bilinear"), default="nearest")
    r.add_argument("--heat-weight", type=float, default=1.0)
    r.add_argument("--dump-costs", metavar="CSV", help="write per-pixel counters (heatmap mode)")
    r.add_argument("--threads", type=_positive(int), default=1)
    r.add_argument("--max-leaf", type=_positive(int), default=4)
    r.add_argument("--sah-bins", type=_positive(int), default=16)
    r.add_argument("--bg", type=_vec3, default=(0.1, 0.1, 0.12))

    s = sub.add_parser("scene", help="write the synthetic billboard scene")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--seed", type=int, default=7)
    s.add_argument("--count", type=_positive(int), default=40)
    return parser


def camera_for(args, scene):
    """Explicit --eye/--lookat win; anything missing is filled by framing the scene."""
    if args.eye is not None and args.lookat is not None:
        return Camera(args.eye, args.lookat, args.up, args.fov, args.width, args.height)
    corners = triangle_vertices(scene.triangles).reshape(-1, 3)
    auto = Camera.framing(corners.min(axis=0), corners.max(axis=0), args.width, args.height, args.fov, args.up)
    eye = args.eye if args.eye is not None else auto.eye
    look = args.lookat if args.lookat is not None else auto.look_at
    return Camera(eye, look, args.up, args.fov, args.width, args.height)


def run_render(args):
    if args.dump_costs and args.mode != "heatmap":
        raise ValueError("--dump-costs requires --mode heatmap")
    scene = load_obj(args.obj or shipped_scene_path())
    camera = camera_for(args, scene)
    options = RenderOptions(
        alpha_threshold=args.alpha_threshold,
        checker=args.checker,
        filter=args.filter,
        heat_weight=args.heat_weight,
        background=args.bg,
        threads=args.threads,
        build=BuildParams(max_leaf_size=args.max_leaf, sah_bin_count=args.sah_bins),
    )
    start = time.perf_counter()
    result = render(scene, camera, args.mode, options)
    logging.info("rendered %dx%d %s in %.2fs", camera.width, camera.height, args.mode, time.perf_counter() - start)
    write_image(result.image, args.out)
    if args.dump_costs:
        write_costs_csv(result.costs, args.dump_costs)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "render":
            run_render(args)
        else:
            print(write_billboard_scene(args.out_dir, args.seed, args.count))
    except (OSError, ValueError) as e:
        print(f"rayhooks: error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
