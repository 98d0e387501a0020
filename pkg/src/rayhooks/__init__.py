"""Ray tracing queries whose triangle and box tests can be replaced by user intersectors."""
from .bvh import BuildParams, Bvh, build_bvh, validate_bvh
from .geometry import Aabb, HitRecord, Ray, Triangle, TriangleArray, make_triangle, triangle_array
from .intersector import (
    AlphaMaskIntersector,
    BasicIntersector,
    CostCountingIntersector,
    DefaultIntersector,
    ProceduralMaskIntersector,
    alpha_mask_intersector,
    intersector,
)
from .queries import any_hit, any_hit_batch, closest_hit, closest_hit_batch, multi_hit
from .scene_io import Scene, load_image, load_obj
from .texture import Texture2D, tex2d

__all__ = [
    "Aabb", "AlphaMaskIntersector", "BasicIntersector", "BuildParams", "Bvh", "CostCountingIntersector",
    "DefaultIntersector", "HitRecord", "ProceduralMaskIntersector", "Ray", "Scene", "Texture2D", "Triangle",
    "TriangleArray", "alpha_mask_intersector", "any_hit", "any_hit_batch", "build_bvh", "closest_hit",
    "closest_hit_batch", "intersector", "load_image", "load_obj", "make_triangle", "multi_hit", "tex2d",
    "triangle_array", "validate_bvh",
]
