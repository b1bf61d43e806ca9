"""Ray-cast depth and instance-mask rendering of a scene graph.

Each pixel casts one ray through its center. Depth is the distance along
that ray to the nearest cuboid surface (meters, 0.0 where nothing is hit);
the mask holds the winning primitive's id. Rays are only cast inside the
screen rectangle spanned by a primitive's projected corners.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import NEAR_PLANE, CameraModel, SceneGraph, _Posed


@dataclass(frozen=True)
class DepthRaster:
    values: np.ndarray  # (height, width) float32

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class MaskRaster:
    values: np.ndarray  # (height, width) uint16, 0 = background

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


def screen_rect(camera: CameraModel, prim: _Posed) -> tuple[slice, slice] | None:
    """Pixel rows/cols that can see ``prim``; None if it is off screen."""
    col, row, z = camera.project(prim.vertices())
    if np.any(z <= NEAR_PLANE):
        # a corner behind the near plane makes the projected hull unbounded
        if np.all(z <= 0):
            return None
        return slice(0, camera.height), slice(0, camera.width)
    c0 = max(int(math.floor(col.min())) - 1, 0)
    c1 = min(int(math.ceil(col.max())) + 2, camera.width)
    r0 = max(int(math.floor(row.min())) - 1, 0)
    r1 = min(int(math.ceil(row.max())) + 2, camera.height)
    if c0 >= c1 or r0 >= r1:
        return None
    return slice(r0, r1), slice(c0, c1)


def ray_box_distance(origin: np.ndarray, dirs: np.ndarray, prim: _Posed) -> np.ndarray:
    """Entry distance of each ray into the cuboid (slab method); inf on miss
    or when the entry lies closer than the near plane. ``dirs`` has shape (..., 3)."""
    return _slab(origin, np.moveaxis(dirs, -1, 0), prim)


def _slab(origin: np.ndarray, comps: np.ndarray, prim: _Posed) -> np.ndarray:
    # comps: (3, ...) world-space ray components
    rot = prim.rotation()
    half = prim.half_extents
    o = rot.T @ (origin - np.asarray(prim.center))
    t_near = t_far = None
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(3):
            inv = comps[0] * rot[0, k]
            inv += comps[1] * rot[1, k]
            inv += comps[2] * rot[2, k]
            np.reciprocal(inv, out=inv)
            t1 = (-half[k] - o[k]) * inv
            inv *= half[k] - o[k]
            lo = np.minimum(t1, inv)
            hi = np.maximum(t1, inv, out=t1)
            if t_near is None:
                t_near, t_far = lo, hi
            else:
                np.maximum(t_near, lo, out=t_near)
                np.minimum(t_far, hi, out=t_far)
    miss = ~((t_near <= t_far) & (t_near >= NEAR_PLANE))
    t_near[miss] = np.inf
    return t_near


def _slab_grid(origin: np.ndarray, camera: CameraModel, rows: slice, cols: slice, prim: _Posed) -> np.ndarray:
    """``_slab`` for the pixel grid ``rows x cols``. Each unnormalized ray's
    component along a box axis splits into a row term plus a column term, so
    no per-pixel direction array is built."""
    forward, right, up = camera.basis()
    x, y = camera.image_plane(rows, cols)
    rot = prim.rotation()
    half = prim.half_extents
    o = rot.T @ (origin - np.asarray(prim.center))
    fk, rk, uk = forward @ rot, right @ rot, up @ rot
    t_near = t_far = None
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(3):
            inv = np.add.outer(y * uk[k] + fk[k], x * rk[k])
            np.reciprocal(inv, out=inv)
            t1 = (-half[k] - o[k]) * inv
            inv *= half[k] - o[k]
            lo = np.minimum(t1, inv)
            hi = np.maximum(t1, inv, out=t1)
            if t_near is None:
                t_near, t_far = lo, hi
            else:
                np.maximum(t_near, lo, out=t_near)
                np.minimum(t_far, hi, out=t_far)
    hit = t_near <= t_far
    # forward, right and up are orthonormal, so the ray length is separable too
    t_near *= np.sqrt(np.add.outer(y * y, 1.0 + x * x))
    hit &= t_near >= NEAR_PLANE
    t_near[~hit] = np.inf
    return t_near


def render(scene: SceneGraph) -> tuple[DepthRaster, MaskRaster]:
    camera = scene.camera
    camera.basis()  # raises DegenerateCamera
    h, w = camera.height, camera.width
    depth = np.zeros((h, w), dtype=np.float32)
    mask = np.zeros((h, w), dtype=np.uint16)
    visible = [(prim, rect) for prim in scene.primitives() if (rect := screen_rect(camera, prim)) is not None]
    if not visible:
        return DepthRaster(depth), MaskRaster(mask)
    # z-buffer only over the union of the primitives' rects
    r0 = min(rect[0].start for _, rect in visible)
    r1 = max(rect[0].stop for _, rect in visible)
    c0 = min(rect[1].start for _, rect in visible)
    c1 = max(rect[1].stop for _, rect in visible)
    zbuf = np.full((r1 - r0, c1 - c0), np.inf)
    sub_mask = mask[r0:r1, c0:c1]
    origin = np.asarray(camera.position, dtype=np.float64)
    for prim, (rows, cols) in visible:
        local = slice(rows.start - r0, rows.stop - r0), slice(cols.start - c0, cols.stop - c0)
        t = _slab_grid(origin, camera, rows, cols, prim)
        sub_z = zbuf[local]
        closer = t < sub_z
        np.copyto(sub_z, t, where=closer)
        np.copyto(sub_mask[local], prim.mask_id, where=closer)
    np.copyto(depth[r0:r1, c0:c1], zbuf, where=sub_mask != 0, casting="same_kind")
    return DepthRaster(depth), MaskRaster(mask)
