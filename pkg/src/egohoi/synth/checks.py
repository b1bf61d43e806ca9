"""Raster cross-checks for generated frames.

``analytic_depth`` intersects rays with a cuboid face by face (six plane
hits plus an in-rectangle test), a different route from the renderer's slab
method, so the two can check each other.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..annotations import FrameAnnotation, Violation
from .annotate import mask_boxes
from .geometry import HAND_MASK_IDS, NEAR_PLANE, SceneGraph, _Posed
from .rasters import RasterFormatError, read_depth, read_mask
from .render import DepthRaster, MaskRaster

DEPTH_TOLERANCE = 1e-4  # meters


def analytic_depth(origin: np.ndarray, dirs: np.ndarray, prim: _Posed) -> np.ndarray:
    """Nearest face-hit distance for each ray in ``dirs`` (shape (n, 3)); inf on miss."""
    rot = prim.rotation()
    half = np.asarray(prim.half_extents, dtype=np.float64)
    o = rot.T @ (np.asarray(origin, dtype=np.float64) - np.asarray(prim.center))
    d = np.asarray(dirs, dtype=np.float64) @ rot
    best = np.full(d.shape[0], np.inf)
    slack = 1e-9 * max(1.0, float(half.max()))
    for axis in range(3):
        others = [k for k in range(3) if k != axis]
        for sign in (-1.0, 1.0):
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (sign * half[axis] - o[axis]) / d[:, axis]
            p = o[None, :] + t[:, None] * d
            inside = np.all(np.abs(p[:, others]) <= half[others] + slack, axis=1)
            ok = inside & np.isfinite(t) & (t >= NEAR_PLANE)
            best = np.where(ok & (t < best), t, best)
    return best


def check_frame_rasters(frame: FrameAnnotation, scene: SceneGraph | None, depth: DepthRaster,
                        mask: MaskRaster) -> list[Violation]:
    """Box tightness against the mask and, given the scene, per-pixel depth."""
    fid = frame.frame_id
    out: list[Violation] = []
    if mask.values.shape != (frame.height, frame.width):
        out.append(Violation("MASK_SIZE", fid))
        return out
    if depth.values.shape != (frame.height, frame.width):
        out.append(Violation("DEPTH_SIZE", fid))
        return out

    boxes = mask_boxes(mask.values)
    boxes_slices = {k: (slice(int(b.y_min), int(b.y_max)), slice(int(b.x_min), int(b.x_max))) for k, (_, b) in boxes.items()}
    for obj in frame.objects:
        entry = boxes.get(obj.instance_id)
        if entry is None or entry[1] != obj.box:
            out.append(Violation("BBOX_TIGHTNESS", f"{fid}/object[{obj.instance_id}]"))
    for i, hand in enumerate(frame.hands):
        entry = boxes.get(HAND_MASK_IDS[hand.side])
        if entry is None or entry[1] != hand.box:
            out.append(Violation("BBOX_TIGHTNESS", f"{fid}/hand[{i}]"))

    background = mask.values == 0
    if np.any(depth.values[background] != 0.0):
        out.append(Violation("DEPTH_BACKGROUND", fid))
    if scene is None:
        return out

    prims = {p.mask_id: p for p in scene.primitives()}
    unknown = set(boxes) - set(prims)
    for label in sorted(unknown):
        out.append(Violation("MASK_UNKNOWN_ID", f"{fid}/id={label}"))
    origin = np.asarray(scene.camera.position)
    for label, prim in sorted(prims.items()):
        if label not in boxes:
            continue
        sl = boxes_slices[label]
        r, c = np.nonzero(mask.values[sl] == label)
        rows, cols = r + sl[0].start, c + sl[1].start
        if rows.size == 0:
            continue
        expected = analytic_depth(origin, scene.camera.pixel_rays(rows, cols), prim)
        err = np.abs(depth.values[rows, cols].astype(np.float64) - expected)
        if not np.all(err <= DEPTH_TOLERANCE):
            out.append(Violation("DEPTH_ANALYTIC", f"{fid}/id={label} max_err={float(np.nanmax(err)):.3g}"))
    return out


def deep_check(frame: FrameAnnotation, base_dir: Path, scene: SceneGraph | None) -> list[Violation]:
    fid = frame.frame_id
    if frame.depth_path is None or frame.mask_path is None:
        return [Violation("RASTER_MISSING", fid)]
    out = []
    depth = mask = None
    try:
        mask = read_mask(base_dir / frame.mask_path)
    except RasterFormatError as exc:
        out.append(Violation(exc.rule, f"{fid}: {exc}"))
    except OSError:
        out.append(Violation("RASTER_MISSING", f"{fid}/{frame.mask_path}"))
    try:
        depth = read_depth(base_dir / frame.depth_path)
    except RasterFormatError as exc:
        out.append(Violation(exc.rule, f"{fid}: {exc}"))
    except OSError:
        out.append(Violation("RASTER_MISSING", f"{fid}/{frame.depth_path}"))
    if depth is not None and mask is not None:
        out.extend(check_frame_rasters(frame, scene, depth, mask))
    return out
