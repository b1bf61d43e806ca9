"""Ground-truth annotations read back from rendered rasters."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..annotations import BBox2D, ContactState, FrameAnnotation, HandInstance, ObjectInstance
from ..matching import encode_offset
from .geometry import SceneGraph
from .render import DepthRaster, MaskRaster


def mask_boxes(mask: np.ndarray) -> dict[int, tuple[int, BBox2D]]:
    """Pixel count and tight box for every nonzero id in the mask.

    Boxes cover whole pixels: a pixel at (row r, col c) spans
    ``[c, c + 1] x [r, r + 1]``.
    """
    out = {}
    rows_any = np.flatnonzero(mask.any(axis=1))
    if rows_any.size == 0:
        return out
    r0, r1 = int(rows_any[0]), int(rows_any[-1]) + 1
    cols_any = np.flatnonzero(mask[r0:r1].any(axis=0))
    c0 = int(cols_any[0])
    crop = mask[r0:r1, c0:int(cols_any[-1]) + 1]
    for label, sl in enumerate(ndimage.find_objects(crop), start=1):
        if sl is None:
            continue
        rows, cols = sl
        count = int(np.count_nonzero(crop[sl] == label))
        out[label] = (count, BBox2D(float(cols.start + c0), float(rows.start + r0),
                                    float(cols.stop + c0), float(rows.stop + r0)))
    return out


def frame_id_for(iteration: int, frame: int) -> str:
    return f"{iteration:06d}-{frame:03d}"


def derive_annotations(
    scene: SceneGraph,
    depth: DepthRaster,
    mask: MaskRaster,
    min_visible_pixels: int = 25,
    frame_id: str | None = None,
) -> FrameAnnotation:
    """Annotate every instance with at least ``min_visible_pixels`` mask pixels.

    A hand keeps its contact state only if the object it grasps is itself
    annotated; an in-contact hand whose object is hidden or out of frame is
    labelled NoContact, since the relation cannot be shown in the image.
    """
    if mask.values.shape != (scene.camera.height, scene.camera.width):
        raise ValueError("mask does not match the scene camera")
    boxes = mask_boxes(mask.values)
    width, height = scene.camera.width, scene.camera.height

    objects = []
    for obj in sorted(scene.objects, key=lambda o: o.instance_id):
        entry = boxes.get(obj.mask_id)
        if entry is not None and entry[0] >= min_visible_pixels:
            objects.append(ObjectInstance(obj.instance_id, entry[1], obj.category, 1.0))
    by_id = {o.instance_id: o for o in objects}

    hands = []
    for hand in scene.hands:
        entry = boxes.get(hand.mask_id)
        if entry is None or entry[0] < min_visible_pixels:
            continue
        box = entry[1]
        target = by_id.get(hand.grasped_id) if hand.in_contact else None
        if target is None:
            hands.append(HandInstance(box, hand.side, ContactState.NO_CONTACT))
        else:
            hands.append(
                HandInstance(
                    box,
                    hand.side,
                    ContactState.IN_CONTACT,
                    offset=encode_offset(box, target.box, width, height),
                    active_object_id=target.instance_id,
                )
            )

    fid = frame_id if frame_id is not None else frame_id_for(scene.iteration, scene.frame)
    return FrameAnnotation(
        frame_id=fid,
        width=width,
        height=height,
        hands=tuple(hands),
        objects=tuple(objects),
        depth_path=f"{fid}.depth",
        mask_path=f"{fid}.mask",
    )
