"""Offset-vector encoding and hand to active-object matching.

A hand's offset is ``(vx, vy, m)``: the unit direction from the hand box
center to the active object's box center, and the length of that vector
divided by the image diagonal. Decoding an offset gives the interaction
point; the active object is the candidate whose box center is nearest to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .annotations import BBox2D, ContactState, ObjectInstance, OffsetVector


@dataclass(frozen=True)
class InteractionPoint:
    x: float
    y: float


@dataclass(frozen=True)
class EhoiTriplet:
    hand_index: int
    contact_state: ContactState
    active_object_index: int | None = None

    @property
    def unresolved(self) -> bool:
        """In contact, but no object could be assigned."""
        return self.contact_state is ContactState.IN_CONTACT and self.active_object_index is None


def image_diagonal(width: float, height: float) -> float:
    if width <= 0 or height <= 0:
        raise ValueError(f"image size must be positive, got {width}x{height}")
    return math.hypot(width, height)


def encode_offset(hand_box: BBox2D, object_box: BBox2D, width: float, height: float) -> OffsetVector:
    hx, hy = hand_box.center
    ox, oy = object_box.center
    dx, dy = ox - hx, oy - hy
    length = math.hypot(dx, dy)
    if length == 0.0:
        return OffsetVector(0.0, 0.0, 0.0)
    return OffsetVector(dx / length, dy / length, length / image_diagonal(width, height))


def interaction_point(hand_box: BBox2D, offset: OffsetVector, width: float, height: float) -> InteractionPoint:
    """Hand center displaced by the decoded offset. The result is not clipped
    to the image."""
    hx, hy = hand_box.center
    scale = offset.m * image_diagonal(width, height)
    return InteractionPoint(hx + offset.vx * scale, hy + offset.vy * scale)


def nearest_object(point: InteractionPoint, objects: Sequence[ObjectInstance]) -> int | None:
    """Index of the object whose box center is closest to ``point``; ties go
    to the lowest instance id."""
    best = None
    best_key = None
    for i, obj in enumerate(objects):
        cx, cy = obj.box.center
        key = ((cx - point.x) ** 2 + (cy - point.y) ** 2, obj.instance_id)
        if best_key is None or key < best_key:
            best, best_key = i, key
    return best


def match_active_objects(
    hands: Sequence[tuple[BBox2D, ContactState, OffsetVector | None]],
    objects: Sequence[ObjectInstance],
    width: float,
    height: float,
    score_threshold: float | None = None,
) -> list[EhoiTriplet]:
    """Assign an active object to every in-contact hand.

    Candidates are all ``objects`` (or those scoring at least
    ``score_threshold`` when given). Several hands may claim the same object.
    An in-contact hand without an offset, or with no candidates, comes back
    unresolved.
    """
    if score_threshold is None:
        candidates = list(range(len(objects)))
    else:
        candidates = [i for i, o in enumerate(objects) if o.score >= score_threshold]
    pool = [objects[i] for i in candidates]

    triplets = []
    for i, (box, state, offset) in enumerate(hands):
        chosen = None
        if state is ContactState.IN_CONTACT and offset is not None and pool:
            j = nearest_object(interaction_point(box, offset, width, height), pool)
            chosen = candidates[j]
        triplets.append(EhoiTriplet(i, state, chosen))
    return triplets
