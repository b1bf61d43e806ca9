import math
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from egohoi.annotations import CATEGORIES, BBox2D, ContactState, ObjectInstance, OffsetVector
from egohoi.matching import (
    InteractionPoint,
    encode_offset,
    image_diagonal,
    interaction_point,
    match_active_objects,
    nearest_object,
)


def _obj(iid, cx, cy, half=2.0, score=1.0):
    return ObjectInstance(iid, BBox2D(cx - half, cy - half, cx + half, cy + half), CATEGORIES[0], score)


def test_diagonal():
    assert image_diagonal(640, 480) == 800.0


def test_encode_identical_centers():
    b = BBox2D(10, 10, 20, 20)
    assert encode_offset(b, BBox2D(0, 0, 30, 30), 640, 480) == OffsetVector(0.0, 0.0, 0.0)


def test_encode_three_four_five():
    hand = BBox2D(90, 90, 110, 110)
    obj = BBox2D(150, 170, 170, 190)
    off = encode_offset(hand, obj, 640, 480)
    assert (off.vx, off.vy, off.m) == pytest.approx((0.6, 0.8, 0.125), abs=1e-15)


def test_decode_example():
    p = interaction_point(BBox2D(90, 90, 110, 110), OffsetVector(0.6, 0.8, 0.125), 640, 480)
    assert (p.x, p.y) == pytest.approx((160.0, 180.0), abs=1e-12)


def test_zero_magnitude_is_hand_center():
    p = interaction_point(BBox2D(0, 0, 10, 20), OffsetVector(0, 0, 0), 100, 100)
    assert (p.x, p.y) == (5.0, 10.0)


def test_point_not_clipped():
    p = interaction_point(BBox2D(0, 0, 10, 10), OffsetVector(-1.0, 0.0, 0.5), 100, 100)
    assert p.x < 0


@given(st.tuples(*[st.floats(-1e3, 1e3)] * 4), st.tuples(*[st.floats(-1e3, 1e3)] * 4),
       st.integers(1, 4000), st.integers(1, 4000))
def test_round_trip_property(a, b, w, h):
    ha = BBox2D(min(a[0], a[2]), min(a[1], a[3]), max(a[0], a[2]), max(a[1], a[3]))
    hb = BBox2D(min(b[0], b[2]), min(b[1], b[3]), max(b[0], b[2]), max(b[1], b[3]))
    off = encode_offset(ha, hb, w, h)
    assert off.is_normalized()
    p = interaction_point(ha, off, w, h)
    assert math.hypot(p.x - hb.center[0], p.y - hb.center[1]) < 1e-6


def test_nearest_example():
    objs = [_obj(1, 48, 52), _obj(2, 100, 100)]
    assert nearest_object(InteractionPoint(50, 50), objs) == 0


def test_tie_goes_to_lowest_instance_id():
    objs = [_obj(9, 40, 50), _obj(3, 60, 50)]
    assert nearest_object(InteractionPoint(50, 50), objs) == 1
    assert nearest_object(InteractionPoint(50, 50), objs[::-1]) == 0


def test_no_contact_hands_get_nothing():
    hb = BBox2D(0, 0, 10, 10)
    out = match_active_objects([(hb, ContactState.NO_CONTACT, None)] * 2, [_obj(1, 5, 5)], 100, 100)
    assert all(t.active_object_index is None and not t.unresolved for t in out)


def test_in_contact_without_objects_is_unresolved():
    hb = BBox2D(0, 0, 10, 10)
    (t,) = match_active_objects([(hb, ContactState.IN_CONTACT, OffsetVector(1, 0, 0.1))], [], 100, 100)
    assert t.active_object_index is None and t.unresolved


def test_non_exclusive():
    hb = BBox2D(0, 0, 10, 10)
    objs = [_obj(1, 30, 5), _obj(2, 90, 90)]
    off = encode_offset(hb, objs[0].box, 100, 100)
    out = match_active_objects([(hb, ContactState.IN_CONTACT, off)] * 2, objs, 100, 100)
    assert [t.active_object_index for t in out] == [0, 0]


def test_score_threshold_filters_candidates():
    hb = BBox2D(0, 0, 10, 10)
    objs = [_obj(1, 30, 5, score=0.2), _obj(2, 40, 5, score=0.9)]
    off = encode_offset(hb, objs[0].box, 100, 100)
    assert match_active_objects([(hb, ContactState.IN_CONTACT, off)], objs, 100, 100)[0].active_object_index == 0
    out = match_active_objects([(hb, ContactState.IN_CONTACT, off)], objs, 100, 100, score_threshold=0.5)
    assert out[0].active_object_index == 1


@pytest.mark.parametrize("seed", range(20))
def test_translation_and_scale_invariance(seed):
    rng = random.Random(seed)
    objs = [_obj(i + 1, rng.uniform(0, 200), rng.uniform(0, 200), rng.uniform(1, 9)) for i in range(5)]
    hand = BBox2D(50, 50, 70, 80)
    off = OffsetVector(*_unit(rng.uniform(0, 2 * math.pi)), rng.uniform(0, 0.4))
    base = match_active_objects([(hand, ContactState.IN_CONTACT, off)], objs, 200, 200)[0].active_object_index

    tx, ty = rng.uniform(-50, 50), rng.uniform(-50, 50)
    moved = [ObjectInstance(o.instance_id, _shift(o.box, tx, ty), o.category) for o in objs]
    out = match_active_objects([(_shift(hand, tx, ty), ContactState.IN_CONTACT, off)], moved, 200, 200)
    assert out[0].active_object_index == base

    k = rng.choice((0.5, 2.0, 3.0))
    scaled = [ObjectInstance(o.instance_id, _scale(o.box, k), o.category) for o in objs]
    out = match_active_objects([(_scale(hand, k), ContactState.IN_CONTACT, off)], scaled, 200 * k, 200 * k)
    assert out[0].active_object_index == base


def _unit(a):
    return math.cos(a), math.sin(a)


def _shift(b, tx, ty):
    return BBox2D(b.x_min + tx, b.y_min + ty, b.x_max + tx, b.y_max + ty)


def _scale(b, k):
    return BBox2D(b.x_min * k, b.y_min * k, b.x_max * k, b.y_max * k)
