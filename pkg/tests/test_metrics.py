import json
import random
from dataclasses import replace

import pytest

from conftest import to_engine, two_frame_index
from egohoi.annotations import (
    CATEGORIES,
    BBox2D,
    ContactState,
    DatasetIndex,
    FrameAnnotation,
    HandInstance,
    ObjectCategory,
    ObjectInstance,
    Side,
)
from egohoi.matching import encode_offset
from egohoi.metrics import (
    Detection,
    GroundTruth,
    IncompatibleCategorySets,
    MatchCriterion,
    MetricsReport,
    average_precision,
    evaluate,
    iou,
)
from oracles import micro_instance, oracle_ap, oracle_tp

CRITERIA = {
    "hand": (MatchCriterion.hand(), (False, False, False)),
    "side": (MatchCriterion.hand_side(), (True, False, False)),
    "state": (MatchCriterion.hand_state(), (False, True, False)),
    "obj": (MatchCriterion.hand_obj(), (False, False, True)),
    "all": (MatchCriterion.hand_all(), (True, True, True)),
}


class TestIoU:
    def test_identical(self):
        assert iou(BBox2D(1, 2, 3, 4), BBox2D(1, 2, 3, 4)) == 1.0

    def test_half_overlap(self):
        assert iou(BBox2D(0, 0, 10, 10), BBox2D(5, 0, 15, 10)) == pytest.approx(1 / 3, abs=1e-15)

    def test_disjoint_and_degenerate(self):
        assert iou(BBox2D(0, 0, 1, 1), BBox2D(2, 2, 3, 3)) == 0.0
        assert iou(BBox2D(0, 0, 0, 0), BBox2D(0, 0, 0, 0)) == 0.0


def _gt(x, side=Side.LEFT):
    return GroundTruth(BBox2D(x, 0, x + 10, 10), side, ContactState.NO_CONTACT)


def _det(x, score, frame="f", side=Side.LEFT):
    return Detection(frame, score, BBox2D(x, 0, x + 10, 10), side, ContactState.NO_CONTACT)


class TestAveragePrecision:
    def test_single_perfect(self):
        assert average_precision([_det(0, 0.9)], {"f": [_gt(0)]}, MatchCriterion.hand()) == 1.0

    def test_tp_fp_tp(self):
        dets = [_det(0, 0.9), _det(100, 0.8), _det(50, 0.7)]
        ap = average_precision(dets, {"f": [_gt(0), _gt(50)]}, MatchCriterion.hand())
        assert ap == pytest.approx(0.8333333333333334, abs=1e-15)

    def test_no_ground_truth_is_undefined(self):
        assert average_precision([_det(0, 1.0)], {"f": []}, MatchCriterion.hand()) is None

    def test_no_detections_is_zero(self):
        assert average_precision([], {"f": [_gt(0)]}, MatchCriterion.hand()) == 0.0

    def test_duplicate_detection_is_fp(self):
        ap = average_precision([_det(0, 0.9), _det(0, 0.8)], {"f": [_gt(0)]}, MatchCriterion.hand())
        assert ap == 1.0
        ap = average_precision([_det(0, 0.8), _det(0, 0.9, side=Side.RIGHT)], {"f": [_gt(0)]},
                               MatchCriterion.hand_side())
        # the wrong-side detection ranks first and consumes the only GT
        assert ap == 0.0

    def test_attribute_mismatch_only_hurts_its_criterion(self):
        dets = [_det(0, 0.9, side=Side.RIGHT)]
        assert average_precision(dets, {"f": [_gt(0)]}, MatchCriterion.hand()) == 1.0
        assert average_precision(dets, {"f": [_gt(0)]}, MatchCriterion.hand_side()) == 0.0

    def test_score_tie_ordered_by_frame_then_index(self):
        gts = {"a": [_gt(0)], "b": [_gt(0)]}
        dets = [_det(99, 0.5, "b"), _det(0, 0.5, "a"), _det(0, 0.5, "b")]
        # ranking: a/0 (TP), b/99 (FP), b/0 (TP)
        assert average_precision(dets, gts, MatchCriterion.hand()) == pytest.approx(0.5 + 0.5 * 2 / 3, abs=1e-15)

    @pytest.mark.parametrize("seed", range(200))
    def test_matches_exact_oracle(self, seed):
        rng = random.Random(seed)
        dets, gts = micro_instance(rng)
        e_dets, e_gts = to_engine(dets, gts)
        for name, (crit, need) in CRITERIA.items():
            flags, n = oracle_tp(dets, gts, *need)
            expected = oracle_ap(flags, n)
            got = average_precision(e_dets, e_gts, crit)
            if expected is None:
                assert got is None
            else:
                assert abs(got - float(expected)) <= 1e-12, name

    @pytest.mark.parametrize("seed", range(30))
    def test_scale_and_permutation_invariance(self, seed):
        rng = random.Random(1000 + seed)
        dets, gts = micro_instance(rng)
        e_dets, e_gts = to_engine(dets, gts)
        for crit, _ in CRITERIA.values():
            base = average_precision(e_dets, e_gts, crit)
            scaled = [replace(d, score=d.score * 0.37) for d in e_dets]
            assert average_precision(scaled, e_gts, crit) == base
            # permuting the input only matters through the index tie-break, so
            # permute within groups that are already strictly ordered
            idx = list(range(len(e_dets)))
            rng.shuffle(idx)
            distinct = [replace(d, score=d.score - 1e-6 * i) for i, d in enumerate(e_dets)]
            shuffled = [distinct[i] for i in idx]
            assert average_precision(shuffled, e_gts, crit) == average_precision(distinct, e_gts, crit)


def _gt_index_with_offsets() -> DatasetIndex:
    idx = two_frame_index()
    a, b = idx.frames
    hand = a.hands[0]
    off = encode_offset(hand.box, a.object_by_id(2).box, a.width, a.height)
    a = replace(a, hands=(replace(hand, offset=off),))
    return replace(idx, frames=(a, b))


class TestEvaluate:
    def test_fixed_point(self):
        gt = _gt_index_with_offsets()
        rep = evaluate(gt, gt)
        for value in (rep.ap_hand, rep.ap_hand_side, rep.ap_hand_state, rep.map_hand_obj, rep.map_hand_all,
                      rep.map_at_50):
            assert value == pytest.approx(100.0, abs=1e-9)

    def test_flipped_sides(self):
        gt = _gt_index_with_offsets()
        flipped = replace(gt, frames=tuple(
            replace(f, hands=tuple(replace(h, side=h.side.other) for h in f.hands)) for f in gt.frames))
        rep = evaluate(flipped, gt)
        assert rep.ap_hand == 100.0
        assert rep.ap_hand_side == 0.0
        assert rep.map_hand_obj == 100.0
        assert rep.map_hand_all == 0.0

    def test_no_predictions(self):
        gt = _gt_index_with_offsets()
        empty = replace(gt, frames=tuple(replace(f, hands=(), objects=()) for f in gt.frames))
        rep = evaluate(empty, gt)
        assert rep.ap_hand == 0.0 and rep.map_at_50 == 0.0

    def test_categories_absent_from_gt_excluded(self):
        rep = evaluate(two_frame_index(), two_frame_index())
        by_id = {r.category.id: r for r in rep.per_category}
        assert by_id[5].ap_at_50 is None
        assert by_id[4].ap_hand_obj == 100.0 and by_id[0].ap_hand_obj is None

    def test_active_object_from_offset(self):
        """A prediction without an explicit link recovers its object from the offset."""
        gt = _gt_index_with_offsets()
        a = gt.frames[0]
        pred_a = replace(a, hands=(replace(a.hands[0], active_object_id=None),))
        pred = replace(gt, frames=(pred_a, gt.frames[1]))
        assert evaluate(pred, gt).map_hand_all == 100.0
        no_offset = replace(gt, frames=(replace(pred_a, hands=(replace(pred_a.hands[0], offset=None),)),
                                        gt.frames[1]))
        assert evaluate(no_offset, gt).map_hand_obj == 0.0

    def test_wrong_object_category(self):
        gt = _gt_index_with_offsets()
        a = gt.frames[0]
        objs = tuple(replace(o, category=CATEGORIES[5]) if o.instance_id == 2 else o for o in a.objects)
        pred = replace(gt, frames=(replace(a, objects=objs), gt.frames[1]))
        rep = evaluate(pred, gt)
        assert rep.ap_hand == 100.0
        assert rep.map_hand_obj == 0.0

    def test_incompatible_categories(self):
        gt = two_frame_index()
        pred = replace(gt, categories=CATEGORIES[:18])
        with pytest.raises(IncompatibleCategorySets):
            evaluate(pred, gt)

    def test_micro_fixture_ap_hand(self):
        gt_frame = FrameAnnotation("f", 200, 100, hands=(
            HandInstance(BBox2D(0, 0, 10, 10), Side.LEFT, ContactState.NO_CONTACT),
            HandInstance(BBox2D(50, 0, 60, 10), Side.RIGHT, ContactState.NO_CONTACT),
        ))
        pred_frame = replace(gt_frame, hands=(
            replace(gt_frame.hands[0], score=0.9),
            HandInstance(BBox2D(100, 0, 110, 10), Side.LEFT, ContactState.NO_CONTACT, score=0.8),
            replace(gt_frame.hands[1], score=0.7),
        ))
        rep = evaluate(DatasetIndex("test", (pred_frame,)), DatasetIndex("test", (gt_frame,)))
        assert rep.render().splitlines()[0] == "AP Hand 83.33"

    def test_report_round_trip(self):
        rep = evaluate(two_frame_index(), two_frame_index())
        assert MetricsReport.from_dict(json.loads(json.dumps(rep.to_dict()))) == rep
        columns = [line.rsplit(" ", 1)[0] for line in rep.render().splitlines()[:6]]
        assert columns == ["AP Hand", "AP H.+Side", "AP H.+State", "mAP H.+Obj", "mAP H.+All", "mAP@50"]

    def test_hand_only_frames(self):
        f = FrameAnnotation("f", 50, 50, objects=(ObjectInstance(1, BBox2D(0, 0, 5, 5), ObjectCategory(3, "electric screwdriver")),))
        rep = evaluate(DatasetIndex("test", (f,)), DatasetIndex("test", (f,)))
        assert rep.ap_hand is None and rep.map_hand_obj is None and rep.map_at_50 == 100.0
