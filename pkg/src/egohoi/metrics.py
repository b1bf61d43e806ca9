"""Average-precision metrics for EHOI detection.

Hand metrics (AP Hand, AP H.+Side, AP H.+State) score every predicted hand
against every ground-truth hand. The pair metrics (mAP H.+Obj, mAP H.+All)
are per active-object category: the detections for category ``c`` are the
predicted hands whose active object is predicted as ``c``, the ground truth
is the in-contact hands touching a ``c`` object. mAP@50 is plain per-class
object detection AP at IoU 0.5. Class means skip categories absent from the
ground truth.

Matching is greedy in ranked order. Each detection takes the unmatched
ground truth with the highest box IoU at or above the threshold in its frame;
attribute checks (side, state, active object) then decide TP versus FP only.
Because the assignment ignores attributes, a stricter criterion can only
remove true positives, never add them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .annotations import (
    CATEGORIES,
    BBox2D,
    ContactState,
    DatasetIndex,
    FrameAnnotation,
    ObjectCategory,
    ObjectInstance,
    Side,
)
from .matching import match_active_objects


class IncompatibleCategorySets(ValueError):
    pass


def iou(a: BBox2D, b: BBox2D) -> float:
    iw = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    ih = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(iw, 0.0) * max(ih, 0.0)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


@dataclass(frozen=True)
class MatchCriterion:
    iou_threshold: float = 0.5
    require_side: bool = False
    require_state: bool = False
    require_active_object: bool = False
    object_iou_threshold: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ValueError(f"iou_threshold must be in (0, 1], got {self.iou_threshold}")
        if not 0.0 < self.object_iou_threshold <= 1.0:
            raise ValueError(f"object_iou_threshold must be in (0, 1], got {self.object_iou_threshold}")

    @classmethod
    def hand(cls, iou_threshold: float = 0.5) -> "MatchCriterion":
        return cls(iou_threshold)

    @classmethod
    def hand_side(cls, iou_threshold: float = 0.5) -> "MatchCriterion":
        return cls(iou_threshold, require_side=True)

    @classmethod
    def hand_state(cls, iou_threshold: float = 0.5) -> "MatchCriterion":
        return cls(iou_threshold, require_state=True)

    @classmethod
    def hand_obj(cls, iou_threshold: float = 0.5, object_iou_threshold: float = 0.5) -> "MatchCriterion":
        return cls(iou_threshold, require_active_object=True, object_iou_threshold=object_iou_threshold)

    @classmethod
    def hand_all(cls, iou_threshold: float = 0.5, object_iou_threshold: float = 0.5) -> "MatchCriterion":
        return cls(
            iou_threshold,
            require_side=True,
            require_state=True,
            require_active_object=True,
            object_iou_threshold=object_iou_threshold,
        )


@dataclass(frozen=True)
class Detection:
    frame_id: str
    score: float
    box: BBox2D
    side: Side | None = None
    state: ContactState | None = None
    object_box: BBox2D | None = None
    object_category: int | None = None


@dataclass(frozen=True)
class GroundTruth:
    box: BBox2D
    side: Side | None = None
    state: ContactState | None = None
    object_box: BBox2D | None = None
    object_category: int | None = None


def attributes_match(det: Detection, gt: GroundTruth, criterion: MatchCriterion) -> bool:
    if criterion.require_side and det.side != gt.side:
        return False
    if criterion.require_state and det.state != gt.state:
        return False
    if criterion.require_active_object:
        if det.object_box is None or gt.object_box is None:
            return False
        if det.object_category != gt.object_category:
            return False
        if iou(det.object_box, gt.object_box) < criterion.object_iou_threshold:
            return False
    return True


def rank_detections(detections: Sequence[Detection]) -> list[int]:
    """Descending score; equal scores ordered by frame id, then input index."""
    return sorted(range(len(detections)), key=lambda i: (-detections[i].score, detections[i].frame_id, i))


def tp_flags(
    detections: Sequence[Detection],
    ground_truth: Mapping[str, Sequence[GroundTruth]],
    criterion: MatchCriterion,
) -> tuple[np.ndarray, int]:
    """TP flag per detection in ranked order, plus the ground-truth count."""
    order = rank_detections(detections)
    used = {fid: np.zeros(len(gts), dtype=bool) for fid, gts in ground_truth.items()}
    flags = np.zeros(len(order), dtype=bool)
    for rank, i in enumerate(order):
        det = detections[i]
        gts = ground_truth.get(det.frame_id, ())
        best, best_iou = -1, -1.0
        for j, gt in enumerate(gts):
            if used[det.frame_id][j]:
                continue
            overlap = iou(det.box, gt.box)
            if overlap >= criterion.iou_threshold and overlap > best_iou:
                best, best_iou = j, overlap
        if best >= 0:
            used[det.frame_id][best] = True
            flags[rank] = attributes_match(det, gts[best], criterion)
    n_gt = sum(len(g) for g in ground_truth.values())
    return flags, n_gt


def ap_from_flags(flags: np.ndarray, n_gt: int) -> float | None:
    """All-point interpolated AP: area under the monotone precision envelope."""
    if n_gt == 0:
        return None
    if len(flags) == 0:
        return 0.0
    tp = np.cumsum(flags, dtype=np.float64)
    fp = np.cumsum(~flags, dtype=np.float64)
    recall = np.concatenate(([0.0], tp / n_gt))
    precision = np.concatenate(([0.0], tp / (tp + fp)))
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    steps = np.flatnonzero(recall[1:] != recall[:-1])
    return float(np.sum((recall[steps + 1] - recall[steps]) * envelope[steps + 1]))


def average_precision(
    detections: Sequence[Detection],
    ground_truth: Mapping[str, Sequence[GroundTruth]],
    criterion: MatchCriterion,
) -> float | None:
    """AP ratio in [0, 1], or None when there is no ground truth at all."""
    flags, n_gt = tp_flags(detections, ground_truth, criterion)
    return ap_from_flags(flags, n_gt)


# ---------------------------------------------------------------------------
# full report


@dataclass(frozen=True)
class EvalConfig:
    hand_iou: float = 0.5
    object_iou: float = 0.5
    # candidate filter for predictions whose active object must be matched from offsets
    match_score_threshold: float | None = None


@dataclass(frozen=True)
class CategoryAP:
    category: ObjectCategory
    ap_at_50: float | None = None
    ap_hand_obj: float | None = None
    ap_hand_all: float | None = None


REPORT_COLUMNS = (
    ("ap_hand", "AP Hand"),
    ("ap_hand_side", "AP H.+Side"),
    ("ap_hand_state", "AP H.+State"),
    ("map_hand_obj", "mAP H.+Obj"),
    ("map_hand_all", "mAP H.+All"),
    ("map_at_50", "mAP@50"),
)


@dataclass(frozen=True)
class MetricsReport:
    """All values are percentages; None marks a metric with no ground truth."""

    ap_hand: float | None
    ap_hand_side: float | None
    ap_hand_state: float | None
    map_hand_obj: float | None
    map_hand_all: float | None
    map_at_50: float | None
    per_category: tuple[CategoryAP, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        out: dict = {label: getattr(self, attr) for attr, label in REPORT_COLUMNS}
        out["per_category"] = [
            {
                "id": row.category.id,
                "name": row.category.name,
                "AP@50": row.ap_at_50,
                "AP H.+Obj": row.ap_hand_obj,
                "AP H.+All": row.ap_hand_all,
            }
            for row in self.per_category
        ]
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> "MetricsReport":
        rows = tuple(
            CategoryAP(CATEGORIES[r["id"]], r["AP@50"], r["AP H.+Obj"], r["AP H.+All"])
            for r in data.get("per_category", ())
        )
        return cls(**{attr: data[label] for attr, label in REPORT_COLUMNS}, per_category=rows)

    def render(self) -> str:
        lines = [f"{label} {_pct(getattr(self, attr))}" for attr, label in REPORT_COLUMNS]
        if self.per_category:
            width = max(len(r.category.name) for r in self.per_category)
            lines.append("")
            lines.append(f"{'category'.ljust(width)}  {'AP@50':>7}  {'AP H.+Obj':>9}  {'AP H.+All':>9}")
            for r in self.per_category:
                lines.append(
                    f"{r.category.name.ljust(width)}  {_pct(r.ap_at_50):>7}  "
                    f"{_pct(r.ap_hand_obj):>9}  {_pct(r.ap_hand_all):>9}"
                )
        return "\n".join(lines)


def _pct(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def _hand_records(frame: FrameAnnotation, config: EvalConfig, predicted: bool) -> list[tuple]:
    """(hand, resolved active object or None) for each hand in the frame."""
    resolved: list[ObjectInstance | None] = []
    matched = None
    for i, hand in enumerate(frame.hands):
        obj = frame.object_by_id(hand.active_object_id) if hand.active_object_id is not None else None
        if obj is None and predicted and hand.contact_state is ContactState.IN_CONTACT and hand.offset is not None:
            if matched is None:
                matched = match_active_objects(
                    [(h.box, h.contact_state, h.offset) for h in frame.hands],
                    frame.objects,
                    frame.width,
                    frame.height,
                    score_threshold=config.match_score_threshold,
                )
            j = matched[i].active_object_index
            obj = frame.objects[j] if j is not None else None
        resolved.append(obj)
    return list(zip(frame.hands, resolved))


def _mean(values: list[float | None]) -> float | None:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def _percent(value: float | None) -> float | None:
    return None if value is None else 100.0 * value


def evaluate(
    predictions: DatasetIndex,
    ground_truth: DatasetIndex,
    config: EvalConfig = EvalConfig(),
) -> MetricsReport:
    if {c.id for c in predictions.categories} != {c.id for c in ground_truth.categories}:
        raise IncompatibleCategorySets("prediction and ground-truth category tables differ")

    gt_hands: dict[str, list[GroundTruth]] = {}
    gt_objects: dict[int, dict[str, list[GroundTruth]]] = {}
    for frame in ground_truth.frames:
        gt_hands[frame.frame_id] = [
            GroundTruth(
                hand.box,
                hand.side,
                hand.contact_state,
                obj.box if obj is not None else None,
                obj.category.id if obj is not None else None,
            )
            for hand, obj in _hand_records(frame, config, predicted=False)
        ]
        for obj in frame.objects:
            gt_objects.setdefault(obj.category.id, {}).setdefault(frame.frame_id, []).append(GroundTruth(obj.box))

    hand_dets: list[Detection] = []
    object_dets: dict[int, list[Detection]] = {}
    for frame in sorted(predictions.frames, key=lambda f: f.frame_id):
        for hand, obj in _hand_records(frame, config, predicted=True):
            hand_dets.append(
                Detection(
                    frame.frame_id,
                    hand.score,
                    hand.box,
                    hand.side,
                    hand.contact_state,
                    obj.box if obj is not None else None,
                    obj.category.id if obj is not None else None,
                )
            )
        for obj in frame.objects:
            object_dets.setdefault(obj.category.id, []).append(Detection(frame.frame_id, obj.score, obj.box))

    ap_hand = average_precision(hand_dets, gt_hands, MatchCriterion.hand(config.hand_iou))
    ap_side = average_precision(hand_dets, gt_hands, MatchCriterion.hand_side(config.hand_iou))
    ap_state = average_precision(hand_dets, gt_hands, MatchCriterion.hand_state(config.hand_iou))

    obj_crit = MatchCriterion(config.object_iou)
    pair_obj = MatchCriterion.hand_obj(config.hand_iou, config.object_iou)
    pair_all = MatchCriterion.hand_all(config.hand_iou, config.object_iou)
    rows = []
    for category in sorted(ground_truth.categories, key=lambda c: c.id):
        cid = category.id
        pair_gt = {
            fid: [g for g in gts if g.state is ContactState.IN_CONTACT and g.object_category == cid]
            for fid, gts in gt_hands.items()
        }
        pair_dets = [d for d in hand_dets if d.object_category == cid]
        rows.append(
            CategoryAP(
                category,
                _percent(average_precision(object_dets.get(cid, []), gt_objects.get(cid, {}), obj_crit)),
                _percent(average_precision(pair_dets, pair_gt, pair_obj)),
                _percent(average_precision(pair_dets, pair_gt, pair_all)),
            )
        )

    return MetricsReport(
        ap_hand=_percent(ap_hand),
        ap_hand_side=_percent(ap_side),
        ap_hand_state=_percent(ap_state),
        map_hand_obj=_mean([r.ap_hand_obj for r in rows]),
        map_hand_all=_mean([r.ap_hand_all for r in rows]),
        map_at_50=_mean([r.ap_at_50 for r in rows]),
        per_category=tuple(rows),
    )
