"""Synthetic egocentric hand-object interaction data, matching, metrics and losses."""

from .annotations import (
    CATEGORIES,
    BBox2D,
    ContactState,
    DatasetIndex,
    DatasetStats,
    FrameAnnotation,
    HandInstance,
    ObjectCategory,
    ObjectInstance,
    OffsetVector,
    Side,
    Violation,
    compute_stats,
    enlarge_box,
    parse_dataset,
    serialize_dataset,
    validate_frame,
)
from .matching import EhoiTriplet, InteractionPoint, encode_offset, interaction_point, match_active_objects
from .metrics import MatchCriterion, MetricsReport, average_precision, evaluate, iou

__version__ = "0.1.0"
