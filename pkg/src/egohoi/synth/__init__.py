"""Seeded synthetic EHOI scene generation, rendering and annotation."""

from .annotate import derive_annotations, frame_id_for, mask_boxes
from .config import ConfigError, ScenarioConfig, TargetPolicy
from .dataset import GeneratedFrame, IoFailure, generate_dataset, generate_frame, iter_frames, load_scenes, tree_hash
from .geometry import (
    HAND_MASK_IDS,
    CameraModel,
    CuboidPrimitive,
    DegenerateCamera,
    HandPrimitive,
    SceneGraph,
    box_distance,
)
from .rasters import RasterFormatError, decode_depth, decode_mask, encode_depth, encode_mask, read_depth, read_mask
from .render import DepthRaster, MaskRaster, render
from .scene import CATEGORY_SIZES, PlacementFailure, sample_scene

__all__ = [
    "CATEGORY_SIZES",
    "CameraModel",
    "ConfigError",
    "CuboidPrimitive",
    "DegenerateCamera",
    "DepthRaster",
    "GeneratedFrame",
    "HAND_MASK_IDS",
    "HandPrimitive",
    "IoFailure",
    "MaskRaster",
    "PlacementFailure",
    "RasterFormatError",
    "ScenarioConfig",
    "SceneGraph",
    "TargetPolicy",
    "box_distance",
    "decode_depth",
    "decode_mask",
    "derive_annotations",
    "encode_depth",
    "encode_mask",
    "frame_id_for",
    "generate_dataset",
    "generate_frame",
    "iter_frames",
    "load_scenes",
    "mask_boxes",
    "read_depth",
    "read_mask",
    "render",
    "sample_scene",
    "tree_hash",
]
