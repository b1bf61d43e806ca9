"""Dataset generation: sample, render, annotate, write."""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

from ..annotations import CATEGORIES, DatasetIndex, FrameAnnotation, parse_dataset, serialize_dataset
from .annotate import derive_annotations, frame_id_for
from .config import ScenarioConfig
from .geometry import SceneGraph
from .rasters import encode_depth, encode_mask
from .render import DepthRaster, MaskRaster, render
from .scene import sample_scene

ANNOTATIONS_FILE = "annotations.json"
SCENES_FILE = "scenes.json"
CONFIG_FILE = "config.json"


class IoFailure(OSError):
    pass


@dataclass(frozen=True)
class GeneratedFrame:
    annotation: FrameAnnotation
    scene: SceneGraph
    depth: DepthRaster
    mask: MaskRaster


def fully_visible(scene: SceneGraph, annotation: FrameAnnotation) -> bool:
    """Every hand is annotated and every grasp survived annotation."""
    if len(annotation.hands) != len(scene.hands):
        return False
    wanted = sum(h.in_contact for h in scene.hands)
    return sum(h.active_object_id is not None for h in annotation.hands) == wanted


def generate_frame(config: ScenarioConfig, iteration: int, frame: int) -> GeneratedFrame:
    """Render a frame, redrawing the viewpoint while a hand or grasped object
    is hidden; the last attempt is kept as is."""
    for attempt in range(config.max_view_attempts):
        scene = sample_scene(config, iteration, frame, attempt)
        depth, mask = render(scene)
        ann = derive_annotations(scene, depth, mask, config.min_visible_pixels, frame_id_for(iteration, frame))
        if fully_visible(scene, ann):
            break
    return GeneratedFrame(ann, scene, depth, mask)


def iter_frames(config: ScenarioConfig, iterations: Iterable[int] | None = None) -> Iterator[GeneratedFrame]:
    """Frames in (iteration, frame) order, computed in-process."""
    for it in range(config.iterations) if iterations is None else iterations:
        for fr in range(config.frames_per_iteration):
            yield generate_frame(config, it, fr)


def _iteration_payload(args: tuple[ScenarioConfig, int]) -> list[tuple[FrameAnnotation, dict, bytes, bytes]]:
    config, iteration = args
    out = []
    for fr in range(config.frames_per_iteration):
        g = generate_frame(config, iteration, fr)
        out.append((g.annotation, g.scene.to_dict(), encode_depth(g.depth), encode_mask(g.mask)))
    return out


def _payloads(config: ScenarioConfig, workers: int):
    jobs = [(config, it) for it in range(config.iterations)]
    if workers <= 1:
        yield from map(_iteration_payload, jobs)
        return
    chunk = max(1, len(jobs) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order, so output order is worker-independent
        yield from pool.map(_iteration_payload, jobs, chunksize=chunk)


def generate_dataset(config: ScenarioConfig, sink, workers: int = 1) -> DatasetIndex:
    """Write ``iterations * frames_per_iteration`` frames into ``sink``.

    Layout: ``annotations.json`` (canonical annotation document),
    ``scenes.json`` (scene graph per frame), ``config.json``, and one
    ``{frame_id}.depth`` / ``{frame_id}.mask`` pair per frame. The bytes
    written depend only on ``config``.
    """
    sink = Path(sink)
    frames: list[FrameAnnotation] = []
    scenes: dict[str, dict] = {}
    try:
        sink.mkdir(parents=True, exist_ok=True)
        for batch in _payloads(config, workers):
            for ann, scene, depth_bytes, mask_bytes in batch:
                (sink / ann.depth_path).write_bytes(depth_bytes)
                (sink / ann.mask_path).write_bytes(mask_bytes)
                frames.append(ann)
                scenes[ann.frame_id] = scene
        index = DatasetIndex(split=config.split, frames=tuple(frames), categories=CATEGORIES)
        document = serialize_dataset(index)
        (sink / ANNOTATIONS_FILE).write_bytes(document)
        (sink / SCENES_FILE).write_text(json.dumps(scenes, sort_keys=True, indent=1) + "\n", encoding="utf-8")
        (sink / CONFIG_FILE).write_text(json.dumps(config.to_dict(), sort_keys=True, indent=1) + "\n",
                                        encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"writing dataset to {sink}: {exc}") from exc
    return parse_dataset(document)


def load_scenes(path) -> dict[str, SceneGraph]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {fid: SceneGraph.from_dict(d) for fid, d in raw.items()}


def tree_hash(root) -> str:
    """SHA-256 over every file's relative path and contents, in sorted order."""
    root = Path(root)
    h = hashlib.sha256()
    for dirpath, dirnames, filenames in os.walk(root):
        dirnames.sort()
        for name in sorted(filenames):
            path = Path(dirpath) / name
            rel = path.relative_to(root).as_posix()
            h.update(rel.encode("utf-8") + b"\0")
            h.update(path.read_bytes())
            h.update(b"\0")
    return h.hexdigest()
