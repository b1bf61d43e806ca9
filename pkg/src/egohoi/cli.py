"""Command-line front end.

Exit codes: 0 success, 1 validation failures found, 2 usage or config
error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .annotations import AnnotationError, compute_stats, load_dataset, validate_frame
from .losses import DEFAULT_MAX_DEPTH, DimensionMismatch, RasterTooSmall, depth_loss_terms, normalize_depth
from .metrics import EvalConfig, IncompatibleCategorySets, evaluate
from .synth.checks import deep_check
from .synth.config import ConfigError, ScenarioConfig
from .synth.dataset import ANNOTATIONS_FILE, SCENES_FILE, generate_dataset, load_scenes, tree_hash
from .synth.rasters import RasterFormatError, read_depth
from .synth.scene import PlacementFailure

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _annotation_path(path: Path) -> Path:
    return path / ANNOTATIONS_FILE if path.is_dir() else path


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        config = ScenarioConfig.from_json(Path(args.config).read_bytes())
        if args.seed is not None:
            config = config.with_seed(args.seed)
    except ConfigError as exc:
        _err(f"config field {exc.field!r}: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"reading config: {exc}")
        return EXIT_IO
    if args.workers < 1:
        _err("--workers must be >= 1")
        return EXIT_USAGE
    try:
        index = generate_dataset(config, args.out, workers=args.workers)
        digest = tree_hash(args.out)
    except PlacementFailure as exc:
        _err(f"placement failed in iteration {exc.iteration}: {exc}")
        return EXIT_IO
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    print(compute_stats(index.frames).table())
    print(f"tree sha256 {digest}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.path)
    ann_path = _annotation_path(path)
    try:
        index = load_dataset(ann_path)
        scenes_path = ann_path.parent / SCENES_FILE
        scenes = load_scenes(scenes_path) if args.deep and scenes_path.exists() else {}
    except AnnotationError as exc:
        _err(f"{ann_path}: {exc}")
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        _err(f"reading {ann_path}: {exc}")
        return EXIT_IO
    violations = []
    for frame in index.frames:
        violations.extend(validate_frame(frame))
        if args.deep:
            violations.extend(deep_check(frame, ann_path.parent, scenes.get(frame.frame_id)))
    for v in violations:
        print(v)
    print(f"{len(index.frames)} frames, {len(violations)} violations")
    return EXIT_VIOLATIONS if violations else EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    ann_path = _annotation_path(Path(args.path))
    try:
        index = load_dataset(ann_path)
    except AnnotationError as exc:
        _err(f"{ann_path}: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _err(f"reading {ann_path}: {exc}")
        return EXIT_IO
    print(compute_stats(index.frames).table())
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    if not 0.0 < args.iou <= 1.0:
        _err("--iou must be in (0, 1]")
        return EXIT_USAGE
    try:
        pred = load_dataset(_annotation_path(Path(args.pred)))
        gt = load_dataset(_annotation_path(Path(args.gt)))
    except AnnotationError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    try:
        report = evaluate(pred, gt, EvalConfig(hand_iou=args.iou, object_iou=args.iou))
    except IncompatibleCategorySets as exc:
        _err(str(exc))
        return EXIT_USAGE
    print(report.render())
    if args.report:
        try:
            Path(args.report).write_text(json.dumps(report.to_dict(), indent=1, sort_keys=True) + "\n",
                                         encoding="utf-8")
        except OSError as exc:
            _err(f"writing report: {exc}")
            return EXIT_IO
    return EXIT_OK


def cmd_loss(args: argparse.Namespace) -> int:
    if not args.max_depth > 0:
        _err("--max-depth must be positive")
        return EXIT_USAGE
    try:
        a = normalize_depth(read_depth(args.a).values, args.max_depth)
        b = normalize_depth(read_depth(args.b).values, args.max_depth)
        terms = depth_loss_terms(a, b)
    except (RasterFormatError, DimensionMismatch, RasterTooSmall) as exc:
        _err(str(exc))
        return EXIT_USAGE
    except OSError as exc:
        _err(str(exc))
        return EXIT_IO
    for name, value in (("edge_ssim", terms.edge_ssim), ("depth_ssim", terms.depth_ssim),
                        ("l1", terms.l1), ("total", terms.total)):
        print(f"{name} {value:.9g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="egohoi", description="Synthetic EHOI data generation, checks and metrics.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render a dataset from a scenario config")
    p.add_argument("config", help="scenario config (JSON)")
    p.add_argument("out", help="output directory")
    p.add_argument("--workers", type=int, default=1, help="worker processes (output does not depend on it)")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="check annotation invariants")
    p.add_argument("path", help="annotation file, or a dataset directory")
    p.add_argument("--deep", action="store_true", help="also cross-check rasters against boxes and scene geometry")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("stats", help="print dataset statistics")
    p.add_argument("path", help="annotation file, or a dataset directory")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("evaluate", help="score predictions against ground truth")
    p.add_argument("pred", help="prediction annotation file")
    p.add_argument("gt", help="ground-truth annotation file")
    p.add_argument("--iou", type=float, default=0.5, help="IoU threshold for hands and objects")
    p.add_argument("--report", default=None, help="write the report as JSON here")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loss", help="depth loss terms between two depth rasters")
    p.add_argument("a", help="predicted depth raster")
    p.add_argument("b", help="reference depth raster")
    p.add_argument("--max-depth", type=float, default=DEFAULT_MAX_DEPTH, help="normalization depth in meters")
    p.set_defaults(func=cmd_loss)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
