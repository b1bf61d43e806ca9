"""Annotation data model for egocentric hand-object interaction frames.

Holds the object category table, box and instance types, the JSON document
schema (parse / canonical serialize), per-frame validation and dataset
statistics.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Iterator, Sequence

CATEGORY_NAMES: tuple[str, ...] = (
    "power supply",
    "oscilloscope",
    "welder station",
    "electric screwdriver",
    "screwdriver",
    "pliers",
    "welder probe tip",
    "oscilloscope probe tip",
    "low voltage board",
    "high voltage board",
    "register",
    "electric screwdriver battery",
    "working area",
    "welder base",
    "socket",
    "left red button",
    "left green button",
    "right red button",
    "right green button",
)

SPLITS = ("train", "val", "test")


class AnnotationError(ValueError):
    """Base class for document parsing failures."""


class DocumentSyntaxError(AnnotationError):
    """The document is not well-formed UTF-8 JSON."""


class SchemaError(AnnotationError):
    """Missing or unexpected field, wrong type, or bad enum value."""


class ReferentialError(AnnotationError):
    """A hand references an object instance that does not exist in its frame."""


class InvalidFactor(ValueError):
    pass


@dataclass(frozen=True)
class ObjectCategory:
    id: int
    name: str

    def __post_init__(self) -> None:
        if not 0 <= self.id < len(CATEGORY_NAMES) or CATEGORY_NAMES[self.id] != self.name:
            raise ValueError(f"unknown category ({self.id}, {self.name!r})")

    @classmethod
    def from_id(cls, category_id: int) -> "ObjectCategory":
        return CATEGORIES[category_id]

    @classmethod
    def from_name(cls, name: str) -> "ObjectCategory":
        return CATEGORIES[CATEGORY_NAMES.index(name)]


CATEGORIES: tuple[ObjectCategory, ...] = tuple(
    ObjectCategory(i, name) for i, name in enumerate(CATEGORY_NAMES)
)


class Side(str, enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def other(self) -> "Side":
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class ContactState(str, enum.Enum):
    NO_CONTACT = "N"
    IN_CONTACT = "C"


@dataclass(frozen=True)
class BBox2D:
    """Axis-aligned box in pixels, origin at the top-left image corner."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        values = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"non-finite box {values}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box corners out of order {values}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (0.5 * (self.x_min + self.x_max), 0.5 * (self.y_min + self.y_max))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)

    def contains(self, other: "BBox2D") -> bool:
        return (
            self.x_min <= other.x_min
            and self.y_min <= other.y_min
            and self.x_max >= other.x_max
            and self.y_max >= other.y_max
        )


@dataclass(frozen=True)
class OffsetVector:
    """Direction (vx, vy) and diagonal-normalized magnitude m from a hand
    center toward its active object's center."""

    vx: float
    vy: float
    m: float

    def is_normalized(self, tol: float = 1e-6) -> bool:
        if self.m < 0:
            return False
        if self.m == 0:
            return True
        return abs(self.vx * self.vx + self.vy * self.vy - 1.0) <= tol


@dataclass(frozen=True)
class HandInstance:
    box: BBox2D
    side: Side
    contact_state: ContactState
    offset: OffsetVector | None = None
    active_object_id: int | None = None
    score: float = 1.0


@dataclass(frozen=True)
class ObjectInstance:
    instance_id: int
    box: BBox2D
    category: ObjectCategory
    score: float = 1.0


@dataclass(frozen=True)
class FrameAnnotation:
    frame_id: str
    width: int
    height: int
    hands: tuple[HandInstance, ...] = ()
    objects: tuple[ObjectInstance, ...] = ()
    depth_path: str | None = None
    mask_path: str | None = None

    def object_by_id(self, instance_id: int) -> ObjectInstance | None:
        for obj in self.objects:
            if obj.instance_id == instance_id:
                return obj
        return None


@dataclass(frozen=True)
class DatasetIndex:
    split: str
    frames: tuple[FrameAnnotation, ...] = ()
    categories: tuple[ObjectCategory, ...] = CATEGORIES

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise ValueError(f"bad split {self.split!r}")
        ids = [f.frame_id for f in self.frames]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate frame ids")

    def __iter__(self) -> Iterator[FrameAnnotation]:
        return iter(self.frames)

    def __len__(self) -> int:
        return len(self.frames)

    def frame(self, frame_id: str) -> FrameAnnotation:
        for f in self.frames:
            if f.frame_id == frame_id:
                return f
        raise KeyError(frame_id)


@dataclass(frozen=True)
class DatasetStats:
    n_images: int = 0
    n_hands: int = 0
    n_ehois: int = 0
    n_left: int = 0
    n_right: int = 0
    n_objects: int = 0

    def __add__(self, other: "DatasetStats") -> "DatasetStats":
        return DatasetStats(*(a + b for a, b in zip(self.as_tuple(), other.as_tuple())))

    def as_tuple(self) -> tuple[int, int, int, int, int, int]:
        return (self.n_images, self.n_hands, self.n_ehois, self.n_left, self.n_right, self.n_objects)

    def table(self) -> str:
        """One ``#column value`` line per count, then the tuple form."""
        headers = ("#images", "#hands", "#EHOIs", "#left", "#right", "#objects")
        lines = [f"{h} {v}" for h, v in zip(headers, self.as_tuple())]
        lines.append(str(self.as_tuple()))
        return "\n".join(lines)


@dataclass(frozen=True)
class Violation:
    rule: str
    entity: str

    def __str__(self) -> str:
        return f"{self.rule}: {self.entity}"


# ---------------------------------------------------------------------------
# geometry helpers


def enlarge_box(box: BBox2D, factor: float, width: float, height: float) -> BBox2D:
    """Scale box width and height by ``1 + factor`` about its center, then
    clip to ``[0, width] x [0, height]``."""
    if factor < 0 or not math.isfinite(factor):
        raise InvalidFactor(f"enlargement factor must be >= 0, got {factor}")
    cx, cy = box.center
    hw = 0.5 * box.width * (1.0 + factor)
    hh = 0.5 * box.height * (1.0 + factor)
    return BBox2D(
        min(max(cx - hw, 0.0), width),
        min(max(cy - hh, 0.0), height),
        min(max(cx + hw, 0.0), width),
        min(max(cy + hh, 0.0), height),
    )


# ---------------------------------------------------------------------------
# validation


def validate_frame(frame: FrameAnnotation, ground_truth: bool = True) -> list[Violation]:
    """Check the frame-level rules; returns an empty list for a valid frame.

    With ``ground_truth=False`` the single-hand-per-side rule and the
    requirement that in-contact hands name an active object are skipped,
    since detector output legitimately breaks both.
    """
    out: list[Violation] = []
    seen_ids: set[int] = set()
    for obj in frame.objects:
        tag = f"{frame.frame_id}/object[{obj.instance_id}]"
        if obj.instance_id in seen_ids:
            out.append(Violation("DuplicateInstance", tag))
        seen_ids.add(obj.instance_id)
        out.extend(_box_violations(obj.box, frame, tag))
        if not 0.0 <= obj.score <= 1.0:
            out.append(Violation("ScoreRange", tag))

    sides: dict[Side, int] = {}
    for i, hand in enumerate(frame.hands):
        tag = f"{frame.frame_id}/hand[{i}]"
        out.extend(_box_violations(hand.box, frame, tag))
        if not 0.0 <= hand.score <= 1.0:
            out.append(Violation("ScoreRange", tag))
        sides[hand.side] = sides.get(hand.side, 0) + 1
        if hand.contact_state is ContactState.NO_CONTACT:
            if hand.offset is not None or hand.active_object_id is not None:
                out.append(Violation("ContactConsistency", tag))
        elif ground_truth and hand.active_object_id is None:
            out.append(Violation("MissingActiveObject", tag))
        if hand.offset is not None and not hand.offset.is_normalized():
            out.append(Violation("OffsetNorm", tag))
        if hand.active_object_id is not None and hand.active_object_id not in seen_ids:
            out.append(Violation("ReferentialIntegrity", f"{tag}->object[{hand.active_object_id}]"))
    if ground_truth:
        for side, count in sorted(sides.items()):
            if count > 1:
                out.append(Violation("DuplicateSide", f"{frame.frame_id}/side={side.value}"))
    return out


def _box_violations(box: BBox2D, frame: FrameAnnotation, tag: str) -> list[Violation]:
    if box.x_min < 0 or box.y_min < 0 or box.x_max > frame.width or box.y_max > frame.height:
        return [Violation("BoundsViolation", tag)]
    return []


# ---------------------------------------------------------------------------
# statistics


def compute_stats(frames: DatasetIndex | Iterable[FrameAnnotation]) -> DatasetStats:
    if isinstance(frames, DatasetIndex):
        frames = frames.frames
    n_images = n_hands = n_ehois = n_left = n_right = n_objects = 0
    for frame in frames:
        n_images += 1
        n_objects += len(frame.objects)
        for hand in frame.hands:
            n_hands += 1
            if hand.side is Side.LEFT:
                n_left += 1
            else:
                n_right += 1
            if hand.contact_state is ContactState.IN_CONTACT:
                n_ehois += 1
    return DatasetStats(n_images, n_hands, n_ehois, n_left, n_right, n_objects)


# ---------------------------------------------------------------------------
# JSON document schema

_TOP_KEYS = {"split", "categories", "frames"}
_FRAME_KEYS = {"id", "width", "height", "hands", "objects"}
_FRAME_OPTIONAL = {"depth", "mask"}
_HAND_KEYS = {"box", "side", "state"}
_HAND_OPTIONAL = {"offset", "active_object", "score"}
_OBJECT_KEYS = {"instance_id", "box", "category_id"}
_OBJECT_OPTIONAL = {"score"}


def parse_dataset(data: bytes | str) -> DatasetIndex:
    """Parse and schema-check an annotation document.

    Raises DocumentSyntaxError, SchemaError or ReferentialError. Frame-level
    rules that are data problems rather than schema problems (bounds, contact
    consistency, side uniqueness) are left to :func:`validate_frame`.
    A missing ``score`` defaults to 1.0.
    """
    try:
        text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else data
        doc = json.loads(text, parse_constant=_reject_constant)
    except (UnicodeDecodeError, ValueError) as exc:
        raise DocumentSyntaxError(str(exc)) from exc
    return dataset_from_dict(doc)


def _reject_constant(name: str) -> Any:
    raise ValueError(f"non-standard JSON constant {name}")


def dataset_from_dict(doc: Any) -> DatasetIndex:
    _check_keys(doc, _TOP_KEYS, set(), "document")
    split = doc["split"]
    if split not in SPLITS:
        raise SchemaError(f"split: expected one of {SPLITS}, got {split!r}")
    categories = tuple(_parse_category(c, i) for i, c in enumerate(_list(doc["categories"], "categories")))
    if len({c.id for c in categories}) != len(categories):
        raise SchemaError("categories: duplicate id")
    known = {c.id for c in categories}
    frames = tuple(_parse_frame(f, i, known) for i, f in enumerate(_list(doc["frames"], "frames")))
    ids = [f.frame_id for f in frames]
    if len(set(ids)) != len(ids):
        raise SchemaError("frames: duplicate frame id")
    return DatasetIndex(split=split, frames=frames, categories=categories)


def _check_keys(obj: Any, required: set[str], optional: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise SchemaError(f"{where}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise SchemaError(f"{where}: missing field(s) {sorted(missing)}")
    extra = obj.keys() - required - optional
    if extra:
        raise SchemaError(f"{where}: unexpected field(s) {sorted(extra)}")


def _list(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise SchemaError(f"{where}: expected a list")
    return value


def _int(value: Any, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"{where}: expected an integer")
    return value


def _num(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"{where}: expected a number")
    return float(value)


def _box(value: Any, where: str) -> BBox2D:
    coords = _list(value, where)
    if len(coords) != 4:
        raise SchemaError(f"{where}: expected [x0, y0, x1, y1]")
    try:
        return BBox2D(*(_num(v, where) for v in coords))
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{where}: {exc}") from exc


def _parse_category(obj: Any, i: int) -> ObjectCategory:
    where = f"categories[{i}]"
    _check_keys(obj, {"id", "name"}, set(), where)
    try:
        return ObjectCategory(_int(obj["id"], where + ".id"), obj["name"])
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{where}: {exc}") from exc


def _parse_frame(obj: Any, i: int, known_categories: set[int]) -> FrameAnnotation:
    where = f"frames[{i}]"
    _check_keys(obj, _FRAME_KEYS, _FRAME_OPTIONAL, where)
    frame_id = obj["id"]
    if not isinstance(frame_id, str) or not frame_id:
        raise SchemaError(f"{where}.id: expected a non-empty string")
    where = f"frame {frame_id!r}"
    width = _int(obj["width"], where + ".width")
    height = _int(obj["height"], where + ".height")
    if width <= 0 or height <= 0:
        raise SchemaError(f"{where}: image size must be positive")

    objects = []
    seen: set[int] = set()
    for j, o in enumerate(_list(obj["objects"], where + ".objects")):
        ow = f"{where}.objects[{j}]"
        _check_keys(o, _OBJECT_KEYS, _OBJECT_OPTIONAL, ow)
        instance_id = _int(o["instance_id"], ow + ".instance_id")
        if instance_id in seen:
            raise SchemaError(f"{ow}: duplicate instance_id {instance_id}")
        seen.add(instance_id)
        category_id = _int(o["category_id"], ow + ".category_id")
        if category_id not in known_categories:
            raise SchemaError(f"{ow}.category_id: unknown category {category_id}")
        objects.append(
            ObjectInstance(
                instance_id=instance_id,
                box=_box(o["box"], ow + ".box"),
                category=CATEGORIES[category_id],
                score=_num(o.get("score", 1.0), ow + ".score"),
            )
        )

    hands = []
    for j, h in enumerate(_list(obj["hands"], where + ".hands")):
        hw = f"{where}.hands[{j}]"
        _check_keys(h, _HAND_KEYS, _HAND_OPTIONAL, hw)
        try:
            side = Side(h["side"])
        except ValueError:
            raise SchemaError(f"{hw}.side: expected 'L' or 'R', got {h['side']!r}") from None
        try:
            state = ContactState(h["state"])
        except ValueError:
            raise SchemaError(f"{hw}.state: expected 'N' or 'C', got {h['state']!r}") from None
        offset = None
        if "offset" in h:
            _check_keys(h["offset"], {"vx", "vy", "m"}, set(), hw + ".offset")
            offset = OffsetVector(*(_num(h["offset"][k], f"{hw}.offset.{k}") for k in ("vx", "vy", "m")))
        active = None
        if "active_object" in h:
            active = _int(h["active_object"], hw + ".active_object")
            if active not in seen:
                raise ReferentialError(f"{hw}: active_object {active} not found in frame")
        hands.append(
            HandInstance(
                box=_box(h["box"], hw + ".box"),
                side=side,
                contact_state=state,
                offset=offset,
                active_object_id=active,
                score=_num(h.get("score", 1.0), hw + ".score"),
            )
        )

    depth = obj.get("depth")
    mask = obj.get("mask")
    for key, value in (("depth", depth), ("mask", mask)):
        if value is not None and not isinstance(value, str):
            raise SchemaError(f"{where}.{key}: expected a path string")
    return FrameAnnotation(
        frame_id=frame_id,
        width=width,
        height=height,
        hands=tuple(hands),
        objects=tuple(objects),
        depth_path=depth,
        mask_path=mask,
    )


def _fmt(x: float) -> float:
    return 0.0 if x == 0 else float(x)  # folds -0.0


def _dump(value: Any, level: int = 0) -> str:
    pad = " " * (level + 1)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(value[k], level + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + " " * level + "}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        if all(isinstance(v, (int, float)) for v in value):
            return "[" + ", ".join(_dump(v) for v in value) + "]"
        return "[\n" + ",\n".join(pad + _dump(v, level + 1) for v in value) + "\n" + " " * level + "]"
    if isinstance(value, bool) or value is None:
        return json.dumps(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("non-finite number in annotation")
        return format(value, ".9g")
    return json.dumps(value, ensure_ascii=False)


def frame_to_dict(frame: FrameAnnotation) -> dict:
    hands = []
    for h in frame.hands:
        d: dict[str, Any] = {
            "box": [_fmt(v) for v in h.box.as_tuple()],
            "side": h.side.value,
            "state": h.contact_state.value,
            "score": _fmt(h.score),
        }
        if h.offset is not None:
            d["offset"] = {"vx": _fmt(h.offset.vx), "vy": _fmt(h.offset.vy), "m": _fmt(h.offset.m)}
        if h.active_object_id is not None:
            d["active_object"] = h.active_object_id
        hands.append(d)
    out: dict[str, Any] = {
        "id": frame.frame_id,
        "width": frame.width,
        "height": frame.height,
        "hands": hands,
        "objects": [
            {
                "instance_id": o.instance_id,
                "box": [_fmt(v) for v in o.box.as_tuple()],
                "category_id": o.category.id,
                "score": _fmt(o.score),
            }
            for o in frame.objects
        ],
    }
    if frame.depth_path is not None:
        out["depth"] = frame.depth_path
    if frame.mask_path is not None:
        out["mask"] = frame.mask_path
    return out


def dataset_to_dict(index: DatasetIndex) -> dict:
    return {
        "split": index.split,
        "categories": [{"id": c.id, "name": c.name} for c in sorted(index.categories, key=lambda c: c.id)],
        "frames": [frame_to_dict(f) for f in sorted(index.frames, key=lambda f: f.frame_id)],
    }


def serialize_dataset(index: DatasetIndex) -> bytes:
    """Canonical UTF-8 form: sorted keys, frames ordered by id, floats at 9
    significant digits. The output is a fixed point of parse-then-serialize."""
    return (_dump(dataset_to_dict(index)) + "\n").encode("utf-8")


def load_dataset(path) -> DatasetIndex:
    with open(path, "rb") as fh:
        return parse_dataset(fh.read())


def with_frames(index: DatasetIndex, frames: Sequence[FrameAnnotation]) -> DatasetIndex:
    return replace(index, frames=tuple(frames))


__all__ = [
    "AnnotationError",
    "BBox2D",
    "CATEGORIES",
    "CATEGORY_NAMES",
    "ContactState",
    "DatasetIndex",
    "DatasetStats",
    "DocumentSyntaxError",
    "FrameAnnotation",
    "HandInstance",
    "InvalidFactor",
    "ObjectCategory",
    "ObjectInstance",
    "OffsetVector",
    "ReferentialError",
    "SchemaError",
    "Side",
    "Violation",
    "compute_stats",
    "dataset_from_dict",
    "enlarge_box",
    "frame_to_dict",
    "load_dataset",
    "parse_dataset",
    "serialize_dataset",
    "validate_frame",
    "with_frames",
]
