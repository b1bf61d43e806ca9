"""Scenario configuration for a generation run."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Any

from ..annotations import CATEGORIES, CATEGORY_NAMES, SPLITS


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class TargetPolicy:
    """Which object the agent interacts with: uniform over the graspable
    instances in the scene, or always a fixed category."""

    fixed_category: int | None = None

    @classmethod
    def uniform(cls) -> "TargetPolicy":
        return cls(None)

    @classmethod
    def fixed(cls, category: int | str) -> "TargetPolicy":
        if isinstance(category, str):
            category = CATEGORY_NAMES.index(category)
        return cls(category)

    def to_json(self) -> Any:
        return "uniform" if self.fixed_category is None else {"fixed_category": self.fixed_category}

    @classmethod
    def from_json(cls, value: Any) -> "TargetPolicy":
        if value == "uniform":
            return cls.uniform()
        if isinstance(value, dict) and set(value) == {"fixed_category"}:
            cat = value["fixed_category"]
            if isinstance(cat, str) and cat in CATEGORY_NAMES:
                return cls.fixed(cat)
            if isinstance(cat, int) and not isinstance(cat, bool) and 0 <= cat < len(CATEGORIES):
                return cls.fixed(cat)
        raise ConfigError("target_policy", f"expected 'uniform' or {{'fixed_category': id}}, got {value!r}")


DEFAULT_GRASPABLE = tuple(c.id for c in CATEGORIES if c.name != "working area")


@dataclass(frozen=True)
class ScenarioConfig:
    """Generation parameters. Distances in meters, angles in degrees.

    The four interaction parameters (``p_interaction``, ``target_policy``,
    ``p_two_hands``, ``p_right_hand``) are drawn once per iteration; the
    camera is re-drawn for every frame of an iteration.
    """

    iterations: int = 1
    frames_per_iteration: int = 1
    master_seed: int = 0
    p_interaction: float = 0.5
    p_two_hands: float = 0.5
    p_right_hand: float = 0.5
    target_policy: TargetPolicy = field(default_factory=TargetPolicy.uniform)
    image_width: int = 640
    image_height: int = 480
    split: str = "train"
    min_visible_pixels: int = 25
    objects_per_scene: tuple[int, int] = (3, 6)
    graspable: tuple[int, ...] = DEFAULT_GRASPABLE
    table_z: float = 0.75
    table_x: tuple[float, float] = (-0.7, 0.7)
    table_y: tuple[float, float] = (0.0, 0.8)
    max_placement_attempts: int = 1000
    max_view_attempts: int = 8
    yaw_limits_deg: tuple[float, float] = (-180.0, 180.0)
    pitch_limits_deg: tuple[float, float] = (0.0, 0.0)
    roll_limits_deg: tuple[float, float] = (0.0, 0.0)
    player_x: tuple[float, float] = (-0.15, 0.15)
    player_y: tuple[float, float] = (-0.40, -0.28)
    eye_height: tuple[float, float] = (0.50, 0.62)
    look_jitter: float = 0.05
    fov_deg: tuple[float, float] = (55.0, 65.0)
    hover_height: tuple[float, float] = (0.04, 0.10)
    contact_gap: float = 0.002
    contact_epsilon: float = 0.005

    def __post_init__(self) -> None:
        for name in ("p_interaction", "p_two_hands", "p_right_hand"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
                raise ConfigError(name, f"probability must be in [0, 1], got {value!r}")
        for name in ("iterations", "frames_per_iteration", "image_width", "image_height", "max_placement_attempts",
                     "max_view_attempts"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(name, f"must be an integer >= 1, got {value!r}")
        if not isinstance(self.master_seed, int) or not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
        if self.split not in SPLITS:
            raise ConfigError("split", f"expected one of {SPLITS}")
        if self.min_visible_pixels < 1:
            raise ConfigError("min_visible_pixels", "must be >= 1")
        lo, hi = self.objects_per_scene
        if not 1 <= lo <= hi <= len(CATEGORIES):
            raise ConfigError("objects_per_scene", f"need 1 <= min <= max <= {len(CATEGORIES)}")
        if not self.graspable or any(not 0 <= c < len(CATEGORIES) for c in self.graspable):
            raise ConfigError("graspable", "must list valid category ids")
        for name in ("table_x", "table_y", "yaw_limits_deg", "pitch_limits_deg", "roll_limits_deg",
                     "player_x", "player_y", "eye_height", "fov_deg", "hover_height"):
            a, b = getattr(self, name)
            if not (math.isfinite(a) and math.isfinite(b) and a <= b):
                raise ConfigError(name, "expected [low, high] with low <= high")
        if not (0.0 < self.fov_deg[0] and self.fov_deg[1] < 180.0):
            raise ConfigError("fov_deg", "field of view must lie in (0, 180)")
        if self.eye_height[0] <= 0:
            raise ConfigError("eye_height", "camera must sit above the table")
        if not 0.0 < self.contact_gap <= self.contact_epsilon:
            raise ConfigError("contact_gap", "must be positive and no larger than contact_epsilon")

    @property
    def n_frames(self) -> int:
        return self.iterations * self.frames_per_iteration

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, master_seed=seed)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["target_policy"] = self.target_policy.to_json()
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}

    @classmethod
    def from_dict(cls, data: Any) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("config", "expected a JSON object")
        known = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        kwargs: dict[str, Any] = {}
        for key, value in data.items():
            if key == "target_policy":
                kwargs[key] = TargetPolicy.from_json(value)
            elif isinstance(value, list):
                if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
                    raise ConfigError(key, "expected a list of numbers")
                kwargs[key] = tuple(value)
                if key != "graspable" and len(value) != 2:
                    raise ConfigError(key, "expected [low, high]")
            else:
                kwargs[key] = value
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError("config", str(exc)) from exc

    @classmethod
    def from_json(cls, text: str | bytes) -> "ScenarioConfig":
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise ConfigError("config", f"not valid JSON ({exc})") from exc
        return cls.from_dict(data)
