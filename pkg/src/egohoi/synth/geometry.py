"""Scene primitives: posed cuboids, hands, the pinhole camera and the scene graph.

World frame is right-handed with z up; the operator faces +y, so +x is to
their right. Angles are radians. A cuboid's rotation is
``Rz(yaw) @ Ry(pitch) @ Rx(roll)`` applied to its local frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from ..annotations import CATEGORIES, ObjectCategory, Side

NEAR_PLANE = 0.01
HAND_HALF_EXTENTS = (0.045, 0.09, 0.02)  # 0.09 x 0.18 x 0.04 m paddle, long axis local +y
HAND_MASK_IDS = {Side.LEFT: 1001, Side.RIGHT: 1002}


class DegenerateCamera(ValueError):
    pass


def rotation_matrix(yaw: float, pitch: float, roll: float) -> np.ndarray:
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


_CORNER_SIGNS = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)], dtype=np.float64)


@dataclass(frozen=True)
class _Posed:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    yaw: float = 0.0
    pitch: float = 0.0
    roll: float = 0.0

    def rotation(self) -> np.ndarray:
        return self._rotation

    def vertices(self) -> np.ndarray:
        """(8, 3) world-space corners."""
        return self._vertices

    # cached on the frozen instance; callers treat the arrays as read-only
    @cached_property
    def _rotation(self) -> np.ndarray:
        return rotation_matrix(self.yaw, self.pitch, self.roll)

    @cached_property
    def _vertices(self) -> np.ndarray:
        local = _CORNER_SIGNS * np.asarray(self.half_extents)
        return local @ self._rotation.T + np.asarray(self.center)

    def footprint_aabb(self) -> tuple[float, float, float, float]:
        v = self.vertices()
        return (float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max()))

    def top_z(self) -> float:
        return float(self.vertices()[:, 2].max())


@dataclass(frozen=True)
class CuboidPrimitive(_Posed):
    instance_id: int = 0
    category: ObjectCategory = CATEGORIES[0]
    rotation_limits: tuple[tuple[float, float], ...] = ((-math.pi, math.pi), (0.0, 0.0), (0.0, 0.0))

    def __post_init__(self) -> None:
        if min(self.half_extents) <= 0:
            raise ValueError("half extents must be positive")
        for angle, (lo, hi) in zip((self.yaw, self.pitch, self.roll), self.rotation_limits):
            if not lo - 1e-12 <= angle <= hi + 1e-12:
                raise ValueError(f"angle {angle} outside rotation limits [{lo}, {hi}]")

    @property
    def mask_id(self) -> int:
        return self.instance_id


@dataclass(frozen=True)
class HandPrimitive(_Posed):
    side: Side = Side.RIGHT
    in_contact: bool = False
    grasped_id: int | None = None

    @property
    def mask_id(self) -> int:
        return HAND_MASK_IDS[self.side]


@dataclass(frozen=True)
class CameraModel:
    position: tuple[float, float, float]
    look_at: tuple[float, float, float]
    vertical_fov: float
    width: int
    height: int

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(forward, right, up) unit vectors."""
        return self._basis

    @cached_property
    def _basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        pos = np.asarray(self.position, dtype=np.float64)
        target = np.asarray(self.look_at, dtype=np.float64)
        if not (0.0 < self.vertical_fov < math.pi) or self.width < 1 or self.height < 1:
            raise DegenerateCamera(f"bad intrinsics fov={self.vertical_fov} size={self.width}x{self.height}")
        forward = target - pos
        norm = np.linalg.norm(forward)
        if not np.isfinite(norm) or norm < 1e-12:
            raise DegenerateCamera("camera position coincides with look_at")
        forward /= norm
        up_hint = np.array([0.0, 0.0, 1.0])
        right = np.cross(forward, up_hint)
        if np.linalg.norm(right) < 1e-9:
            right = np.cross(forward, np.array([0.0, 1.0, 0.0]))
        right /= np.linalg.norm(right)
        up = np.cross(right, forward)
        return forward, right, up

    def ray_directions(self, rows: slice = slice(None), cols: slice = slice(None)) -> np.ndarray:
        """Unit ray directions through pixel centers, shape (h, w, 3)."""
        return np.moveaxis(self.ray_components(rows, cols), 0, -1)

    def ray_components(self, rows: slice = slice(None), cols: slice = slice(None)) -> np.ndarray:
        """Same rays as ``ray_directions`` laid out component-first, shape (3, h, w)."""
        forward, right, up = self.basis()
        x, y = self.image_plane(rows, cols)
        d = forward[:, None, None] + x[None, None, :] * right[:, None, None] + y[None, :, None] * up[:, None, None]
        d /= np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        return d

    def image_plane(self, rows: slice = slice(None), cols: slice = slice(None)) -> tuple[np.ndarray, np.ndarray]:
        """Per-column x and per-row y of pixel centers on the plane one unit
        ahead; the ray through (r, c) is ``forward + x[c] * right + y[r] * up``."""
        t = math.tan(0.5 * self.vertical_fov)
        aspect = self.width / self.height
        c = np.arange(self.width, dtype=np.float64)[cols]
        r = np.arange(self.height, dtype=np.float64)[rows]
        return (2.0 * (c + 0.5) / self.width - 1.0) * t * aspect, (1.0 - 2.0 * (r + 0.5) / self.height) * t

    def pixel_rays(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Unit rays through the given pixel centers, shape (n, 3)."""
        forward, right, up = self.basis()
        t = math.tan(0.5 * self.vertical_fov)
        aspect = self.width / self.height
        x = (2.0 * (np.asarray(cols, dtype=np.float64) + 0.5) / self.width - 1.0) * t * aspect
        y = (1.0 - 2.0 * (np.asarray(rows, dtype=np.float64) + 0.5) / self.height) * t
        d = forward[None, :] + x[:, None] * right[None, :] + y[:, None] * up[None, :]
        return d / np.linalg.norm(d, axis=1, keepdims=True)

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Continuous (col, row) pixel coordinates and camera-axis depth."""
        forward, right, up = self.basis()
        q = np.asarray(points, dtype=np.float64) - np.asarray(self.position)
        z = q @ forward
        t = math.tan(0.5 * self.vertical_fov)
        aspect = self.width / self.height
        with np.errstate(divide="ignore", invalid="ignore"):
            x = (q @ right) / (z * t * aspect)
            y = (q @ up) / (z * t)
        col = (x + 1.0) * 0.5 * self.width - 0.5
        row = (1.0 - y) * 0.5 * self.height - 0.5
        return col, row, z


@dataclass(frozen=True)
class SceneGraph:
    camera: CameraModel
    objects: tuple[CuboidPrimitive, ...] = ()
    hands: tuple[HandPrimitive, ...] = ()
    table_z: float = 0.75
    shirt_texture: str = ""
    iteration: int = 0
    frame: int = 0
    attributes: dict = field(default_factory=dict, compare=False)

    def object_by_id(self, instance_id: int) -> CuboidPrimitive | None:
        for obj in self.objects:
            if obj.instance_id == instance_id:
                return obj
        return None

    def primitives(self) -> list[_Posed]:
        return [*self.objects, *self.hands]

    def to_dict(self) -> dict:
        cam = self.camera
        return {
            "iteration": self.iteration,
            "frame": self.frame,
            "table_z": self.table_z,
            "shirt_texture": self.shirt_texture,
            "attributes": dict(self.attributes),
            "camera": {
                "position": list(cam.position),
                "look_at": list(cam.look_at),
                "vertical_fov": cam.vertical_fov,
                "width": cam.width,
                "height": cam.height,
            },
            "objects": [
                {
                    "instance_id": o.instance_id,
                    "category_id": o.category.id,
                    "center": list(o.center),
                    "half_extents": list(o.half_extents),
                    "yaw": o.yaw,
                    "pitch": o.pitch,
                    "roll": o.roll,
                    "rotation_limits": [list(r) for r in o.rotation_limits],
                }
                for o in self.objects
            ],
            "hands": [
                {
                    "side": h.side.value,
                    "in_contact": h.in_contact,
                    "grasped_id": h.grasped_id,
                    "center": list(h.center),
                    "half_extents": list(h.half_extents),
                    "yaw": h.yaw,
                    "pitch": h.pitch,
                    "roll": h.roll,
                }
                for h in self.hands
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneGraph":
        cam = d["camera"]
        return cls(
            camera=CameraModel(
                tuple(cam["position"]), tuple(cam["look_at"]), cam["vertical_fov"], cam["width"], cam["height"]
            ),
            objects=tuple(
                CuboidPrimitive(
                    center=tuple(o["center"]),
                    half_extents=tuple(o["half_extents"]),
                    yaw=o["yaw"],
                    pitch=o["pitch"],
                    roll=o["roll"],
                    instance_id=o["instance_id"],
                    category=CATEGORIES[o["category_id"]],
                    rotation_limits=tuple(tuple(r) for r in o["rotation_limits"]),
                )
                for o in d["objects"]
            ),
            hands=tuple(
                HandPrimitive(
                    center=tuple(h["center"]),
                    half_extents=tuple(h["half_extents"]),
                    yaw=h["yaw"],
                    pitch=h["pitch"],
                    roll=h["roll"],
                    side=Side(h["side"]),
                    in_contact=h["in_contact"],
                    grasped_id=h["grasped_id"],
                )
                for h in d["hands"]
            ),
            table_z=d["table_z"],
            shirt_texture=d["shirt_texture"],
            iteration=d["iteration"],
            frame=d["frame"],
            attributes=dict(d.get("attributes", {})),
        )


def box_distance(a: _Posed, b: _Posed) -> float:
    """Minimum Euclidean distance between two solid cuboids (0 if they touch
    or overlap).

    Solved as a bound-constrained convex QP over the local coordinates of one
    point in each box.
    """
    ra, rb = a.rotation(), b.rotation()
    ha, hb = np.asarray(a.half_extents), np.asarray(b.half_extents)
    ca, cb = np.asarray(a.center), np.asarray(b.center)

    def objective(x):
        diff = ca + ra @ (ha * x[:3]) - cb - rb @ (hb * x[3:])
        grad = np.concatenate(((ra.T @ diff) * ha, -(rb.T @ diff) * hb)) * 2.0
        return float(diff @ diff), grad

    start = np.concatenate((np.clip(ra.T @ (cb - ca) / ha, -1, 1), np.clip(rb.T @ (ca - cb) / hb, -1, 1)))
    res = minimize(objective, start, jac=True, method="L-BFGS-B", bounds=[(-1.0, 1.0)] * 6,
                   options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 500})
    return math.sqrt(max(res.fun, 0.0))


def footprints_overlap_area(a: tuple[float, float, float, float], b: tuple[float, float, float, float]) -> float:
    w = min(a[2], b[2]) - max(a[0], b[0])
    h = min(a[3], b[3]) - max(a[1], b[1])
    return max(w, 0.0) * max(h, 0.0)
