"""Procedural scene sampling.

One iteration draws, each from its own keyed stream:

* ``scenario``: interaction yes/no, interacting side, second hand, target pick
* ``placement``: object set and non-overlapping table positions
* ``rotation``: per-object yaw/pitch/roll within the axis limits
* ``player``: where the operator stands and their eye height
* ``hands``: hand placement jitter
* ``shirt``: shirt texture label (metadata only, nothing is shaded)
* ``camera`` (per frame): the observed point and field of view

``player``, ``hands`` and ``camera`` are also keyed by a view attempt
number, and ``placement`` / ``rotation`` by ``attempt // VIEWS_PER_LAYOUT``.
A frame whose hands or grasped object end up hidden is redrawn from the next
attempt, so a target stuck behind a larger object eventually gets a new
layout. Scenario draws never depend on the attempt.
"""

from __future__ import annotations

import math

import numpy as np

from ..annotations import CATEGORIES, Side
from .config import ScenarioConfig
from .geometry import (
    HAND_HALF_EXTENTS,
    CameraModel,
    CuboidPrimitive,
    HandPrimitive,
    SceneGraph,
    footprints_overlap_area,
)
from .rng import stream

# Full extents (length, width, height) in meters per category id.
CATEGORY_SIZES: dict[int, tuple[float, float, float]] = {
    0: (0.25, 0.20, 0.12),   # power supply
    1: (0.32, 0.22, 0.16),   # oscilloscope
    2: (0.22, 0.18, 0.12),   # welder station
    3: (0.20, 0.05, 0.05),   # electric screwdriver
    4: (0.20, 0.03, 0.03),   # screwdriver
    5: (0.18, 0.06, 0.02),   # pliers
    6: (0.16, 0.03, 0.03),   # welder probe tip
    7: (0.14, 0.03, 0.03),   # oscilloscope probe tip
    8: (0.16, 0.12, 0.02),   # low voltage board
    9: (0.18, 0.14, 0.02),   # high voltage board
    10: (0.12, 0.08, 0.03),  # register
    11: (0.08, 0.06, 0.05),  # electric screwdriver battery
    12: (0.30, 0.22, 0.01),  # working area
    13: (0.12, 0.10, 0.06),  # welder base
    14: (0.10, 0.07, 0.05),  # socket
    15: (0.04, 0.04, 0.03),  # left red button
    16: (0.04, 0.04, 0.03),  # left green button
    17: (0.04, 0.04, 0.03),  # right red button
    18: (0.04, 0.04, 0.03),  # right green button
}

SHIRT_TEXTURES = ("plain_blue", "plain_grey", "plain_black", "striped_red", "checked_green", "denim", "white_labcoat", "navy_polo")

SECOND_HAND_OFFSET = (0.21, 0.28)  # lateral distance from the first hand, m
SECOND_HAND_CLEARANCE = 0.05  # gap between a free hand and the target's side, m
FINGERTIP_INSET = 0.01
VIEWS_PER_LAYOUT = 4  # how far the fingertips reach past the contact vertex, m


class PlacementFailure(RuntimeError):
    def __init__(self, iteration: int, category: str, attempts: int) -> None:
        super().__init__(f"iteration {iteration}: could not place {category!r} after {attempts} attempts")
        self.iteration = iteration


def _uniform(rng: np.random.Generator, bounds: tuple[float, float]) -> float:
    lo, hi = bounds
    return float(lo + (hi - lo) * rng.random())


def _place_objects(config: ScenarioConfig, iteration: int, want_category: int | None,
                   layout: int = 0) -> tuple[CuboidPrimitive, ...]:
    placement = stream(config.master_seed, iteration, "placement", layout)
    rotation = stream(config.master_seed, iteration, "rotation", layout)
    lo, hi = config.objects_per_scene
    n = int(placement.integers(lo, hi + 1))
    categories = [int(c) for c in placement.permutation(len(CATEGORIES))[:n]]
    if want_category is not None and want_category not in categories:
        categories[-1] = want_category
    # largest first: random placement of small items rarely strands a big one
    categories.sort(key=lambda c: (-CATEGORY_SIZES[c][0] * CATEGORY_SIZES[c][1], c))

    limits = tuple(
        (math.radians(a), math.radians(b))
        for a, b in (config.yaw_limits_deg, config.pitch_limits_deg, config.roll_limits_deg)
    )
    placed: list[CuboidPrimitive] = []
    footprints: list[tuple[float, float, float, float]] = []
    for idx, cid in enumerate(categories):
        half = tuple(0.5 * s for s in CATEGORY_SIZES[cid])
        for _ in range(config.max_placement_attempts):
            # fixed draw count per attempt keeps both streams' layout independent of feasibility
            yaw, pitch, roll = (_uniform(rotation, lim) for lim in limits)
            ux, uy = placement.random(), placement.random()
            probe = CuboidPrimitive(center=(0.0, 0.0, 0.0), half_extents=half, yaw=yaw, pitch=pitch, roll=roll,
                                    instance_id=idx + 1, category=CATEGORIES[cid], rotation_limits=limits)
            x0, y0, x1, y1 = probe.footprint_aabb()
            x_range = (config.table_x[0] - x0, config.table_x[1] - x1)
            y_range = (config.table_y[0] - y0, config.table_y[1] - y1)
            if x_range[0] > x_range[1] or y_range[0] > y_range[1]:
                continue
            cx = x_range[0] + (x_range[1] - x_range[0]) * ux
            cy = y_range[0] + (y_range[1] - y_range[0]) * uy
            fp = (x0 + cx, y0 + cy, x1 + cx, y1 + cy)
            if all(footprints_overlap_area(fp, other) == 0.0 for other in footprints):
                break
        else:
            raise PlacementFailure(iteration, CATEGORIES[cid].name, config.max_placement_attempts)
        z_lift = config.table_z - float(probe.vertices()[:, 2].min())
        footprints.append(fp)
        placed.append(
            CuboidPrimitive(center=(cx, cy, z_lift), half_extents=half, yaw=yaw, pitch=pitch, roll=roll,
                            instance_id=idx + 1, category=CATEGORIES[cid], rotation_limits=limits)
        )
    return tuple(placed)


def _view_axes(obj: CuboidPrimitive, side: Side, player_xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit viewing direction toward the object, and the lateral unit vector
    pointing to the given hand's side of it."""
    u = np.asarray(obj.center[:2]) - player_xy
    u /= np.linalg.norm(u)
    right = np.array([u[1], -u[0]])
    return u, right if side is Side.RIGHT else -right


def _contact_hand(obj: CuboidPrimitive, side: Side, player_xy: np.ndarray, gap: float) -> HandPrimitive:
    """Hand reaching in from its own side, lying level just above the
    object's outermost top vertex.

    Every point of the object is at or below that vertex and the whole hand
    sits ``gap`` above it, with the vertex under the fingers, so the surface
    distance is exactly ``gap``. Approaching sideways keeps the hand off the
    object's line of sight.
    """
    u, lateral = _view_axes(obj, side, player_xy)
    v = obj.vertices()
    top = v[:, 2].max()
    candidates = v[v[:, 2] >= top - 1e-9]
    # outermost toward the hand; ties go to the vertex nearer the viewer
    key = np.round((candidates[:, :2] - np.asarray(obj.center[:2])) @ lateral, 9)
    outer = candidates[key == key.max()]
    vertex = outer[np.argmin(outer[:, :2] @ u)]
    hx, hy, hz = HAND_HALF_EXTENTS
    center_xy = vertex[:2] + lateral * (hy - FINGERTIP_INSET)
    yaw = math.atan2(lateral[0], -lateral[1])  # local +y (fingers) points along -lateral
    return HandPrimitive(
        center=(float(center_xy[0]), float(center_xy[1]), float(top + gap + hz)),
        half_extents=HAND_HALF_EXTENTS,
        yaw=yaw,
        side=side,
        in_contact=True,
        grasped_id=obj.instance_id,
    )


def _free_hand(xy: np.ndarray, yaw: float, side: Side, objects, table_z: float, hover: float) -> HandPrimitive:
    """Hand hovering above whatever lies under its footprint."""
    hx, hy, hz = HAND_HALF_EXTENTS
    probe = HandPrimitive(center=(float(xy[0]), float(xy[1]), 0.0), half_extents=HAND_HALF_EXTENTS, yaw=yaw, side=side)
    fp = probe.footprint_aabb()
    floor = table_z
    for obj in objects:
        if footprints_overlap_area(fp, obj.footprint_aabb()) > 0.0:
            floor = max(floor, obj.top_z())
    return HandPrimitive(center=(float(xy[0]), float(xy[1]), floor + hover + hz),
                         half_extents=HAND_HALF_EXTENTS, yaw=yaw, side=side)


def sample_camera(config: ScenarioConfig, scene_focus: np.ndarray, eye: tuple[float, float, float],
                  iteration: int, frame: int, attempt: int = 0) -> CameraModel:
    rng = stream(config.master_seed, iteration, "camera", frame, attempt)
    jitter = (rng.random(2) * 2.0 - 1.0) * config.look_jitter
    fov = math.radians(_uniform(rng, config.fov_deg))
    look = (float(scene_focus[0] + jitter[0]), float(scene_focus[1] + jitter[1]), float(scene_focus[2]))
    return CameraModel(position=eye, look_at=look, vertical_fov=fov,
                       width=config.image_width, height=config.image_height)


def sample_scene(config: ScenarioConfig, iteration: int, frame: int = 0, attempt: int = 0) -> SceneGraph:
    """Scene for one iteration; ``frame`` only changes the camera draw and
    ``attempt`` only the viewpoint and hand jitter."""
    if not 0 <= iteration < config.iterations:
        raise IndexError(f"iteration {iteration} outside [0, {config.iterations})")
    seed = config.master_seed
    scenario = stream(seed, iteration, "scenario")
    u_interact, u_side, u_two, u_target = scenario.random(4)
    interaction = bool(u_interact < config.p_interaction)
    primary_side = Side.RIGHT if u_side < config.p_right_hand else Side.LEFT
    two_hands = bool(u_two < config.p_two_hands)

    fixed = config.target_policy.fixed_category
    objects = _place_objects(config, iteration, fixed if interaction else None, attempt // VIEWS_PER_LAYOUT)

    player = stream(seed, iteration, "player", attempt)
    player_xy = np.array([_uniform(player, config.player_x), _uniform(player, config.player_y)])
    eye = (float(player_xy[0]), float(player_xy[1]), config.table_z + _uniform(player, config.eye_height))

    hands_rng = stream(seed, iteration, "hands", attempt)
    j_lat, j_fwd, j_yaw, j_hover1, j_second, j_second_fwd, j_second_yaw, j_hover2 = hands_rng.random(8)
    sign = 1.0 if primary_side is Side.RIGHT else -1.0

    if interaction:
        if fixed is not None:
            target = next(o for o in objects if o.category.id == fixed)
        else:
            pool = [o for o in objects if o.category.id in config.graspable] or list(objects)
            target = pool[min(int(u_target * len(pool)), len(pool) - 1)]
        primary = _contact_hand(target, primary_side, player_xy, config.contact_gap)
        focus = np.array([target.center[0], target.center[1], config.table_z])
    else:
        xy = np.array([
            player_xy[0] + sign * (0.06 + 0.14 * j_lat),
            config.table_y[0] + 0.05 + 0.20 * j_fwd,
        ])
        yaw = (j_yaw - 0.5) * 0.6
        hover = config.hover_height[0] + (config.hover_height[1] - config.hover_height[0]) * j_hover1
        primary = _free_hand(xy, yaw, primary_side, objects, config.table_z, hover)
        focus = np.array([xy[0], xy[1] + 0.1, config.table_z])

    hands = [primary]
    if two_hands:
        other = primary_side.other
        yaw = (j_second_yaw - 0.5) * 0.6
        hover = config.hover_height[0] + (config.hover_height[1] - config.hover_height[0]) * j_hover2
        if interaction:
            # beside the target on the far side from the contact hand, nearer the viewer
            u, lateral = _view_axes(target, other, player_xy)
            extent = float(((target.vertices()[:, :2] - np.asarray(target.center[:2])) @ lateral).max())
            reach = extent + SECOND_HAND_CLEARANCE + HAND_HALF_EXTENTS[0] + 0.08 * j_second
            xy = np.asarray(target.center[:2]) + lateral * reach - u * (0.05 + 0.10 * j_second_fwd)
        else:
            lat = SECOND_HAND_OFFSET[0] + (SECOND_HAND_OFFSET[1] - SECOND_HAND_OFFSET[0]) * j_second
            xy = np.array([primary.center[0] - sign * lat, primary.center[1] + (j_second_fwd - 0.5) * 0.16])
        hands.append(_free_hand(xy, yaw, other, objects, config.table_z, hover))

    shirt = SHIRT_TEXTURES[int(stream(seed, iteration, "shirt").integers(len(SHIRT_TEXTURES)))]
    camera = sample_camera(config, focus, eye, iteration, frame, attempt)
    return SceneGraph(
        camera=camera,
        objects=objects,
        hands=tuple(hands),
        table_z=config.table_z,
        shirt_texture=shirt,
        iteration=iteration,
        frame=frame,
        attributes={"interaction": interaction, "two_hands": two_hands, "primary_side": primary_side.value,
                    "view_attempt": attempt},
    )
