"""Independent reference implementations used by the tests.

Nothing here imports the engine's matching or AP code: boxes are plain
tuples, arithmetic is exact (Fraction) where it matters, and the loops are
written for clarity rather than speed.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

# ---------------------------------------------------------------------------
# average precision


def box_iou_exact(a, b) -> Fraction:
    ax0, ay0, ax1, ay1 = (Fraction(v) for v in a)
    bx0, by0, bx1, by1 = (Fraction(v) for v in b)
    iw = max(Fraction(0), min(ax1, bx1) - max(ax0, bx0))
    ih = max(Fraction(0), min(ay1, by1) - max(ay0, by0))
    inter = iw * ih
    union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter
    return Fraction(0) if union <= 0 else inter / union


def oracle_tp(dets, gts, need_side, need_state, need_obj, thr=Fraction(1, 2), obj_thr=Fraction(1, 2)):
    """dets: list of dicts with frame, score, box, side, state, obox, ocat.
    gts: {frame: [dict(box, side, state, obox, ocat)]}. Returns TP booleans
    in rank order and the GT count."""
    order = sorted(range(len(dets)), key=lambda i: (-dets[i]["score"], dets[i]["frame"], i))
    taken = {f: [False] * len(v) for f, v in gts.items()}
    flags = []
    for i in order:
        d = dets[i]
        cands = gts.get(d["frame"], [])
        pick = None
        pick_iou = None
        for j, g in enumerate(cands):
            if taken[d["frame"]][j]:
                continue
            ov = box_iou_exact(d["box"], g["box"])
            if ov < thr:
                continue
            if pick is None or ov > pick_iou:
                pick, pick_iou = j, ov
        if pick is None:
            flags.append(False)
            continue
        taken[d["frame"]][pick] = True
        g = cands[pick]
        ok = True
        if need_side and d["side"] != g["side"]:
            ok = False
        if need_state and d["state"] != g["state"]:
            ok = False
        if need_obj:
            if d["obox"] is None or g["obox"] is None or d["ocat"] != g["ocat"]:
                ok = False
            elif box_iou_exact(d["obox"], g["obox"]) < obj_thr:
                ok = False
        flags.append(ok)
    return flags, sum(len(v) for v in gts.values())


def oracle_ap(flags, n_gt):
    """Explicit PR curve, then for every recall level reached the best
    precision at any cut with at least that recall."""
    if n_gt == 0:
        return None
    curve = []
    tp = 0
    for k, f in enumerate(flags, start=1):
        tp += bool(f)
        curve.append((Fraction(tp, n_gt), Fraction(tp, k)))
    ap = Fraction(0)
    prev = Fraction(0)
    for r, _ in curve:
        if r > prev:
            best = max(p for rr, p in curve if rr >= r)
            ap += (r - prev) * best
            prev = r
    return ap


FRAMES = ("a", "b", "c", "d")


def random_box(rng: random.Random, grid: int = 12):
    x0 = rng.randrange(0, grid - 1)
    y0 = rng.randrange(0, grid - 1)
    return (x0, y0, rng.randrange(x0 + 1, grid + 1), rng.randrange(y0 + 1, grid + 1))


def jitter(rng: random.Random, box, grid: int = 12):
    x0, y0, x1, y1 = box
    dx, dy = rng.randint(-1, 1), rng.randint(-1, 1)
    nx0, ny0 = min(max(x0 + dx, 0), grid - 1), min(max(y0 + dy, 0), grid - 1)
    return (nx0, ny0, max(x1 + dx, nx0 + 1), max(y1 + dy, ny0 + 1))


def micro_instance(rng: random.Random):
    """At most 4 frames and 6 detections, with coarse boxes and repeated
    scores so IoU ties and score ties both occur."""
    n_frames = rng.randint(1, 4)
    gts = {}
    for f in FRAMES[:n_frames]:
        gts[f] = [
            {
                "box": random_box(rng),
                "side": rng.choice("LR"),
                "state": rng.choice("NC"),
                "obox": random_box(rng) if rng.random() < 0.7 else None,
                "ocat": rng.randrange(3),
            }
            for _ in range(rng.randint(0, 3))
        ]
    dets = []
    for _ in range(rng.randint(0, 6)):
        f = rng.choice(FRAMES[:n_frames])
        if gts[f] and rng.random() < 0.7:
            g = rng.choice(gts[f])
            box = jitter(rng, g["box"]) if rng.random() < 0.5 else g["box"]
            obox = g["obox"] if rng.random() < 0.6 else (random_box(rng) if rng.random() < 0.5 else None)
            side = g["side"] if rng.random() < 0.7 else rng.choice("LR")
            state = g["state"] if rng.random() < 0.7 else rng.choice("NC")
            ocat = g["ocat"] if rng.random() < 0.8 else rng.randrange(3)
        else:
            box = random_box(rng)
            obox = random_box(rng) if rng.random() < 0.5 else None
            side, state, ocat = rng.choice("LR"), rng.choice("NC"), rng.randrange(3)
        dets.append({"frame": f, "score": rng.choice((0.25, 0.5, 0.5, 0.75, 1.0)), "box": box,
                     "side": side, "state": state, "obox": obox, "ocat": ocat})
    return dets, gts


# ---------------------------------------------------------------------------
# rendering


def rot_zyx(yaw, pitch, roll):
    cy, sy = math.cos(yaw), math.sin(yaw)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cr, sr = math.cos(roll), math.sin(roll)
    # Rz @ Ry @ Rx written out by hand
    return (
        (cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr),
        (sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr),
        (-sp, cp * sr, cp * cr),
    )


def ray_cuboid(origin, direction, center, half, yaw=0.0, pitch=0.0, roll=0.0, near=0.01):
    """Smallest t >= near with origin + t*direction on the cuboid surface,
    found by intersecting each of the six face planes."""
    r = rot_zyx(yaw, pitch, roll)
    rel = [origin[i] - center[i] for i in range(3)]
    o = [sum(r[i][k] * rel[i] for i in range(3)) for k in range(3)]
    d = [sum(r[i][k] * direction[i] for i in range(3)) for k in range(3)]
    best = math.inf
    for axis in range(3):
        if d[axis] == 0.0:
            continue
        for sign in (-1.0, 1.0):
            t = (sign * half[axis] - o[axis]) / d[axis]
            if t < near or t >= best:
                continue
            ok = True
            for k in range(3):
                if k != axis and abs(o[k] + t * d[k]) > half[k] + 1e-12:
                    ok = False
            if ok:
                best = t
    return best


def pinhole_ray(position, look_at, fov, width, height, row, col):
    f = [look_at[i] - position[i] for i in range(3)]
    n = math.sqrt(sum(v * v for v in f))
    f = [v / n for v in f]
    right = [f[1], -f[0], 0.0]  # f x z
    n = math.sqrt(sum(v * v for v in right))
    right = [v / n for v in right]
    up = [right[1] * f[2] - right[2] * f[1], right[2] * f[0] - right[0] * f[2], right[0] * f[1] - right[1] * f[0]]
    t = math.tan(fov / 2)
    x = (2 * (col + 0.5) / width - 1) * t * width / height
    y = (1 - 2 * (row + 0.5) / height) * t
    d = [f[i] + x * right[i] + y * up[i] for i in range(3)]
    n = math.sqrt(sum(v * v for v in d))
    return [v / n for v in d]
