"""Score degraded copies of a ground-truth set and watch each metric react
to the specific damage done.

Run:  python demos/evaluate_noisy.py
"""

# %%
import random
import tempfile
from dataclasses import replace
from pathlib import Path

from egohoi.annotations import BBox2D, ContactState, load_dataset
from egohoi.metrics import evaluate
from egohoi.synth import ScenarioConfig, generate_dataset

out = Path(tempfile.mkdtemp(prefix="egohoi-eval-"))
generate_dataset(ScenarioConfig(iterations=60, master_seed=5, p_interaction=0.7, p_two_hands=0.6), out)
gt = load_dataset(out / "annotations.json")


def show(title, pred):
    print(f"\n{title}")
    print("\n".join(evaluate(pred, gt).render().splitlines()[:6]))


show("ground truth against itself", gt)


def degrade(index, hand_fn=lambda h: h, obj_fn=lambda o: o):
    return replace(index, frames=tuple(
        replace(f, hands=tuple(hand_fn(h) for h in f.hands), objects=tuple(obj_fn(o) for o in f.objects))
        for f in index.frames))


# %% Flipping every side only hurts the side-aware columns.
flipped = degrade(gt, hand_fn=lambda h: replace(h, side=h.side.other))
show("all hand sides flipped", flipped)

# %% Dropping the explicit links makes evaluation fall back on the offsets.
unlinked = degrade(gt, hand_fn=lambda h: replace(h, active_object_id=None))
show("active-object links removed, offsets kept", unlinked)

# %% Random score noise plus a few missed contacts.
rng = random.Random(0)


def noisy(h):
    state = h.contact_state
    if state is ContactState.IN_CONTACT and rng.random() < 0.25:
        return replace(h, contact_state=ContactState.NO_CONTACT, offset=None, active_object_id=None,
                       score=rng.random())
    return replace(h, score=rng.random())


def shifted(o):
    b = o.box
    dx = rng.uniform(-0.6, 0.6) * b.width
    return replace(o, box=BBox2D(max(0.0, b.x_min + dx), b.y_min, max(b.x_min + dx, 0.0) + b.width, b.y_max),
                   score=rng.random())


show("random scores, 25% of contacts missed, object boxes shifted sideways", degrade(gt, noisy, shifted))
