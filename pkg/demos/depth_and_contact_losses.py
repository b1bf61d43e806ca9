"""The depth-supervision loss on rendered depth maps, and the fused
contact-state loss.

Run:  python demos/depth_and_contact_losses.py
"""

# %%
import math

import numpy as np
from scipy import ndimage

from egohoi.losses import ContactPrediction, contact_state_loss, depth_loss_terms, normalize_depth
from egohoi.synth import ScenarioConfig, generate_frame

frame = generate_frame(ScenarioConfig(iterations=1, master_seed=3, p_interaction=1.0), 0, 0)
target = normalize_depth(frame.depth.values.astype(np.float64))
print(f"target depth {target.shape}, {np.count_nonzero(target)} nonzero pixels")

# %% Progressively worse predictions: identity, blur, shift, flat.
candidates = {
    "identical": target,
    "blurred (sigma 2)": ndimage.gaussian_filter(target, 2.0),
    "shifted 8 px": np.roll(target, 8, axis=1),
    "constant mean": np.full_like(target, target.mean()),
}
print(f"\n{'prediction':20s} {'edge_ssim':>10s} {'depth_ssim':>10s} {'l1':>8s} {'total':>8s}")
for name, pred in candidates.items():
    t = depth_loss_terms(pred, target)
    print(f"{name:20s} {t.edge_ssim:10.4f} {t.depth_ssim:10.4f} {t.l1:8.4f} {t.total:8.4f}")

# %% Contact-state loss: BCE on each branch plus on their fused score.
print("\ncs_rgb cs_mm  fused  loss(y=1)")
for rgb, mm in [(0.5, 0.5), (0.9, 0.6), (0.9, 0.1), (0.99, 0.99)]:
    p = ContactPrediction(rgb, mm)
    print(f"{rgb:6.2f} {mm:5.2f} {p.cs_lf:6.3f} {contact_state_loss(rgb, mm, p.fusion_weight, 1):9.4f}")
print(f"at 0.5/0.5 the loss is 3 ln 2 = {3 * math.log(2):.4f}")
