"""Demonstrate the plastic distortion model on a procedural fingerprint.

The model divides the finger contact region into a rigid inner ellipse,
an outer region that translates/rotates fully, and a transition band
where the displacement is blended by a smooth polynomial.  We render a
clean procedural print, apply a sampled distortion, and plot the
displacement magnitude so the three regions are visible.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from latentfp.core import RandomSource
from latentfp.distortion import (DistortionParamRanges, DistortionParams,
                                 displacement, distort_image,
                                 ellipse_distance, gradual_transition,
                                 sample_distortion)
from latentfp.synthesis import procedural_print

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

rng = RandomSource(7)
rolled = procedural_print((192, 192), rng)

# A hand-picked distortion: modest rotation plus a small translation.
# The rigid inner ellipse has semi-axes (55, 75); the transition extends
# to ellipse distance k = 1.2 beyond its boundary.
center = (95.5, 95.5)
params = DistortionParams(k=1.2, theta=8.0, e=(6.0, -4.0),
                          o_r=center, o_e=center, s_x=55.0, s_y=75.0)
warped = distort_image(rolled, params)

# Applied displacement magnitude over a coordinate grid: zero inside the
# ellipse, full torsion/traction outside the band, blended in between.
ys, xs = np.mgrid[0:192, 0:192]
pts = np.stack([xs, ys], axis=-1).astype(float)
disp = displacement(pts, params)
blend = gradual_transition(ellipse_distance(pts, params), params.k)
mag = np.hypot(disp[..., 0], disp[..., 1]) * blend

# The transition polynomial itself.
h = np.linspace(0.0, params.k, 200)
g = gradual_transition(h, params.k)

fig, axes = plt.subplots(1, 4, figsize=(16, 4))
axes[0].imshow(rolled, cmap="gray")
axes[0].set_title("clean print")
axes[1].imshow(warped, cmap="gray")
axes[1].set_title("distorted")
im = axes[2].imshow(mag, cmap="viridis")
axes[2].set_title("|displacement| (px)")
fig.colorbar(im, ax=axes[2], fraction=0.046)
axes[3].plot(h, g)
axes[3].set_title("transition g(h)")
axes[3].set_xlabel("ellipse distance h")
for ax in axes[:3]:
    ax.set_xticks([])
    ax.set_yticks([])
fig.tight_layout()
out = os.path.join(OUT_DIR, "01_plastic_distortion.png")
fig.savefig(out, dpi=110)
print("wrote", out)

# Random distortions used during dataset synthesis.
ranges = DistortionParamRanges()
for i in range(3):
    p = sample_distortion(ranges, rng.spawn(i), (192, 192))
    print(f"sampled params {i}: k={p.k:.1f} theta={p.theta:.1f} "
          f"e=({p.e[0]:.1f},{p.e[1]:.1f}) axes=({p.s_x:.1f},{p.s_y:.1f})")
