"""Ground-truth production: skeleton, minutiae, and the loss weight map.

From a clean print we estimate the orientation field, enhance with
oriented Gabor filters, binarize, thin to a one-pixel skeleton, extract
minutiae by the crossing-number rule, and finally build the Gaussian
weight map that concentrates the reconstruction loss around minutiae.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from latentfp.core import BIFURCATION, RandomSource
from latentfp.orientation import estimate_raw_orientation
from latentfp.skeleton import (enhance_gabor, extract_minutiae,
                               foreground_mask, minutia_map, skeletonize)
from latentfp.synthesis import procedural_print
from latentfp.weightmap import WeightMapParams, build_weight_map, floor_weight

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

rng = RandomSource(5)
rolled = procedural_print((192, 192), rng)

mask = foreground_mask(rolled)
orient, coherence = estimate_raw_orientation(rolled)
enhanced = enhance_gabor(rolled, orient)
skel = skeletonize(enhanced, mask=mask)
mins = extract_minutiae(skel, fg_mask=mask)

endings = sum(1 for m in mins if m.kind != BIFURCATION)
print(f"minutiae: {len(mins)} total, {endings} endings, "
      f"{len(mins) - endings} bifurcations")

params = WeightMapParams()   # sigma = 8, kernel radius r = 17
weights = build_weight_map(minutia_map(mins, dims=skel.shape), params)
print(f"weight map: max {weights.max():.4f}, "
      f"floor {floor_weight(params):.2e} (value far from any minutia)")

fig, axes = plt.subplots(1, 4, figsize=(16, 4))
axes[0].imshow(rolled, cmap="gray")
axes[0].set_title("clean print")
axes[1].imshow(enhanced, cmap="gray")
axes[1].set_title("Gabor enhanced")
axes[2].imshow(1.0 - skel, cmap="gray")
axes[2].set_title("skeleton + minutiae")
for m in mins:
    color = "red" if m.kind == BIFURCATION else "blue"
    axes[2].plot(m.x, m.y, "o", mfc="none", mec=color, ms=6)
im = axes[3].imshow(np.log10(weights), cmap="magma")
axes[3].set_title("log10 weight map")
fig.colorbar(im, ax=axes[3], fraction=0.046)
for ax in axes:
    ax.set_xticks([])
    ax.set_yticks([])
fig.tight_layout()
out = os.path.join(OUT_DIR, "03_skeleton_minutiae_weights.png")
fig.savefig(out, dpi=110)
print("wrote", out)
