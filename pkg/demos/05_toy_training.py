"""Train the enhancement GAN at toy scale and plot the loss curves.

A small procedural dataset (20 prints at 96x96) and a narrow network
(8 base channels, 64-pixel patches) keep this to about a minute of CPU.
We train the full objective and the no-discriminator ablation under the
same seed and compare their weighted-L1 trajectories.
"""

import os
import tempfile

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from latentfp.core import RandomSource
from latentfp.network import DiscriminatorSpec, GeneratorSpec
from latentfp.synthesis import (SynthesisConfig, procedural_background,
                                procedural_print, write_dataset)
from latentfp.training import (LossConfig, PairDataset, TrainConfig,
                               init_state, train)

OUT_DIR = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT_DIR, exist_ok=True)

root = tempfile.mkdtemp(prefix="latentfp_demo_")
rng = RandomSource(100)
prints = [procedural_print((96, 96), rng.spawn(i)) for i in range(20)]
bgs = [procedural_background((128, 128), rng.spawn(1000 + i)) for i in range(3)]
cfg = SynthesisConfig(latents_per_print=1, fomfe_order=2, orientation_block=8)
manifest = write_dataset(root, prints, bgs, seed=100, cfg=cfg, min_quality=0.0)
dataset = PairDataset(manifest)
print(f"dataset: {len(dataset)} pairs under {root}")

gen_spec = GeneratorSpec(patch_size=64, base_channels=8)
disc_spec = DiscriminatorSpec(patch_size=64, channels=(8, 8, 16, 16, 32, 32))

curves = {}
for label, no_disc in (("full objective", False), ("no discriminator", True)):
    tc = TrainConfig(batch_size=4, max_iterations=300, patch_size=64,
                     seed=8, learning_rate=0.01, no_discriminator=no_disc)
    state = init_state(tc, LossConfig(), gen_spec=gen_spec, disc_spec=disc_spec)
    _, rows = train(dataset, tc, state=state)
    curves[label] = [r[3] for r in rows]     # weighted L1 column
    print(f"{label}: weighted L1 {curves[label][0]:.3f} -> "
          f"{np.mean(curves[label][-10:]):.3f}")

fig, ax = plt.subplots(figsize=(7, 4.5))
for label, ys in curves.items():
    ax.plot(ys, label=label, lw=1)
ax.set_xlabel("iteration")
ax.set_ylabel("weighted L1 (batch mean)")
ax.legend()
fig.tight_layout()
out = os.path.join(OUT_DIR, "05_toy_training.png")
fig.savefig(out, dpi=110)
print("wrote", out)
