"""Loss functions and the adversarial training loop.

The discriminator sees (skeleton channel, orientation channel) pairs; the
generator minimizes the non-saturating adversarial term plus eta times the
minutia-weighted L1 reconstruction loss (per-pixel sum within a patch,
averaged over the batch).
"""

import csv
import os
from dataclasses import dataclass

import numpy as np
import torch

from .core import RandomSource, load_grid, load_gray_image
from .network import (Discriminator, DiscriminatorSpec, Generator, GeneratorSpec,
                      save_checkpoint)

SCORE_EPS = 1e-7


@dataclass(frozen=True)
class LossConfig:
    eta: float = 0.001
    saturating: bool = False      # literal minimax generator term if True

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    batch_size: int = 16
    max_iterations: int = 50_000
    patch_size: int = 192
    checkpoint_every: int = 1000
    seed: int = 0
    no_discriminator: bool = False
    gray_gt: bool = False
    no_weight: bool = False

    def __post_init__(self):
        if min(self.learning_rate, self.batch_size, self.max_iterations,
               self.patch_size, self.checkpoint_every) <= 0:
            raise ValueError("TrainConfig values must be positive")


def reconstruction_loss(gen_out, g, w):
    """Batch mean of the per-pixel sum of w * |g - gen_out|."""
    if gen_out.shape != g.shape or g.shape != w.shape:
        raise ValueError("reconstruction loss dimension mismatch")
    per_sample = (w * (g - gen_out).abs()).flatten(1).sum(dim=1)
    return per_sample.mean()


def adversarial_losses(d_real, d_fake, saturating: bool = False):
    """(discriminator loss, generator loss) from classification scores."""
    r = torch.clamp(d_real, SCORE_EPS, 1.0 - SCORE_EPS)
    f = torch.clamp(d_fake, SCORE_EPS, 1.0 - SCORE_EPS)
    d_loss = -(torch.log(r) + torch.log(1.0 - f)).mean()
    if saturating:
        g_loss = torch.log(1.0 - f).mean()
    else:
        g_loss = -torch.log(f).mean()
    return d_loss, g_loss


def total_generator_loss(g_adv, l_r, cfg: LossConfig):
    return g_adv + cfg.eta * l_r


class PairDataset:
    """Training pairs materialized by the synthesis stage, read lazily from a
    manifest directory and cached in memory.
    """

    def __init__(self, manifest_path, gray_gt: bool = False, no_weight: bool = False):
        self.root = os.path.dirname(os.path.abspath(manifest_path))
        self.gray_gt = gray_gt
        self.no_weight = no_weight
        with open(manifest_path, "r", encoding="utf-8") as fh:
            reader = csv.DictReader(fh, delimiter="\t")
            self.rows = list(reader)
        if not self.rows:
            raise ValueError(f"empty dataset manifest: {manifest_path}")
        self._cache = {}

    def __len__(self):
        return len(self.rows)

    def _load(self, rel):
        if rel not in self._cache:
            path = os.path.join(self.root, rel)
            self._cache[rel] = load_grid(path) if rel.endswith(".fpg") else load_gray_image(path)
        return self._cache[rel]

    def sample_patch(self, index: int, patch: int, rng: RandomSource):
        """Aligned random crop of (latent, gt, orientation/pi, weight)."""
        row = self.rows[index]
        latent = self._load(row["latent"])
        gt = self._load(row["gray"] if self.gray_gt else row["skeleton"])
        orient = self._load(row["orient"]) / np.pi
        weight = np.ones_like(latent) if self.no_weight else self._load(row["weight"])
        h, w = latent.shape
        if h < patch or w < patch:
            raise ValueError(f"image {latent.shape} smaller than patch {patch}")
        oy = int(rng.integers(0, h - patch + 1))
        ox = int(rng.integers(0, w - patch + 1))
        sl = np.s_[oy:oy + patch, ox:ox + patch]
        return latent[sl], gt[sl], orient[sl], weight[sl]

    def sample_batch(self, batch: int, patch: int, rng: RandomSource):
        idx = rng.integers(0, len(self.rows), size=batch)
        tensors = [[], [], [], []]
        for i in idx:
            for buf, arr in zip(tensors, self.sample_patch(int(i), patch, rng)):
                buf.append(arr)
        l, g, gf, w = (torch.from_numpy(np.stack(b).astype(np.float32))[:, None]
                       for b in tensors)
        return l, g, gf, w


@dataclass
class TrainState:
    generator: Generator
    discriminator: Discriminator
    opt_g: torch.optim.Optimizer
    opt_d: torch.optim.Optimizer
    loss_cfg: LossConfig
    train_cfg: TrainConfig
    iteration: int = 0


def init_state(train_cfg: TrainConfig, loss_cfg: LossConfig = LossConfig(),
               gen_spec: GeneratorSpec = None, disc_spec: DiscriminatorSpec = None) -> TrainState:
    torch.manual_seed(train_cfg.seed)
    gen_spec = gen_spec or GeneratorSpec(patch_size=train_cfg.patch_size)
    disc_spec = disc_spec or DiscriminatorSpec(patch_size=train_cfg.patch_size)
    gen = Generator(gen_spec)
    disc = Discriminator(disc_spec)
    opt_g = torch.optim.Adam(gen.parameters(), lr=train_cfg.learning_rate, betas=(0.9, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=train_cfg.learning_rate, betas=(0.9, 0.999))
    return TrainState(generator=gen, discriminator=disc, opt_g=opt_g, opt_d=opt_d,
                      loss_cfg=loss_cfg, train_cfg=train_cfg)


def train_step(state: TrainState, batch):
    """One discriminator update followed by one generator update.

    Returns a metrics dict with d_loss, g_adv, l_r, d_acc_real, d_acc_fake.
    """
    l, g, gf, w = batch
    gen, disc = state.generator, state.discriminator
    gen.train()
    no_disc = state.train_cfg.no_discriminator
    metrics = {}
    if not no_disc:
        disc.train()
        with torch.no_grad():
            fake = gen(l)
        d_real = disc(torch.cat([g, gf], dim=1))
        d_fake = disc(torch.cat([fake, gf], dim=1))
        d_loss, _ = adversarial_losses(d_real, d_fake, state.loss_cfg.saturating)
        state.opt_d.zero_grad(set_to_none=True)
        d_loss.backward()
        state.opt_d.step()
        metrics["d_loss"] = float(d_loss.item())
        metrics["d_acc_real"] = float((d_real > 0.5).float().mean().item())
        metrics["d_acc_fake"] = float((d_fake < 0.5).float().mean().item())
    else:
        metrics["d_loss"] = float("nan")
        metrics["d_acc_real"] = float("nan")
        metrics["d_acc_fake"] = float("nan")

    out = gen(l)
    l_r = reconstruction_loss(out, g, w)
    if no_disc:
        g_total = l_r
        metrics["g_adv"] = float("nan")
    else:
        d_fake2 = disc(torch.cat([out, gf], dim=1))
        _, g_adv = adversarial_losses(torch.ones_like(d_fake2) * 0.5, d_fake2,
                                      state.loss_cfg.saturating)
        g_total = total_generator_loss(g_adv, l_r, state.loss_cfg)
        metrics["g_adv"] = float(g_adv.item())
    if not torch.isfinite(g_total):
        raise RuntimeError(f"non-finite generator loss at iteration {state.iteration}")
    state.opt_g.zero_grad(set_to_none=True)
    g_total.backward()
    state.opt_g.step()
    metrics["l_r"] = float(l_r.item())
    state.iteration += 1
    return metrics


def evaluate_recon(state: TrainState, dataset: PairDataset, patch: int,
                   rng: RandomSource, n_batches: int = 4, batch_size: int = 4) -> float:
    """Held-out weighted L1 of the generator in evaluation mode."""
    state.generator.eval()
    vals = []
    with torch.no_grad():
        for _ in range(n_batches):
            l, g, _, w = dataset.sample_batch(batch_size, patch, rng)
            vals.append(float(reconstruction_loss(state.generator(l), g, w).item()))
    return float(np.mean(vals))


def train(dataset: PairDataset, train_cfg: TrainConfig,
          loss_cfg: LossConfig = LossConfig(), out_dir=None, state: TrainState = None,
          log_callback=None):
    """Run the training loop; emits metrics.tsv and periodic checkpoints
    under out_dir when given. Returns the final state and metrics rows.
    """
    if state is None:
        state = init_state(train_cfg, loss_cfg)
    rng = RandomSource(train_cfg.seed).spawn(915)
    rows = []
    log_fh = None
    writer = None
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        header = not os.path.exists(os.path.join(out_dir, "metrics.tsv"))
        log_fh = open(os.path.join(out_dir, "metrics.tsv"), "a", encoding="utf-8", newline="")
        writer = csv.writer(log_fh, delimiter="\t", lineterminator="\n")
        if header:
            mode = ("no-discriminator" if train_cfg.no_discriminator else
                    "no-weight" if train_cfg.no_weight else
                    "gray-gt" if train_cfg.gray_gt else "full")
            writer.writerow([f"# ablation={mode}"])
            writer.writerow(["iter", "d_loss", "g_adv", "l_r", "d_acc_real", "d_acc_fake"])
    try:
        while state.iteration < train_cfg.max_iterations:
            batch = dataset.sample_batch(train_cfg.batch_size, train_cfg.patch_size, rng)
            m = train_step(state, batch)
            row = [state.iteration, m["d_loss"], m["g_adv"], m["l_r"],
                   m["d_acc_real"], m["d_acc_fake"]]
            rows.append(row)
            if writer is not None:
                writer.writerow(row)
            if log_callback is not None:
                log_callback(state.iteration, m)
            if out_dir is not None and (state.iteration % train_cfg.checkpoint_every == 0
                                        or state.iteration == train_cfg.max_iterations):
                save_checkpoint(os.path.join(out_dir, "checkpoint.pt"),
                                state.generator, state.discriminator,
                                state.opt_g, state.opt_d, state.iteration)
    finally:
        if log_fh is not None:
            log_fh.close()
    return state, rows
