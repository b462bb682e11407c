"""Latent-fingerprint synthesization and the training-pair factory.

Clean rolled prints are plastically distorted, speckled, and fused with a
background noise crop; the texture component of the result is the training
input, while the skeleton / orientation / weight-map ground truths come from
the undistorted print. Procedural generators for ridge patterns and noise
backgrounds make the pipeline self-contained at desk scale.
"""

import csv
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import distortion as dist
from . import orientation as ori
from . import skeleton as skel
from . import tvdecomp
from . import weightmap as wm
from .core import RandomSource, as_gray, save_grid, save_gray_image


@dataclass(frozen=True)
class SpeckleParams:
    variance: float

    def __post_init__(self):
        if not 0.0 < self.variance < 0.02:
            raise ValueError("speckle variance must lie in (0, 0.02)")


@dataclass(frozen=True)
class FusionParams:
    lam: float
    background: np.ndarray

    def __post_init__(self):
        if not 0.2 <= self.lam <= 0.8:
            raise ValueError("fusion lambda must lie in [0.2, 0.8]")


@dataclass(frozen=True)
class SynthesisConfig:
    distortion_ranges: dist.DistortionParamRanges = field(default_factory=dist.DistortionParamRanges)
    speckle_variance_range: tuple = (1e-6, 0.02)
    lambda_range: tuple = (0.2, 0.8)
    latents_per_print: int = 10
    tv: tvdecomp.TVConfig = field(default_factory=tvdecomp.TVConfig)
    gabor: skel.GaborConfig = field(default_factory=skel.GaborConfig)
    weight: wm.WeightMapParams = field(default_factory=wm.WeightMapParams)
    fomfe_order: int = 4
    orientation_block: int = 16


@dataclass(frozen=True)
class TrainingPair:
    latent_textures: tuple     # unit-range texture images, one per synthesized latent
    skeleton_gt: np.ndarray
    orientation_gt: np.ndarray  # angle grid in [0, pi)
    weight_map: np.ndarray
    gray_gt: np.ndarray         # rolled texture, for the gray-ground-truth ablation


def add_speckle(img, params: SpeckleParams, rng: RandomSource) -> np.ndarray:
    """b'' = b' * (1 + n), n zero-mean uniform with the configured variance."""
    b = as_gray(img)
    a = np.sqrt(3.0 * params.variance)
    n = rng.generator.uniform(-a, a, size=b.shape)
    return np.clip(b * (1.0 + n), 0.0, 1.0)


def fuse_background(b2, params: FusionParams) -> np.ndarray:
    """Convex combination of the speckled print and a background crop."""
    b2 = as_gray(b2)
    d = as_gray(params.background)
    if b2.shape != d.shape:
        raise ValueError(f"dimension mismatch: {b2.shape} vs {d.shape}")
    return (1.0 - params.lam) * b2 + params.lam * d


def crop_background(background, dims, rng: RandomSource) -> np.ndarray:
    """Random crop of a background image to (height, width) dims; tiles by
    reflection when the source is smaller than the target."""
    bg = as_gray(background)
    th, tw = dims
    if bg.shape[0] < th or bg.shape[1] < tw:
        reps = (int(np.ceil(th / bg.shape[0])) + 1, int(np.ceil(tw / bg.shape[1])) + 1)
        bg = np.tile(bg, reps)
    oy = int(rng.integers(0, bg.shape[0] - th + 1))
    ox = int(rng.integers(0, bg.shape[1] - tw + 1))
    return bg[oy:oy + th, ox:ox + tw]


def synthesize_latent(rolled, cfg: SynthesisConfig, backgrounds, rng: RandomSource) -> np.ndarray:
    """Distort, speckle, and fuse one rolled print into a synthetic latent."""
    if not backgrounds:
        raise ValueError("at least one background crop is required")
    rolled = as_gray(rolled)
    h, w = rolled.shape
    params = dist.sample_distortion(cfg.distortion_ranges, rng, (w, h))
    b1 = dist.distort_image(rolled, params)
    var = float(rng.uniform(*cfg.speckle_variance_range))
    b2 = add_speckle(b1, SpeckleParams(variance=var), rng)
    bg = backgrounds[int(rng.integers(0, len(backgrounds)))]
    crop = crop_background(bg, (h, w), rng)
    lam = float(rng.uniform(*cfg.lambda_range))
    return fuse_background(b2, FusionParams(lam=lam, background=crop))


# ---------------------------------------------------------------------------
# procedural content for tests and desk-scale runs

def procedural_background(dims, rng: RandomSource, n_lines: int = 12) -> np.ndarray:
    """Noise background: smooth low-frequency blotches plus line clutter."""
    h, w = dims
    g = rng.generator
    blotch = ndimage.gaussian_filter(g.normal(0.0, 1.0, (h, w)), sigma=max(h, w) / 16.0)
    blotch = (blotch - blotch.min()) / max(blotch.max() - blotch.min(), 1e-12)
    img = 0.35 + 0.55 * blotch
    ys, xs = np.mgrid[0:h, 0:w]
    for _ in range(n_lines):
        x0, y0 = g.uniform(0, w), g.uniform(0, h)
        ang = g.uniform(0, np.pi)
        width_px = g.uniform(0.7, 2.5)
        shade = g.uniform(0.0, 0.45)
        d = np.abs((xs - x0) * np.sin(ang) - (ys - y0) * np.cos(ang))
        img = np.where(d < width_px, np.minimum(img, shade + 0.1 * d), img)
    return np.clip(img, 0.0, 1.0)


def procedural_print(dims, rng: RandomSource, frequency: float = 1.0 / 9.0,
                     iterations: int = 3) -> np.ndarray:
    """Synthetic rolled fingerprint: white noise repeatedly filtered with
    Gabor kernels tuned to a smooth random orientation field, masked to an
    elliptical foreground. Ridges are dark on a white background.
    """
    h, w = dims
    model = ori.random_fomfe_model(w, h, order=2, rng=rng)
    target = ori.evaluate_fomfe(model)
    pattern = rng.generator.normal(0.0, 1.0, (h, w))
    cfg = skel.GaborConfig(block_size=8, kernel_radius=8, sigma_x=3.0, sigma_y=3.0,
                           frequency_mode="fixed", fixed_frequency=frequency)
    rad = cfg.kernel_radius
    for _ in range(iterations):
        out = np.zeros_like(pattern)
        padded = np.pad(pattern, rad, mode="reflect")
        for by in range(0, h, cfg.block_size):
            for bx in range(0, w, cfg.block_size):
                y1 = min(by + cfg.block_size, h)
                x1 = min(bx + cfg.block_size, w)
                a = target.angle[min(by + cfg.block_size // 2, h - 1),
                                 min(bx + cfg.block_size // 2, w - 1)]
                kern = skel._gabor_kernel(frequency, a, cfg.sigma_x, cfg.sigma_y, rad)
                win = padded[by:y1 + 2 * rad, bx:x1 + 2 * rad]
                filt = ndimage.correlate(win, kern, mode="nearest")
                out[by:y1, bx:x1] = filt[rad:rad + (y1 - by), rad:rad + (x1 - bx)]
        pattern = np.tanh(2.0 * out / max(np.abs(out).max(), 1e-12) * 3.0)
    img = 0.5 - 0.45 * pattern          # ridges (positive phase) dark
    ys, xs = np.mgrid[0:h, 0:w]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ellipse = ((xs - cx) / (0.46 * w)) ** 2 + ((ys - cy) / (0.46 * h)) ** 2
    fade = np.clip((ellipse - 0.85) / 0.3, 0.0, 1.0)
    img = img * (1.0 - fade) + 1.0 * fade
    return np.clip(img, 0.0, 1.0)


# ---------------------------------------------------------------------------
# training pairs and dataset layout

def quality_coherence(rolled, block: int = 16) -> float:
    """Mean orientation coherence over the foreground; quality predicate."""
    mask = skel.foreground_mask(rolled, block=block)
    _, coh = ori.estimate_raw_orientation(rolled, block=block)
    if not mask.any():
        return 0.0
    return float(coh[mask].mean())


def build_training_pair(rolled, backgrounds, rng: RandomSource,
                        cfg: SynthesisConfig = SynthesisConfig()) -> TrainingPair:
    """Produce the full ground-truth bundle plus synthesized latent textures
    for one rolled print.
    """
    rolled = as_gray(rolled)
    mask = skel.foreground_mask(rolled, block=cfg.orientation_block)
    _, rolled_texture = tvdecomp.decompose(rolled, cfg.tv)
    texture_img = tvdecomp.texture_to_unit(rolled_texture)
    field, _ = ori.estimate_raw_orientation(rolled, block=cfg.orientation_block)
    enhanced = skel.enhance_gabor(texture_img, field, cfg.gabor, mask=mask)
    skeleton_gt = skel.skeletonize(enhanced, mask=mask)
    skel_field, _ = ori.estimate_raw_orientation(skeleton_gt.astype(np.float64),
                                                 block=cfg.orientation_block,
                                                 smooth_sigma=2.0)
    model = ori.fit_fomfe(skel_field, order=cfg.fomfe_order, block=cfg.orientation_block)
    orientation_gt = ori.evaluate_fomfe(model).angle
    mins = skel.extract_minutiae(skeleton_gt, fg_mask=mask)
    weight = wm.build_weight_map(skel.minutia_map(mins), cfg.weight)
    latents = []
    for i in range(cfg.latents_per_print):
        latent = synthesize_latent(rolled, cfg, backgrounds, rng)
        _, tex = tvdecomp.decompose(latent, cfg.tv)
        latents.append(tvdecomp.texture_to_unit(tex))
    return TrainingPair(latent_textures=tuple(latents), skeleton_gt=skeleton_gt,
                        orientation_gt=orientation_gt, weight_map=weight,
                        gray_gt=texture_img)


def write_dataset(out_dir, prints, backgrounds, seed: int,
                  cfg: SynthesisConfig = SynthesisConfig(),
                  min_quality: float = 0.5, names=None) -> str:
    """Materialize training pairs under the documented dataset layout.

    Returns the manifest path. Layout: latents/*.png, skeletons/*.png,
    orients/*.fpg, weights/*.fpg, grays/*.png, manifest.tsv.
    """
    sub = {d: os.path.join(out_dir, d)
           for d in ("latents", "skeletons", "orients", "weights", "grays")}
    for d in sub.values():
        os.makedirs(d, exist_ok=True)
    root = RandomSource(seed)
    rows = []
    for idx, rolled in enumerate(prints):
        if quality_coherence(rolled) < min_quality:
            continue
        name = names[idx] if names else f"print{idx:04d}"
        pair = build_training_pair(rolled, backgrounds, root.spawn(idx), cfg)
        skel_rel = f"skeletons/{name}.png"
        orient_rel = f"orients/{name}.fpg"
        weight_rel = f"weights/{name}.fpg"
        gray_rel = f"grays/{name}.png"
        save_gray_image(pair.skeleton_gt.astype(np.float64), os.path.join(out_dir, skel_rel))
        save_grid(pair.orientation_gt, os.path.join(out_dir, orient_rel))
        save_grid(pair.weight_map, os.path.join(out_dir, weight_rel))
        save_gray_image(pair.gray_gt, os.path.join(out_dir, gray_rel))
        for j, latent in enumerate(pair.latent_textures):
            latent_rel = f"latents/{name}_{j:02d}.png"
            save_gray_image(latent, os.path.join(out_dir, latent_rel))
            rows.append((latent_rel, skel_rel, orient_rel, weight_rel, gray_rel))
    manifest = os.path.join(out_dir, "manifest.tsv")
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["latent", "skeleton", "orient", "weight", "gray"])
        writer.writerows(rows)
    return manifest
