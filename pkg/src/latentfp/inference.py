"""Full-image enhancement by sliding-window application of the generator."""

from dataclasses import dataclass

import numpy as np
import torch

from .core import as_gray


@dataclass(frozen=True)
class InferenceConfig:
    window: int = 192
    step: int = 8
    aggregation: str = "mean"        # or "gaussian"
    pad_mode: str = "reflect"
    batch_size: int = 8

    def __post_init__(self):
        if self.step > self.window:
            raise ValueError("step must be <= window")
        if self.aggregation not in ("mean", "gaussian"):
            raise ValueError("aggregation must be 'mean' or 'gaussian'")


def padded_extent(extent: int, window: int, step: int) -> int:
    """Smallest extent >= max(extent, window) that the windows tile exactly."""
    if extent <= window:
        return window
    return extent + (-(extent - window)) % step


def window_origins(extent: int, window: int, step: int):
    """Window start offsets tiling [0, extent); assumes a padded extent."""
    if extent <= window:
        return [0]
    return list(range(0, extent - window + 1, step))


def _patch_weights(window: int, aggregation: str) -> np.ndarray:
    if aggregation == "mean":
        return np.ones((window, window))
    half = (window - 1) / 2.0
    ys, xs = np.mgrid[0:window, 0:window]
    sigma = window / 4.0
    return np.exp(-(((xs - half) ** 2 + (ys - half) ** 2) / (2.0 * sigma * sigma)))


def enhance_full_image(latent_texture, predict, cfg: InferenceConfig = InferenceConfig()) -> np.ndarray:
    """Aggregate overlapping generator predictions into one enhanced image.

    `predict` maps a (N, window, window) float array in [0,1] to predictions
    of the same shape; use `torch_predictor` to wrap a trained generator.
    Inputs smaller than the window are padded (reflect) and cropped back.
    """
    img = as_gray(latent_texture)
    h, w = img.shape
    ph = padded_extent(h, cfg.window, cfg.step) - h
    pw = padded_extent(w, cfg.window, cfg.step) - w
    padded = np.pad(img, ((0, ph), (0, pw)), mode=cfg.pad_mode) if (ph or pw) else img
    hp, wp = padded.shape
    oys = window_origins(hp, cfg.window, cfg.step)
    oxs = window_origins(wp, cfg.window, cfg.step)
    weights = _patch_weights(cfg.window, cfg.aggregation)
    acc = np.zeros((hp, wp))
    cov = np.zeros((hp, wp))
    coords = [(oy, ox) for oy in oys for ox in oxs]
    for start in range(0, len(coords), cfg.batch_size):
        chunk = coords[start:start + cfg.batch_size]
        patches = np.stack([padded[oy:oy + cfg.window, ox:ox + cfg.window]
                            for oy, ox in chunk])
        preds = predict(patches)
        for (oy, ox), pred in zip(chunk, preds):
            acc[oy:oy + cfg.window, ox:ox + cfg.window] += weights * pred
            cov[oy:oy + cfg.window, ox:ox + cfg.window] += weights
    assert cov.min() > 0, "coverage hole in sliding-window tiling"
    out = acc / cov
    return np.clip(out[:h, :w], 0.0, 1.0)


def torch_predictor(generator):
    """Wrap a generator module as a batched numpy patch predictor."""
    def predict(patches: np.ndarray) -> np.ndarray:
        generator.eval()
        with torch.no_grad():
            x = torch.from_numpy(patches.astype(np.float32))[:, None]
            y = generator(x)
        return y[:, 0].numpy().astype(np.float64)
    return predict


def binarize(enhanced, threshold: float = 0.5) -> np.ndarray:
    """Threshold an aggregated enhancement map into a ridge=1 skeleton-style
    binary map."""
    return (np.asarray(enhanced) > threshold).astype(np.uint8)
