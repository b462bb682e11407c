"""Gaussian minutia weight map applied to the reconstruction loss.

Each minutia spreads a normalized Gaussian bump over a (2r+1)x(2r+1)
window; pixels outside every window receive the strictly positive floor
w0 = w_g(r, r) / sum(w_g), so no pixel is ever ignored by the loss.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


@dataclass(frozen=True)
class WeightMapParams:
    sigma: float = 8.0
    r: int = 17

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.r < 1:
            raise ValueError("r must be >= 1")


def gaussian_kernel(params: WeightMapParams) -> np.ndarray:
    """Unnormalized Gaussian window on u, v in [-r, r]."""
    r, sigma = params.r, params.sigma
    u = np.arange(-r, r + 1, dtype=np.float64)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    return np.exp(-(uu * uu + vv * vv) / (2.0 * sigma * sigma)) / (2.0 * np.pi * sigma * sigma)


def floor_weight(params: WeightMapParams) -> float:
    """w0: the corner kernel value normalized by the kernel sum."""
    k = gaussian_kernel(params)
    return float(k[-1, -1] / k.sum())


def build_weight_map(minutia_map, params: WeightMapParams = WeightMapParams()) -> np.ndarray:
    """Normalized correlation of the Gaussian window with the minutia map,
    with the w0 floor substituted wherever no minutia influence reaches.

    The minutia map is zero-padded outside the image, so the normalizing
    denominator is the full kernel sum everywhere.
    """
    m = np.asarray(minutia_map, dtype=np.float64)
    kernel = gaussian_kernel(params)
    w_prime = ndimage.correlate(m, kernel, mode="constant", cval=0.0) / kernel.sum()
    return np.where(w_prime != 0.0, w_prime, floor_weight(params))


def build_weight_map_naive(minutia_map, params: WeightMapParams = WeightMapParams()) -> np.ndarray:
    """Literal double-loop evaluation; test oracle for build_weight_map."""
    m = np.asarray(minutia_map, dtype=np.float64)
    h, w = m.shape
    kernel = gaussian_kernel(params)
    ksum = kernel.sum()
    r = params.r
    w0 = kernel[-1, -1] / ksum
    padded = np.zeros((h + 2 * r, w + 2 * r))
    padded[r:r + h, r:r + w] = m    # zero padding outside the image
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            window = padded[y:y + 2 * r + 1, x:x + 2 * r + 1]
            wp = float(np.sum(kernel * window)) / ksum
            out[y, x] = wp if wp != 0.0 else w0
    return out
