"""Plastic skin-distortion model used to deform rolled fingerprints.

A rigid torsion/traction displacement is blended with the identity through a
gradual transition ring around an ellipse: points inside the ellipse stay
put, points far outside move rigidly, and the ring in between interpolates
with a raised-cosine profile controlled by the skin plasticity coefficient.
"""

from dataclasses import dataclass

import numpy as np

from .core import RandomSource, as_gray


@dataclass(frozen=True)
class DistortionParams:
    k: float                  # skin plasticity coefficient
    theta: float              # rotation angle, degrees
    e: tuple                  # displacement vector (e_x, e_y), pixels
    o_r: tuple                # rotation center (x, y), pixels
    o_e: tuple                # ellipse center (x, y), pixels
    s_x: float                # ellipse semi-axis along x, pixels
    s_y: float                # ellipse semi-axis along y, pixels

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be > 0")
        if self.s_x <= 0 or self.s_y <= 0:
            raise ValueError("ellipse semi-axes must be > 0")


@dataclass(frozen=True)
class DistortionParamRanges:
    """Sampling intervals for the distortion parameters.

    s_x and s_y ranges are expressed as multiples of s = half image width.
    """

    k: tuple = (0.5, 2.0)
    theta: tuple = (0.0, 5.0)
    e: tuple = (-15.0, 15.0)
    s_x_rel: tuple = (0.2, 0.6)
    s_y_factor: tuple = (1.0, 2.0)   # s_y / s_x


def ellipse_distance(p, params: DistortionParams) -> np.ndarray:
    """Signed ellipse distance measure h(p).

    Nonnegative outside the ellipse, zero on the boundary. Inside, where the
    radicand goes negative, the continuous signed extension
    -sqrt(1 - q) is returned so that the transition's h<0 branch applies.
    """
    p = np.asarray(p, dtype=np.float64)
    dx = p[..., 0] - params.o_e[0]
    dy = p[..., 1] - params.o_e[1]
    q = (dx / params.s_x) ** 2 + (dy / params.s_y) ** 2
    out = np.where(q >= 1.0, np.sqrt(np.maximum(q - 1.0, 0.0)),
                   -np.sqrt(np.maximum(1.0 - q, 0.0)))
    return out


def gradual_transition(h, k: float):
    """Raised-cosine blend: 0 for h<=0, 1 for h>=k, smooth in between."""
    if k <= 0:
        raise ValueError("k must be > 0")
    h = np.asarray(h, dtype=np.float64)
    mid = 0.5 * (1.0 - np.cos(np.pi * h / k))
    out = np.where(h <= 0.0, 0.0, np.where(h >= k, 1.0, mid))
    if out.ndim == 0:
        return float(out)
    return out


def rotation_matrix(theta_deg: float) -> np.ndarray:
    t = np.deg2rad(theta_deg)
    return np.array([[np.cos(t), np.sin(t)],
                     [-np.sin(t), np.cos(t)]])


def displacement(p, params: DistortionParams) -> np.ndarray:
    """Rigid torsion/traction displacement Delta(p)."""
    p = np.asarray(p, dtype=np.float64)
    R = rotation_matrix(params.theta)
    o_r = np.asarray(params.o_r, dtype=np.float64)
    e = np.asarray(params.e, dtype=np.float64)
    rel = p - o_r
    rotated = rel @ R.T
    return rotated + o_r + e - p


def _forward_shift(p, params: DistortionParams) -> np.ndarray:
    """Displacement actually applied at p: Delta(p) * g(h(p), k)."""
    d = displacement(p, params)
    g = gradual_transition(ellipse_distance(p, params), params.k)
    return d * np.asarray(g)[..., None]


def _bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray, fill: float) -> np.ndarray:
    h, w = img.shape
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0
    out = np.full(x.shape, fill, dtype=np.float64)
    inside = (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)
    x0c = np.clip(x0, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    v = (img[y0c, x0c] * (1 - fx) * (1 - fy)
         + img[y0c, x1c] * fx * (1 - fy)
         + img[y1c, x0c] * (1 - fx) * fy
         + img[y1c, x1c] * fx * fy)
    out[inside] = v[inside]
    return out


def distort_image(img, params: DistortionParams, iterations: int = 5) -> np.ndarray:
    """Apply the plastic distortion to a gray image.

    Rendered by inverse mapping: for each output pixel q the source point p
    with p + Delta(p)*g(h(p),k) = q is found by fixed-point iteration started
    at p=q, then the source is bilinearly sampled. Points falling outside the
    canvas sample the valley background value 1.0.
    """
    img = as_gray(img)
    h, w = img.shape
    if params.theta == 0.0 and params.e[0] == 0.0 and params.e[1] == 0.0:
        return img.copy()   # zero displacement everywhere; keep bit-exact
    ys, xs = np.mgrid[0:h, 0:w]
    q = np.stack([xs, ys], axis=-1).astype(np.float64)
    p = q.copy()
    for _ in range(iterations):
        p = q - _forward_shift(p, params)
    out = _bilinear_sample(img, p[..., 0], p[..., 1], fill=1.0)
    # bilinear weights sum to 1 only up to roundoff; keep values in range
    return np.clip(out, 0.0, 1.0)


def sample_distortion(ranges: DistortionParamRanges, rng: RandomSource,
                      img_dims) -> DistortionParams:
    """Draw distortion parameters uniformly within the configured ranges.

    Rotation and ellipse centers are both placed at the image center.
    img_dims is (width, height) in pixels.
    """
    width, height = img_dims
    s = width / 2.0
    g = rng.generator
    k = g.uniform(*ranges.k)
    theta = g.uniform(*ranges.theta)
    e = (g.uniform(*ranges.e), g.uniform(*ranges.e))
    s_x = g.uniform(ranges.s_x_rel[0] * s, ranges.s_x_rel[1] * s)
    s_y = s_x * g.uniform(*ranges.s_y_factor)
    center = ((width - 1) / 2.0, (height - 1) / 2.0)
    return DistortionParams(k=k, theta=theta, e=e, o_r=center, o_e=center,
                            s_x=s_x, s_y=s_y)
