"""Gradient-based ridge orientation estimation and its global Fourier fit.

Raw orientations come from blockwise structure-tensor averaging of doubled
angles. The global model is a truncated bivariate Fourier series fitted by
least squares to the cos/sin of the doubled angle, which smooths noise and
extrapolates into invalid regions.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .core import OrientationField


@dataclass(frozen=True)
class FomfeModel:
    """Truncated bivariate Fourier model of the doubled-angle fields."""

    order: int
    coeffs_cos: np.ndarray    # (2K+1)^2 coefficients for cos(2*theta)
    coeffs_sin: np.ndarray    # (2K+1)^2 coefficients for sin(2*theta)
    width: int
    height: int


def _basis_1d(coord, extent, order):
    """[1, cos(2*pi*m*t/extent), sin(2*pi*m*t/extent) for m=1..K].

    Full-period harmonics keep the sampled Gram matrix well conditioned, so
    the small ridge damping in the fit does not bias recovered angles.
    """
    t = np.asarray(coord, dtype=np.float64)
    cols = [np.ones_like(t)]
    for m in range(1, order + 1):
        cols.append(np.cos(2.0 * np.pi * m * t / extent))
        cols.append(np.sin(2.0 * np.pi * m * t / extent))
    return np.stack(cols, axis=-1)    # (..., 2K+1)


def _design_matrix(xs, ys, width, height, order):
    bx = _basis_1d(xs, width, order)
    by = _basis_1d(ys, height, order)
    return (bx[:, :, None] * by[:, None, :]).reshape(len(xs), -1)


def estimate_raw_orientation(img, block: int = 16, coherence_floor: float = 0.1,
                             smooth_sigma: float = 1.0):
    """Blockwise structure-tensor orientation of a gray image or skeleton.

    Returns an (OrientationField, coherence map) pair, both at full image
    resolution with blockwise-constant values. Angles are ridge directions
    (perpendicular to the dominant gradient) in [0, pi).
    """
    f = np.asarray(img, dtype=np.float64)
    if smooth_sigma > 0:
        f = ndimage.gaussian_filter(f, smooth_sigma)
    gx = ndimage.sobel(f, axis=1)
    gy = ndimage.sobel(f, axis=0)
    gxx, gyy, gxy = gx * gx, gy * gy, gx * gy
    h, w = f.shape
    angle = np.zeros((h, w))
    coh = np.zeros((h, w))
    mask = np.zeros((h, w), dtype=bool)
    for by in range(0, h, block):
        for bx in range(0, w, block):
            sl = np.s_[by:by + block, bx:bx + block]
            sxx = gxx[sl].sum()
            syy = gyy[sl].sum()
            sxy = gxy[sl].sum()
            energy = sxx + syy
            if energy <= 1e-12:
                continue
            c = np.hypot(sxx - syy, 2.0 * sxy) / energy
            # doubled-angle mean gives the gradient direction; ridges run
            # perpendicular to it
            grad_angle = 0.5 * np.arctan2(2.0 * sxy, sxx - syy)
            ridge = np.mod(grad_angle + np.pi / 2.0, np.pi)
            angle[sl] = ridge
            coh[sl] = c
            mask[sl] = c >= coherence_floor
    return OrientationField(angle=angle, mask=mask), coh


def _block_centers(field: OrientationField, block: int):
    h, w = field.shape
    xs, ys, c2, s2 = [], [], [], []
    for by in range(0, h, block):
        for bx in range(0, w, block):
            sl = np.s_[by:by + block, bx:bx + block]
            sub = field.mask[sl]
            if not sub.any():
                continue
            a = field.angle[sl]
            # average the doubled-angle components (circular mean) and sample
            # at the centroid of the valid pixels
            c2.append(np.cos(2.0 * a)[sub].mean())
            s2.append(np.sin(2.0 * a)[sub].mean())
            yy, xx = np.nonzero(sub)
            xs.append(bx + xx.mean())
            ys.append(by + yy.mean())
    return np.array(xs), np.array(ys), np.array(c2), np.array(s2)


def fit_fomfe(field: OrientationField, order: int = 4, block: int = 16) -> FomfeModel:
    """Least-squares Fourier fit of the doubled-angle orientation fields."""
    h, w = field.shape
    xs, ys, c2, s2 = _block_centers(field, block)
    n_basis = (2 * order + 1) ** 2
    if len(xs) < n_basis:
        raise ValueError(
            f"insufficient valid blocks for order {order}: need {n_basis}, have {len(xs)}")
    A = _design_matrix(xs, ys, w, h, order)
    ata = A.T @ A + 1e-8 * np.eye(n_basis)
    coeffs_cos = np.linalg.solve(ata, A.T @ c2)
    coeffs_sin = np.linalg.solve(ata, A.T @ s2)
    return FomfeModel(order=order, coeffs_cos=coeffs_cos, coeffs_sin=coeffs_sin,
                      width=w, height=h)


def evaluate_fomfe(model: FomfeModel, dims=None) -> OrientationField:
    """Dense per-pixel evaluation of the fitted model; valid everywhere."""
    if dims is None:
        w, h = model.width, model.height
    else:
        w, h = dims
    ys, xs = np.mgrid[0:h, 0:w]
    A = _design_matrix(xs.ravel(), ys.ravel(), model.width, model.height, model.order)
    c2 = (A @ model.coeffs_cos).reshape(h, w)
    s2 = (A @ model.coeffs_sin).reshape(h, w)
    angle = np.mod(0.5 * np.arctan2(s2, c2), np.pi)
    angle[angle >= np.pi] = 0.0
    return OrientationField(angle=angle, mask=np.ones((h, w), dtype=bool))


def fomfe_predict(model: FomfeModel, xs, ys):
    """Model angles at arbitrary (x, y) coordinates."""
    A = _design_matrix(np.atleast_1d(xs), np.atleast_1d(ys),
                       model.width, model.height, model.order)
    c2 = A @ model.coeffs_cos
    s2 = A @ model.coeffs_sin
    return np.mod(0.5 * np.arctan2(s2, c2), np.pi)


def random_fomfe_model(width, height, order, rng) -> FomfeModel:
    """Random smooth model for synthetic fields and self-consistency tests."""
    n = (2 * order + 1) ** 2
    g = rng.generator
    # decay high-frequency coefficients so the doubled-angle fields are smooth
    idx = np.arange(n)
    ix = idx // (2 * order + 1)
    iy = idx % (2 * order + 1)
    decay = 1.0 / (1.0 + ((ix + 1) // 2) + ((iy + 1) // 2)) ** 2
    coeffs_cos = g.normal(0.0, 1.0, n) * decay
    coeffs_sin = g.normal(0.0, 1.0, n) * decay
    return FomfeModel(order=order, coeffs_cos=coeffs_cos, coeffs_sin=coeffs_sin,
                      width=width, height=height)


def random_wave_field(width, height, order, rng) -> OrientationField:
    """Orientation field whose doubled-angle components are exactly
    band-limited at the given order: 2*theta is a single plane wave over the
    separable Fourier basis, so a least-squares refit is exact.
    """
    g = rng.generator
    m = int(g.integers(-order, order + 1))
    n = int(g.integers(-order, order + 1))
    phi0 = g.uniform(0.0, 2.0 * np.pi)
    ys, xs = np.mgrid[0:height, 0:width]
    doubled = 2.0 * np.pi * (m * xs / width + n * ys / height) + phi0
    angle = np.mod(0.5 * np.arctan2(np.sin(doubled), np.cos(doubled)), np.pi)
    angle[angle >= np.pi] = 0.0
    return OrientationField(angle=angle, mask=np.ones((height, width), dtype=bool))


def encode_orientation_channel(field: OrientationField) -> np.ndarray:
    """Bounded scalar encoding angle/pi in [0,1) for the discriminator input."""
    return field.angle / np.pi


def angular_difference(a, b):
    """Smallest difference between orientations defined modulo pi."""
    d = np.mod(a - b, np.pi)
    return np.minimum(d, np.pi - d)
