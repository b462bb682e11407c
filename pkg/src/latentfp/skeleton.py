"""Ground-truth production: contextual Gabor enhancement, binarization and
thinning to one-pixel skeletons, and crossing-number minutia extraction.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage.filters import threshold_otsu
from skimage.morphology import skeletonize as _sk_skeletonize

from .core import BIFURCATION, ENDING, Minutia, MinutiaSet, OrientationField, as_skeleton


@dataclass(frozen=True)
class GaborConfig:
    block_size: int = 16
    kernel_radius: int = 8
    sigma_x: float = 4.0
    sigma_y: float = 4.0
    frequency_mode: str = "estimated"      # or "fixed"
    fixed_frequency: float = 1.0 / 9.0     # cycles/pixel, typical 500 ppi ridges

    def __post_init__(self):
        if self.block_size < 8:
            raise ValueError("block_size must be >= 8")
        if not 0.0 < self.fixed_frequency < 0.5:
            raise ValueError("fixed_frequency must lie in (0, 0.5)")
        if self.frequency_mode not in ("estimated", "fixed"):
            raise ValueError("frequency_mode must be 'estimated' or 'fixed'")


def foreground_mask(img, block: int = 16, var_threshold: float = 2e-3) -> np.ndarray:
    """Blockwise intensity-variance segmentation; 1 = fingerprint area."""
    f = np.asarray(img, dtype=np.float64)
    h, w = f.shape
    mask = np.zeros((h, w), dtype=bool)
    for by in range(0, h, block):
        for bx in range(0, w, block):
            sl = np.s_[by:by + block, bx:bx + block]
            if f[sl].var() > var_threshold:
                mask[sl] = True
    mask = ndimage.binary_closing(mask, structure=np.ones((3, 3)), iterations=2)
    return mask


def _gabor_kernel(freq, angle, sigma_x, sigma_y, radius):
    """Even (cosine) Gabor kernel tuned to ridge direction `angle`.

    The wave vector points along the ridge normal; sigma_x is along the
    normal, sigma_y along the ridge.
    """
    half = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(half, half)           # xx: columns, yy: rows
    # ridge normal direction
    nx, ny = np.cos(angle + np.pi / 2.0), np.sin(angle + np.pi / 2.0)
    tx, ty = np.cos(angle), np.sin(angle)
    u = xx * nx + yy * ny
    v = xx * tx + yy * ty
    env = np.exp(-0.5 * ((u / sigma_x) ** 2 + (v / sigma_y) ** 2))
    kern = env * np.cos(2.0 * np.pi * freq * u)
    kern -= kern.mean()                        # remove DC response
    return kern


def estimate_block_frequency(block_img, angle, fallback):
    """Ridge frequency from the x-signature: gray values projected along the
    ridge direction, period read off the mean peak spacing.
    """
    f = np.asarray(block_img, dtype=np.float64)
    h, w = f.shape
    size = max(h, w)
    nx, ny = np.cos(angle + np.pi / 2.0), np.sin(angle + np.pi / 2.0)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    ts = np.arange(-size // 2, size // 2 + 1, dtype=np.float64)
    xs = np.clip(np.rint(cx + ts * nx).astype(int), 0, w - 1)
    ys = np.clip(np.rint(cy + ts * ny).astype(int), 0, h - 1)
    sig = f[ys, xs]
    sig = sig - sig.mean()
    # peaks of the inverted signature = ridge centers (ridges are dark)
    minima = [i for i in range(1, len(sig) - 1) if sig[i] < sig[i - 1] and sig[i] <= sig[i + 1]]
    if len(minima) < 2:
        return fallback
    period = np.mean(np.diff(minima))
    if period <= 2.0 or period > 30.0:
        return fallback
    return 1.0 / period


def enhance_gabor(img, orient: OrientationField, cfg: GaborConfig = GaborConfig(),
                  mask=None) -> np.ndarray:
    """Blockwise contextual Gabor filtering tuned to the local orientation.

    Background (invalid orientation or outside `mask`) is set to the valley
    value 1.0. The filter response is affinely mapped back to [0,1] with
    ridges dark.
    """
    f = np.asarray(img, dtype=np.float64)
    h, w = f.shape
    block = cfg.block_size
    rad = cfg.kernel_radius
    response = np.zeros((h, w))
    valid = np.zeros((h, w), dtype=bool)
    padded = np.pad(f, rad, mode="reflect")
    for by in range(0, h, block):
        for bx in range(0, w, block):
            sl = np.s_[by:by + block, bx:bx + block]
            msub = orient.mask[sl]
            if mask is not None:
                msub = msub & mask[sl]
            if not msub.any():
                continue
            a = np.cos(2 * orient.angle[sl])[msub].mean()
            b = np.sin(2 * orient.angle[sl])[msub].mean()
            angle = 0.5 * np.arctan2(b, a)
            if cfg.frequency_mode == "fixed":
                freq = cfg.fixed_frequency
            else:
                freq = estimate_block_frequency(f[sl], angle, cfg.fixed_frequency)
            kern = _gabor_kernel(freq, angle, cfg.sigma_x, cfg.sigma_y, rad)
            y1 = min(by + block, h)
            x1 = min(bx + block, w)
            win = padded[by:y1 + 2 * rad, bx:x1 + 2 * rad]
            filt = ndimage.correlate(win, kern, mode="nearest")[rad:rad + (y1 - by),
                                                               rad:rad + (x1 - bx)]
            response[sl] = filt
            valid[sl] = msub
    out = np.ones((h, w))
    if valid.any():
        lo, hi = response[valid].min(), response[valid].max()
        scale = hi - lo if hi > lo else 1.0
        # dark input ridges give strongly negative responses; keep them dark
        out[valid] = (response[valid] - lo) / scale
    return out


def skeletonize(enh, mask=None, block: int = 32) -> np.ndarray:
    """Blockwise-Otsu binarization followed by thinning to a 1-px skeleton.

    Ridges are assumed dark in the input; the returned map has ridge = 1.
    """
    f = np.asarray(enh, dtype=np.float64)
    h, w = f.shape
    binary = np.zeros((h, w), dtype=bool)
    for by in range(0, h, block):
        for bx in range(0, w, block):
            sl = np.s_[by:by + block, bx:bx + block]
            sub = f[sl]
            if sub.max() - sub.min() < 0.05:
                # flat block: uniformly ridge only if clearly dark
                binary[sl] = sub < 0.2
                continue
            t = threshold_otsu(sub)
            binary[sl] = sub < t
    if mask is not None:
        binary &= mask
    thin = _sk_skeletonize(binary, method="zhang")
    return as_skeleton(thin.astype(np.uint8))


_NEIGHBOR_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, 1),
                     (1, 1), (1, 0), (1, -1), (0, -1)]


def crossing_number(skel) -> np.ndarray:
    """CN value at every pixel: half the number of 0-1 transitions around the
    8-neighborhood, walked in order.
    """
    s = np.asarray(skel, dtype=np.int32)
    p = np.pad(s, 1)
    rings = [p[1 + dy:1 + dy + s.shape[0], 1 + dx:1 + dx + s.shape[1]]
             for dy, dx in _NEIGHBOR_OFFSETS]
    cn = np.zeros(s.shape, dtype=np.int32)
    for i in range(8):
        cn += np.abs(rings[i] - rings[(i + 1) % 8])
    return cn // 2


def _neighbors(skel, y, x):
    h, w = skel.shape
    out = []
    for dy, dx in _NEIGHBOR_OFFSETS:
        yy, xx = y + dy, x + dx
        if 0 <= yy < h and 0 <= xx < w and skel[yy, xx]:
            out.append((yy, xx))
    return out


def prune_spurs(skel, min_length: int = 8) -> np.ndarray:
    """Remove skeleton branches shorter than min_length that end in a tip."""
    s = np.asarray(skel, dtype=np.uint8).copy()
    changed = True
    while changed:
        changed = False
        cn = crossing_number(s)
        tips = np.argwhere((s == 1) & (cn == 1))
        for y, x in tips:
            path = [(y, x)]
            prev = None
            cur = (y, x)
            while len(path) <= min_length:
                nbrs = [n for n in _neighbors(s, *cur) if n != prev]
                if not nbrs:
                    break
                if len(nbrs) > 1 or cn[nbrs[0]] >= 3:
                    # short branch hanging off a junction: delete it
                    for yy, xx in path:
                        s[yy, xx] = 0
                    changed = True
                    break
                prev, cur = cur, nbrs[0]
                path.append(cur)
            if changed:
                # crossing numbers are stale once the skeleton changed;
                # restart the pass
                break
    return s


def _trace_direction(skel, y, x, steps: int = 5):
    """Unit direction from (x, y) along the attached ridge, averaged over a
    short walk; None if the walk cannot start.
    """
    prev = None
    cur = (y, x)
    pts = []
    for _ in range(steps):
        nbrs = [n for n in _neighbors(skel, *cur) if n != prev and n != (y, x)]
        if not nbrs:
            break
        prev, cur = cur, nbrs[0]
        pts.append(cur)
    if not pts:
        return None
    ey, ex = pts[-1]
    vec = np.array([ex - x, ey - y], dtype=np.float64)
    n = np.linalg.norm(vec)
    return vec / n if n > 0 else None


def extract_minutiae(skel, fg_mask=None, spur_length: int = 8,
                     border: int = 10) -> MinutiaSet:
    """Crossing-number minutia extraction from a 1-px skeleton.

    CN=1 pixels are ridge endings, CN=3 bifurcations. Short spurs are pruned
    first; minutiae closer than `border` pixels to the foreground-mask
    boundary (or image border) are discarded.
    """
    s = as_skeleton(skel)
    s = prune_spurs(s, spur_length)
    h, w = s.shape
    if fg_mask is None:
        interior = np.zeros((h, w), dtype=bool)
        if h > 2 * border and w > 2 * border:
            interior[border:h - border, border:w - border] = True
    else:
        interior = ndimage.binary_erosion(fg_mask, iterations=border)
    cn = crossing_number(s)
    items = []
    for y, x in np.argwhere(s == 1):
        c = cn[y, x]
        if c not in (1, 3):
            continue
        if not interior[y, x]:
            continue
        if c == 1:
            d = _trace_direction(s, y, x)
            kind = ENDING
        else:
            d = _trace_direction(s, y, x)
            kind = BIFURCATION
        angle = float(np.mod(np.arctan2(d[1], d[0]), 2 * np.pi)) if d is not None else 0.0
        items.append(Minutia(x=int(x), y=int(y), angle=angle, kind=kind))
    return MinutiaSet(items=tuple(items), width=w, height=h)


def minutia_map(mins: MinutiaSet, dims=None) -> np.ndarray:
    """Binary grid with 1 exactly at minutia coordinates."""
    if dims is None:
        w, h = mins.width, mins.height
    else:
        w, h = dims
    m = np.zeros((h, w), dtype=np.uint8)
    for mi in mins:
        if not (0 <= mi.x < w and 0 <= mi.y < h):
            raise ValueError(f"minutia ({mi.x},{mi.y}) outside {w}x{h}")
        m[mi.y, mi.x] = 1
    return m
