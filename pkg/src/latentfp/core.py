"""Shared domain types, image / minutia / grid file I/O, and seeded RNG.

Conventions used throughout the package:
  * gray images are 2-D float64 arrays with values in [0, 1]; ridges are dark
    (low values) in gray images
  * skeleton maps are 2-D uint8 arrays with ridge pixels = 1
  * minutia coordinates are (x, y) = (column, row); angles in radians [0, 2pi)
  * orientation angles are ridge directions modulo pi
"""

import struct
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

GRID_MAGIC = b"FPG1"

ENDING = "ending"
BIFURCATION = "bifurcation"

_KIND_CODES = {"E": ENDING, "B": BIFURCATION}
_KIND_LETTERS = {ENDING: "E", BIFURCATION: "B"}


class CoreError(Exception):
    """Raised for invalid inputs to core I/O and type constructors."""


def as_gray(data) -> np.ndarray:
    """Validate and return a [0,1] float64 gray image array."""
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise CoreError(f"gray image must be 2-D and non-empty, got shape {arr.shape}")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise CoreError("gray image values must lie in [0, 1]")
    return arr


def as_skeleton(data) -> np.ndarray:
    """Validate and return a {0,1} uint8 skeleton array."""
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise CoreError("skeleton map must be 2-D")
    uniq = np.unique(arr)
    if not np.all(np.isin(uniq, [0, 1])):
        raise CoreError("skeleton map values must be 0 or 1")
    return arr.astype(np.uint8)


@dataclass(frozen=True)
class OrientationField:
    """Per-pixel ridge angle in [0, pi) with a validity mask."""

    angle: np.ndarray
    mask: np.ndarray

    def __post_init__(self):
        angle = np.asarray(self.angle, dtype=np.float64)
        mask = np.asarray(self.mask, dtype=bool)
        if angle.shape != mask.shape:
            raise CoreError("angle and mask shapes differ")
        valid = angle[mask]
        if valid.size and (valid.min() < 0.0 or valid.max() >= np.pi):
            raise CoreError("orientation angles must lie in [0, pi) where valid")
        object.__setattr__(self, "angle", angle)
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self):
        return self.angle.shape


@dataclass(frozen=True)
class Minutia:
    x: int
    y: int
    angle: float
    kind: str

    def __post_init__(self):
        if self.kind not in (ENDING, BIFURCATION):
            raise CoreError(f"unknown minutia kind {self.kind!r}")
        if not 0.0 <= self.angle < 2.0 * np.pi:
            raise CoreError(f"minutia angle {self.angle} outside [0, 2pi)")


@dataclass(frozen=True)
class MinutiaSet:
    items: tuple
    width: int
    height: int

    def __post_init__(self):
        items = tuple(self.items)
        seen = set()
        for m in items:
            if not (0 <= m.x < self.width and 0 <= m.y < self.height):
                raise CoreError(f"minutia at ({m.x},{m.y}) outside {self.width}x{self.height}")
            if (m.x, m.y) in seen:
                raise CoreError(f"duplicate minutia location ({m.x},{m.y})")
            seen.add((m.x, m.y))
        object.__setattr__(self, "items", items)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


@dataclass
class RandomSource:
    """Deterministic RNG keyed by a 64-bit seed.

    Identical seeds yield identical sample streams. ``spawn(i)`` derives an
    independent stream for worker / per-image use.
    """

    seed: int
    _gen: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        if self._gen is None:
            self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def spawn(self, index: int) -> "RandomSource":
        derived = int(np.random.SeedSequence([self.seed, index]).generate_state(1, np.uint64)[0])
        return RandomSource(seed=derived)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)


# ---------------------------------------------------------------------------
# image I/O

def load_gray_image(path) -> np.ndarray:
    """Load an 8-bit grayscale raster as a [0,1] float array."""
    try:
        img = Image.open(path)
    except FileNotFoundError:
        raise CoreError(f"image file not found: {path}")
    except Exception as exc:
        raise CoreError(f"cannot read image {path}: {exc}")
    with img:
        if img.mode == "1":
            img = img.convert("L")
        if img.mode != "L":
            raise CoreError(
                f"non-grayscale input rejected: {path} has mode {img.mode}, expected 8-bit grayscale")
        arr = np.asarray(img, dtype=np.float64) / 255.0
    return arr


def save_gray_image(img, path) -> None:
    """Save a [0,1] gray image as 8-bit grayscale PNG."""
    arr = as_gray(img)
    q = np.rint(arr * 255.0).astype(np.uint8)
    try:
        Image.fromarray(q, mode="L").save(path, format="PNG")
    except OSError as exc:
        raise CoreError(f"cannot write image {path}: {exc}")


# ---------------------------------------------------------------------------
# minutia text I/O: one record per line, "x y angle_degrees kind"

def read_minutiae(path, width=None, height=None) -> MinutiaSet:
    """Read a whitespace-delimited minutia file.

    When width/height are omitted they are inferred as a tight bound over
    the listed coordinates.
    """
    items = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except FileNotFoundError:
        raise CoreError(f"minutia file not found: {path}")
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) != 4:
            raise CoreError(f"{path}:{lineno}: expected 'x y angle_deg kind', got {stripped!r}")
        try:
            x, y = int(parts[0]), int(parts[1])
            deg = float(parts[2])
        except ValueError:
            raise CoreError(f"{path}:{lineno}: malformed numeric field in {stripped!r}")
        if not 0.0 <= deg < 360.0:
            raise CoreError(f"{path}:{lineno}: angle {deg} outside [0, 360)")
        kind = _KIND_CODES.get(parts[3])
        if kind is None:
            raise CoreError(f"{path}:{lineno}: unknown kind {parts[3]!r}, expected E or B")
        items.append(Minutia(x=x, y=y, angle=np.deg2rad(deg), kind=kind))
    if width is None:
        width = max((m.x for m in items), default=0) + 1
    if height is None:
        height = max((m.y for m in items), default=0) + 1
    return MinutiaSet(items=tuple(items), width=width, height=height)


def write_minutiae(mins: MinutiaSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for m in mins:
            fh.write(f"{m.x} {m.y} {np.rad2deg(m.angle):.4f} {_KIND_LETTERS[m.kind]}\n")


# ---------------------------------------------------------------------------
# binary grid format: magic, uint32 height, uint32 width, float32 row-major LE

def save_grid(arr, path) -> None:
    a = np.asarray(arr, dtype=np.float32)
    if a.ndim != 2:
        raise CoreError("grid must be 2-D")
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<II", a.shape[0], a.shape[1]))
        fh.write(a.astype("<f4").tobytes(order="C"))


def load_grid(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != GRID_MAGIC:
            raise CoreError(f"{path}: bad grid magic {magic!r}")
        h, w = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(4 * h * w), dtype="<f4")
        if data.size != h * w:
            raise CoreError(f"{path}: truncated grid payload")
    return data.reshape(h, w).astype(np.float64)
