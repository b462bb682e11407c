"""Latent fingerprint enhancement via constrained skeleton generation.

Subpackages cover the full pipeline: synthetic latent generation
(`distortion`, `synthesis`), classical preprocessing (`tvdecomp`,
`skeleton`, `orientation`, `weightmap`), the adversarial enhancement
network (`network`, `training`), sliding-window inference (`inference`),
and minutia/identification evaluation (`evaluation`).
"""

from .core import (BIFURCATION, ENDING, CoreError, Minutia, MinutiaSet,
                   OrientationField, RandomSource, load_gray_image,
                   load_grid, read_minutiae, save_gray_image, save_grid,
                   write_minutiae)

__all__ = [
    "BIFURCATION", "ENDING", "CoreError", "Minutia", "MinutiaSet",
    "OrientationField", "RandomSource", "load_gray_image", "load_grid",
    "read_minutiae", "save_gray_image", "save_grid", "write_minutiae",
]

__version__ = "0.1.0"
