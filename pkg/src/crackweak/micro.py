"""
Darkness-based crack probability (the unsupervised refinement branch).

Each pixel's probability is its inverted brightness ``(255 - v) / 255``,
optionally after a Gaussian blur and optionally min-max rescaled per image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .filters import gaussian_blur
from .raster import as_gray

__all__ = ["MicroConfig", "micro_prob", "gaussian_blur"]


@dataclass(frozen=True)
class MicroConfig:
    smoothing_sigma: float = 0.0
    normalize_per_image: bool = False
    # False replaces the branch with all-ones maps, i.e. macro-only inference
    enabled: bool = True

    def __post_init__(self):
        if not self.smoothing_sigma >= 0:
            raise ParameterError("smoothing_sigma must be >= 0")


def micro_prob(image, config: MicroConfig = MicroConfig()) -> np.ndarray:
    img = as_gray(image)
    if not config.enabled:
        return np.ones(img.shape, dtype=np.float64)
    if config.smoothing_sigma > 0:
        img = gaussian_blur(img, config.smoothing_sigma)

    prob = (255.0 - img.astype(np.float64)) / 255.0
    if config.normalize_per_image and prob.size:
        lo, hi = prob.min(), prob.max()
        if hi == lo:
            return np.full(prob.shape, 0.5)
        prob = np.clip((prob - lo) / (hi - lo), 0.0, 1.0)
    return prob
