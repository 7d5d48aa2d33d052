"""Separable Gaussian smoothing with replicated borders."""

from __future__ import annotations

import math

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ParameterError
from .raster import as_gray, round_half_up

__all__ = ["gaussian_kernel1d", "smooth", "gaussian_blur"]


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized taps ``exp(-i^2 / 2 sigma^2)`` for ``|i| <= ceil(3 sigma)``."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def smooth(field: np.ndarray, sigma: float) -> np.ndarray:
    """Float-valued blur: rows then columns, borders replicated."""
    k = gaussian_kernel1d(sigma)
    out = correlate1d(np.asarray(field, dtype=np.float64), k, axis=1, mode="nearest")
    return correlate1d(out, k, axis=0, mode="nearest")


def gaussian_blur(image, sigma: float) -> np.ndarray:
    """Blur a gray image and round back to integer brightness."""
    img = as_gray(image)
    return np.clip(round_half_up(smooth(img, sigma)), 0, 255).astype(np.uint8)
