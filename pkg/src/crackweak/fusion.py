"""Multiplicative fusion of the macro and micro probability maps."""

from __future__ import annotations

import numpy as np

from .raster import as_prob, check_same_shape

__all__ = ["fuse"]


def fuse(macro, micro) -> np.ndarray:
    """Pointwise product. Never exceeds either input, so the micro map can only
    suppress macro detections."""
    a, b = as_prob(macro), as_prob(micro)
    check_same_shape(a, b)
    return a * b
