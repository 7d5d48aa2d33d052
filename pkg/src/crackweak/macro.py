"""
Macro-branch probability maps.

Any detector can fill this role. The normal path is to load maps written by
an external model; ``classical_baseline`` is a small darker-than-background
detector so the pipeline runs without one. The baseline keys on darkness
just like the micro branch, so fusing the two gives far less refinement than
a learned localiser would.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import DimensionMismatchError, ParameterError
from .filters import gaussian_blur
from .raster import as_gray, read_prob

__all__ = ["MacroKind", "MacroSource", "load_prob_map", "classical_baseline", "macro_prob"]


class MacroKind(str, Enum):
    EXTERNAL_MAP = "external_map"
    CLASSICAL_BASELINE = "classical_baseline"


@dataclass(frozen=True)
class MacroSource:
    kind: MacroKind = MacroKind.CLASSICAL_BASELINE
    background_sigma: float = 8.0
    contrast_scale: float = 40.0
    map_dir: str | None = None  # external maps, one <image_id>.png per image

    def __post_init__(self):
        object.__setattr__(self, "kind", MacroKind(self.kind))
        if self.kind is MacroKind.CLASSICAL_BASELINE:
            if not self.background_sigma > 0:
                raise ParameterError("background_sigma must be positive")
            if not self.contrast_scale > 0:
                raise ParameterError("contrast_scale must be positive")
        elif self.map_dir is None:
            raise ParameterError("external_map source needs map_dir")


def load_prob_map(path, expected_dims: tuple[int, int] | None = None) -> np.ndarray:
    """Read an 8/16-bit grayscale PNG as a probability map.

    ``expected_dims`` is ``(width, height)``.
    """
    prob = read_prob(path)
    if expected_dims is not None:
        w, h = expected_dims
        if prob.shape != (h, w):
            raise DimensionMismatchError(
                f"{path}: map is {prob.shape[1]}x{prob.shape[0]}, expected {w}x{h}"
            )
    return prob


def classical_baseline(image, background_sigma: float = 8.0, contrast_scale: float = 40.0) -> np.ndarray:
    """``clamp((blur(image) - image) / contrast_scale, 0, 1)``."""
    if not contrast_scale > 0:
        raise ParameterError("contrast_scale must be positive")
    img = as_gray(image)
    background = gaussian_blur(img, background_sigma).astype(np.float64)
    return np.clip((background - img) / contrast_scale, 0.0, 1.0)


def macro_prob(source: MacroSource, image_id: str, image) -> np.ndarray:
    img = as_gray(image)
    if source.kind is MacroKind.CLASSICAL_BASELINE:
        return classical_baseline(img, source.background_sigma, source.contrast_scale)
    path = Path(source.map_dir) / f"{image_id}.png"
    return load_prob_map(path, (img.shape[1], img.shape[0]))
