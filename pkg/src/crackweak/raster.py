"""
Raster types, conversions and PNG interchange.

Rasters are plain numpy arrays, row-major, shape ``(height, width)``:

* gray image  -- ``uint8``, brightness 0-255
* binary mask -- ``bool``, True = crack
* prob map    -- ``float64``, crack probability in [0, 1]

The ``as_*`` helpers coerce and validate; every public operation in the
package runs its inputs through them.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import cv2
import numpy as np

from .errors import (
    ColorTypeError,
    DimensionMismatchError,
    MissingFileError,
    ParameterError,
    RasterFileError,
    StructuralError,
)

__all__ = [
    "BT601_WEIGHTS",
    "MASK_LEVEL",
    "PROB_SCALE",
    "as_gray",
    "as_mask",
    "as_prob",
    "check_same_shape",
    "round_half_up",
    "to_gray",
    "threshold",
    "read_image",
    "read_gray",
    "read_mask",
    "read_prob",
    "write_gray",
    "write_mask",
    "write_prob",
    "IMAGE_SUFFIXES",
]

BT601_WEIGHTS = (0.299, 0.587, 0.114)
MASK_LEVEL = 128  # annotation pixels >= this are crack
PROB_SCALE = 65535
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(x, dtype=np.float64) + 0.5)


def _check_2d(arr: np.ndarray, what: str) -> None:
    if arr.ndim != 2:
        raise StructuralError(f"{what} must be 2-D (height, width), got shape {arr.shape}")


def as_gray(image) -> np.ndarray:
    """Validate a gray image and return it as ``uint8``."""
    arr = np.asarray(image)
    _check_2d(arr, "gray image")
    if arr.dtype == np.uint8:
        return arr
    if arr.dtype == bool:
        raise StructuralError("gray image cannot be boolean")
    if arr.size and (arr.min() < 0 or arr.max() > 255):
        raise ParameterError("gray values must lie in [0, 255]")
    if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.floor(arr)):
        raise ParameterError("gray values must be integers")
    return arr.astype(np.uint8)


def as_mask(mask) -> np.ndarray:
    arr = np.asarray(mask)
    _check_2d(arr, "mask")
    return arr.astype(bool, copy=False)


def as_prob(prob) -> np.ndarray:
    arr = np.asarray(prob, dtype=np.float64)
    _check_2d(arr, "probability map")
    if arr.size and (np.isnan(arr).any() or arr.min() < 0.0 or arr.max() > 1.0):
        raise ParameterError("probabilities must lie in [0, 1]")
    return arr


def check_same_shape(*arrays: np.ndarray) -> None:
    shapes = {np.shape(a) for a in arrays}
    if len(shapes) > 1:
        raise DimensionMismatchError(f"raster dimensions differ: {sorted(shapes)}")


def to_gray(rgb, weights: Sequence[float] = BT601_WEIGHTS) -> np.ndarray:
    """Weighted luma of an RGB raster.

    ``rgb`` is either an ``(H, W, 3)`` array or a sequence of three
    ``(H, W)`` channel arrays in R, G, B order. Each output pixel is
    ``round(sum(w_i * c_i))`` clamped to [0, 255].
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (3,):
        raise ParameterError("exactly three channel weights are required")
    if np.any(w < 0) or abs(float(w.sum()) - 1.0) > 1e-9:
        raise ParameterError("weights must be non-negative and sum to 1")

    if isinstance(rgb, np.ndarray) and rgb.ndim == 3:
        if rgb.shape[2] != 3:
            raise StructuralError(f"expected 3 channels, got {rgb.shape[2]}")
        channels = [rgb[..., i] for i in range(3)]
    else:
        channels = [np.asarray(c) for c in rgb]
        if len(channels) != 3:
            raise StructuralError(f"expected 3 channels, got {len(channels)}")
    check_same_shape(*channels)
    channels = [np.asarray(c, dtype=np.float64) for c in channels]
    for c in channels:
        _check_2d(c, "channel")
        if c.size and (c.min() < 0 or c.max() > 255):
            raise ParameterError("channel values must lie in [0, 255]")

    acc = w[0] * channels[0] + w[1] * channels[1] + w[2] * channels[2]
    return np.clip(round_half_up(acc), 0, 255).astype(np.uint8)


def threshold(prob, t: float) -> np.ndarray:
    """Binary mask of pixels whose probability is at least ``t``."""
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"threshold must be in [0, 1], got {t}")
    return as_prob(prob) >= t


# --------------------------------------------------------------------------- #
# PNG / image files
# --------------------------------------------------------------------------- #
def read_image(path) -> np.ndarray:
    """Raw pixel array as stored on disk; colour images come back as RGB."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"no such file: {path}")
    arr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise RasterFileError(f"cannot decode image: {path}")
    if arr.ndim == 3:
        if arr.shape[2] == 4:
            arr = cv2.cvtColor(arr, cv2.COLOR_BGRA2RGB)
        elif arr.shape[2] == 3:
            arr = cv2.cvtColor(arr, cv2.COLOR_BGR2RGB)
        elif arr.shape[2] == 1:
            arr = arr[..., 0]
    return arr


def read_gray(path, weights: Sequence[float] = BT601_WEIGHTS) -> np.ndarray:
    arr = read_image(path)
    if arr.dtype != np.uint8:
        raise ColorTypeError(f"{path}: expected 8-bit image, got {arr.dtype}")
    if arr.ndim == 3:
        return to_gray(arr, weights)
    return arr


def read_mask(path) -> np.ndarray:
    """Annotation file to mask; anti-aliased edges binarize at brightness 128."""
    return read_gray(path) >= MASK_LEVEL


def read_prob(path) -> np.ndarray:
    """8- or 16-bit single-channel PNG to probabilities in [0, 1]."""
    arr = read_image(path)
    if arr.ndim != 2:
        raise ColorTypeError(f"{path}: probability maps must be single-channel")
    if arr.dtype == np.uint8:
        return arr.astype(np.float64) / 255.0
    if arr.dtype == np.uint16:
        return arr.astype(np.float64) / PROB_SCALE
    raise ColorTypeError(f"{path}: unsupported bit depth {arr.dtype}")


def _write(path, arr: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), arr):
        raise RasterFileError(f"cannot write {path}")


def write_gray(path, image) -> None:
    _write(path, as_gray(image))


def write_mask(path, mask) -> None:
    _write(path, as_mask(mask).astype(np.uint8) * 255)


def write_prob(path, prob) -> None:
    """16-bit PNG; quantisation error is at most 0.5 / 65535 per pixel."""
    q = round_half_up(as_prob(prob) * PROB_SCALE).astype(np.uint16)
    _write(path, q)
