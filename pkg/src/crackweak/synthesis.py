"""
Synthetic low-quality annotations.

A precise crack mask is dilated ``n_dil`` times (3x3 square element) to
mimic over-painting, then warped by a seeded elastic deformation. The
deformation strength ``alpha`` is searched until the warped mask covers
between ``recall_lo`` and ``recall_hi`` of the original crack pixels, which
imitates an annotator who traces quickly and misses a few percent of the
crack.

Search loop per image::

    lo, hi = alpha_lo, alpha_hi
    repeat:
        alpha ~ U{lo..hi}
        r = recall(elastic(dilated, alpha), precise)
        r > recall_hi  ->  lo = alpha     (too faithful, deform more)
        r < recall_lo  ->  hi = alpha     (too damaged, deform less)
    until recall_lo <= r <= recall_hi

Every trial draws from its own ``SeedSequence([seed, trial])`` so a result
depends only on the seed and the trial index.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import InputError, ParameterError, SearchFailureError
from .filters import smooth
from .raster import as_mask, check_same_shape

__all__ = [
    "SynthesisConfig",
    "SynthesisRecord",
    "dilate",
    "elastic_transform",
    "recall",
    "synthesize",
]

_ROT_DEG_PER_UNIT = 15.0
_SCALE_PER_UNIT = 0.1
_SHIFT_DIAG_PER_UNIT = 0.02


@dataclass(frozen=True)
class SynthesisConfig:
    n_dil: int = 1
    recall_lo: float = 0.925
    recall_hi: float = 0.975
    sigma: float = 12.0
    affine_factor: float = 0.2
    alpha_lo: int = 10
    alpha_hi: int = 10000
    seed: int = 0
    max_trials: int = 64

    def __post_init__(self):
        if self.n_dil < 0:
            raise ParameterError("n_dil must be >= 0")
        if not 0 < self.recall_lo < self.recall_hi <= 1:
            raise ParameterError("need 0 < recall_lo < recall_hi <= 1")
        if not 0 <= self.alpha_lo < self.alpha_hi:
            raise ParameterError("need 0 <= alpha_lo < alpha_hi")
        if not self.sigma > 0:
            raise ParameterError("sigma must be positive")
        if not self.affine_factor >= 0:
            raise ParameterError("affine_factor must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be an unsigned 64-bit integer")
        if self.max_trials < 1:
            raise ParameterError("max_trials must be positive")


@dataclass(frozen=True)
class SynthesisRecord:
    achieved_recall: float
    alpha_used: int
    trials: int
    final_bounds: tuple[int, int]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["final_bounds"] = list(self.final_bounds)
        return d


def dilate(mask, times: int = 1) -> np.ndarray:
    """Binary dilation by a 3x3 square, applied ``times`` times."""
    if times < 0:
        raise ParameterError("times must be >= 0")
    out = as_mask(mask).copy()
    h, w = out.shape
    for _ in range(times):
        padded = np.pad(out, 1, constant_values=False)
        grown = np.zeros_like(out)
        for dy in range(3):
            for dx in range(3):
                grown |= padded[dy:dy + h, dx:dx + w]
        out = grown
    return out


def _affine_params(rng: np.random.Generator, factor: float, diag: float):
    u = rng.uniform(-1.0, 1.0, size=4)
    angle = math.radians(u[0] * factor * _ROT_DEG_PER_UNIT)
    scale = 1.0 + u[1] * factor * _SCALE_PER_UNIT
    shift = u[2:] * factor * _SHIFT_DIAG_PER_UNIT * diag
    return angle, scale, shift


def elastic_transform(
    mask,
    alpha: float,
    sigma: float = 12.0,
    affine_factor: float = 0.2,
    seed: int = 0,
) -> np.ndarray:
    """
    Warp a mask with a smoothed random displacement field plus a small affine.

    Parameters
    ----------
    mask : array_like of bool, shape (H, W)
    alpha : float
        Displacement magnitude; the smoothed [-1, 1] noise is multiplied by it.
    sigma : float
        Standard deviation (pixels) of the Gaussian that smooths the noise.
    affine_factor : float
        Scales the random affine: rotation up to ``15 * f`` degrees, scale
        ``1 +- 0.1 * f``, shift up to ``2 % * f`` of the image diagonal.
    seed : int
        Seeds every random draw; equal arguments give identical output.

    Returns
    -------
    np.ndarray of bool, same shape as ``mask``
        Nearest-neighbour resample with replicated borders.
    """
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    if not affine_factor >= 0:
        raise ParameterError("affine_factor must be >= 0")
    m = as_mask(mask)
    h, w = m.shape
    if m.size == 0:
        return m.copy()

    rng = np.random.default_rng(seed)
    dx = smooth(rng.uniform(-1.0, 1.0, size=(h, w)), sigma) * alpha
    dy = smooth(rng.uniform(-1.0, 1.0, size=(h, w)), sigma) * alpha
    angle, scale, shift = _affine_params(rng, affine_factor, math.hypot(h, w))

    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    px = xx + dx - cx
    py = yy + dy - cy
    cos_a, sin_a = math.cos(angle), math.sin(angle)
    sx = scale * (cos_a * px - sin_a * py) + cx + shift[0]
    sy = scale * (sin_a * px + cos_a * py) + cy + shift[1]

    ix = np.clip(np.rint(sx), 0, w - 1).astype(np.intp)
    iy = np.clip(np.rint(sy), 0, h - 1).astype(np.intp)
    return m[iy, ix]


def recall(candidate, precise) -> float:
    """Fraction of precise crack pixels covered by ``candidate`` (1.0 if none)."""
    c, p = as_mask(candidate), as_mask(precise)
    check_same_shape(c, p)
    total = int(np.count_nonzero(p))
    if total == 0:
        return 1.0
    return int(np.count_nonzero(c & p)) / total


def _trial_draws(seed: int, trial: int, lo: int, hi: int) -> tuple[int, int]:
    alpha_seq, field_seq = np.random.SeedSequence([seed, trial]).spawn(2)
    alpha = int(np.random.default_rng(alpha_seq).integers(lo, hi, endpoint=True))
    field_seed = int(field_seq.generate_state(1, np.uint64)[0])
    return alpha, field_seed


def _window_distance(r: float, lo: float, hi: float) -> float:
    return max(lo - r, r - hi, 0.0)


def synthesize(precise, config: SynthesisConfig = SynthesisConfig()) -> tuple[np.ndarray, SynthesisRecord]:
    """Dilate then deform ``precise`` until its recall lands in the window.

    Raises
    ------
    InputError
        ``precise`` has no crack pixels.
    SearchFailureError
        ``max_trials`` ran out; the closest candidate is attached.
    """
    p = as_mask(precise)
    if not p.any():
        raise InputError("precise annotation has no crack pixels")

    d = dilate(p, config.n_dil)
    lo, hi = config.alpha_lo, config.alpha_hi
    best: tuple[float, np.ndarray, SynthesisRecord] | None = None

    for trial in range(config.max_trials):
        alpha, field_seed = _trial_draws(config.seed, trial, lo, hi)
        s = elastic_transform(d, alpha, config.sigma, config.affine_factor, field_seed)
        r = recall(s, p)
        record = SynthesisRecord(r, alpha, trial + 1, (lo, hi))
        if config.recall_lo <= r <= config.recall_hi:
            return s, record

        gap = _window_distance(r, config.recall_lo, config.recall_hi)
        if best is None or gap < best[0]:
            best = (gap, s, record)

        if r > config.recall_hi:
            lo = alpha
        else:
            hi = alpha
        if lo >= hi:
            # bounds collapsed on a noisy draw; reopen around the last alpha
            lo = max(config.alpha_lo, alpha // 2)
            hi = min(config.alpha_hi, max(2 * alpha, lo + 1))
            if lo >= hi:
                lo, hi = config.alpha_lo, config.alpha_hi

    _, best_mask, best_record = best
    raise SearchFailureError(
        f"recall window [{config.recall_lo}, {config.recall_hi}] not reached in "
        f"{config.max_trials} trials (closest recall {best_record.achieved_recall:.4f})",
        best_mask=best_mask,
        best_record=best_record,
    )
