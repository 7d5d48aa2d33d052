"""
Tolerance-free scoring.

Predictions are compared to ground truth pixel by pixel, with no distance
tolerance around crack boundaries. The headline number is Macro F1, the
harmonic mean of the per-image mean precision and mean recall, so every
image counts equally regardless of crack thickness. Micro F1 pools pixel
counts over the dataset and is reported alongside.

Empty-set conventions: an image with no predicted pixels has precision 1.0
if its ground truth is also empty, else 0.0; an image with empty ground
truth has recall 1.0.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .errors import InputError, StructuralError
from .raster import as_gray, as_mask, check_same_shape, threshold

__all__ = [
    "ImageScore",
    "EvalReport",
    "BrightnessHistogram",
    "score_image",
    "macro_f1",
    "micro_f1",
    "sweep_threshold",
    "best_of_sweep",
    "evaluate",
    "brightness_histograms",
    "DEFAULT_GRID",
]

DEFAULT_GRID = tuple(round(i / 100, 2) for i in range(101))


@dataclass(frozen=True)
class ImageScore:
    image_id: str
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 0.0 if p + r == 0 else 2 * p * r / (p + r)


@dataclass
class EvalReport:
    scores: list[ImageScore]
    macro_f1: float
    micro_f1: float
    threshold: float
    sweep: list[tuple[float, float]] | None = None

    @property
    def best(self) -> tuple[float, float] | None:
        return best_of_sweep(self.sweep) if self.sweep else None

    def to_dict(self) -> dict:
        d = {
            "threshold": self.threshold,
            "macro_f1": self.macro_f1,
            "micro_f1": self.micro_f1,
            "mean_precision": sum(s.precision for s in self.scores) / len(self.scores),
            "mean_recall": sum(s.recall for s in self.scores) / len(self.scores),
            "scores": [asdict(s) for s in self.scores],
        }
        if self.sweep is not None:
            d["sweep"] = [{"threshold": t, "macro_f1": f} for t, f in self.sweep]
            t, f = self.best
            d["best"] = {"threshold": t, "macro_f1": f}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def sweep_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "macro_f1"])
        for t, f in self.sweep or []:
            writer.writerow([repr(t), repr(f)])
        return buf.getvalue()


def score_image(pred, gt, image_id: str = "") -> ImageScore:
    p, g = as_mask(pred), as_mask(gt)
    check_same_shape(p, g)
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))

    if tp + fp == 0:
        precision = 1.0 if tp + fn == 0 else 0.0
    else:
        precision = tp / (tp + fp)
    recall = 1.0 if tp + fn == 0 else tp / (tp + fn)
    return ImageScore(image_id, precision, recall, tp, fp, fn)


def macro_f1(scores: Sequence[ImageScore]) -> float:
    if not scores:
        raise InputError("macro_f1 needs at least one image score")
    p = sum(s.precision for s in scores) / len(scores)
    r = sum(s.recall for s in scores) / len(scores)
    return 0.0 if p + r == 0 else 2 * p * r / (p + r)


def micro_f1(scores: Sequence[ImageScore]) -> float:
    if not scores:
        raise InputError("micro_f1 needs at least one image score")
    tp = sum(s.tp for s in scores)
    fp = sum(s.fp for s in scores)
    fn = sum(s.fn for s in scores)
    if tp + fp + fn == 0:
        return 1.0
    return 2 * tp / (2 * tp + fp + fn)


def _check_aligned(a: Sequence, b: Sequence) -> None:
    if len(a) != len(b):
        raise StructuralError(f"list lengths differ: {len(a)} vs {len(b)}")
    if not a:
        raise InputError("empty input lists")


def sweep_threshold(probs: Sequence, gts: Sequence, grid: Sequence[float] = DEFAULT_GRID) -> list[tuple[float, float]]:
    """Macro F1 at every threshold in ``grid``; use ``best_of_sweep`` for the argmax."""
    _check_aligned(probs, gts)
    gts = [as_mask(g) for g in gts]
    curve = []
    for t in grid:
        scores = [score_image(threshold(p, t), g) for p, g in zip(probs, gts)]
        curve.append((float(t), macro_f1(scores)))
    return curve


def best_of_sweep(curve: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Highest-F1 point; ties go to the lowest threshold."""
    return max(curve, key=lambda tf: (tf[1], -tf[0]))


def evaluate(
    preds: Sequence,
    gts: Sequence,
    image_ids: Sequence[str] | None = None,
    t: float = 0.5,
    grid: Sequence[float] | None = None,
    probabilistic: bool = True,
) -> EvalReport:
    """Score a dataset.

    With ``probabilistic`` the predictions are probability maps thresholded
    at ``t`` (and swept over ``grid`` if given); otherwise they are masks.
    """
    _check_aligned(preds, gts)
    if image_ids is None:
        image_ids = [str(i) for i in range(len(preds))]
    masks = [threshold(p, t) if probabilistic else as_mask(p) for p in preds]
    scores = [score_image(m, g, i) for m, g, i in zip(masks, gts, image_ids)]
    sweep = None
    if grid is not None:
        if not probabilistic:
            raise InputError("threshold sweep needs probability maps")
        sweep = sweep_threshold(preds, gts, grid)
    return EvalReport(scores, macro_f1(scores), micro_f1(scores), float(t), sweep)


@dataclass
class BrightnessHistogram:
    crack_bins: np.ndarray
    noncrack_bins: np.ndarray
    overlap: float = field(default=0.0)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["brightness", "crack", "noncrack"])
        for b in range(256):
            writer.writerow([b, int(self.crack_bins[b]), int(self.noncrack_bins[b])])
        return buf.getvalue()


def _overlap(a: np.ndarray, b: np.ndarray) -> float:
    if a.sum() == 0 or b.sum() == 0:
        return 0.0
    return min(1.0, float(np.minimum(a / a.sum(), b / b.sum()).sum()))


def brightness_histograms(images: Sequence, gts: Sequence) -> BrightnessHistogram:
    """256-bin brightness counts per class and their density overlap in [0, 1]."""
    _check_aligned(images, gts)
    crack = np.zeros(256, dtype=np.int64)
    non = np.zeros(256, dtype=np.int64)
    for img, gt in zip(images, gts):
        img, gt = as_gray(img), as_mask(gt)
        check_same_shape(img, gt)
        crack += np.bincount(img[gt], minlength=256)
        non += np.bincount(img[~gt], minlength=256)
    return BrightnessHistogram(crack, non, _overlap(crack, non))
