"""Weakly-supervised crack detection toolkit.

Synthesizes coarse annotations from precise ones, computes darkness-based
micro-branch maps, fuses them with macro-branch maps and scores the result
with tolerance-free Macro F1.
"""

from .errors import CrackweakError
from .evaluation import (
    BrightnessHistogram,
    EvalReport,
    ImageScore,
    brightness_histograms,
    evaluate,
    macro_f1,
    micro_f1,
    score_image,
    sweep_threshold,
)
from .filters import gaussian_blur
from .fusion import fuse
from .macro import MacroKind, MacroSource, classical_baseline, load_prob_map
from .micro import MicroConfig, micro_prob
from .raster import threshold, to_gray
from .synthesis import SynthesisConfig, SynthesisRecord, dilate, elastic_transform, recall, synthesize

__version__ = "0.1.0"
