"""
End-to-end runs over a dataset manifest.

``run_pipeline`` touches test entries only; ``synthesize_dataset`` touches
train entries only. Probability maps are snapped to the 16-bit grid they are
stored on before being used downstream, so chaining the individual CLI
commands through files gives the same masks and scores as an in-memory run.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .dataset import DatasetManifest, ManifestEntry
from .errors import CrackweakError, ImageProcessingError, ParameterError
from .evaluation import EvalReport, evaluate
from .fusion import fuse
from .macro import MacroSource, macro_prob
from .micro import MicroConfig, micro_prob
from .raster import PROB_SCALE, read_gray, read_mask, round_half_up, threshold, write_mask, write_prob
from .synthesis import SynthesisConfig, SynthesisRecord, synthesize

__all__ = [
    "PipelineConfig",
    "quantize_prob",
    "image_seed",
    "run_pipeline",
    "synthesize_dataset",
    "parallel_map",
]

log = logging.getLogger(__name__)


def quantize_prob(prob: np.ndarray) -> np.ndarray:
    return round_half_up(np.asarray(prob) * PROB_SCALE) / PROB_SCALE


def image_seed(seed: int, image_id: str) -> int:
    """Per-image seed that depends on the id, not on processing order."""
    digest = hashlib.sha256(f"{seed}:{image_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class PipelineConfig:
    synthesis: SynthesisConfig = field(default_factory=SynthesisConfig)
    micro: MicroConfig = field(default_factory=MicroConfig)
    macro: MacroSource = field(default_factory=MacroSource)
    threshold: float = 0.5
    output_dir: str = "out"
    sweep: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ParameterError("threshold must be in [0, 1]")
        if self.sweep is not None:
            object.__setattr__(self, "sweep", tuple(float(t) for t in self.sweep))
            if any(not 0.0 <= t <= 1.0 for t in self.sweep):
                raise ParameterError("sweep thresholds must be in [0, 1]")

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        try:
            kwargs = {}
            if "synthesis" in data:
                kwargs["synthesis"] = SynthesisConfig(**data.pop("synthesis"))
            if "micro" in data:
                kwargs["micro"] = MicroConfig(**data.pop("micro"))
            if "macro" in data:
                kwargs["macro"] = MacroSource(**data.pop("macro"))
            return cls(**kwargs, **data)
        except TypeError as exc:
            raise ParameterError(f"bad pipeline config: {exc}") from exc

    @classmethod
    def from_json(cls, path) -> "PipelineConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["macro"]["kind"] = self.macro.kind.value
        if self.sweep is not None:
            d["sweep"] = list(self.sweep)
        return d

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, synthesis=replace(self.synthesis, seed=seed))


def parallel_map(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Ordered map over a thread pool; ``jobs <= 1`` runs inline."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _with_context(entry: ManifestEntry, fn: Callable):
    try:
        return fn()
    except CrackweakError as exc:
        if isinstance(exc, ImageProcessingError):
            raise
        raise ImageProcessingError(entry.image_id, exc) from exc


def run_pipeline(
    manifest: DatasetManifest,
    config: PipelineConfig,
    jobs: int = 1,
    write_outputs: bool = True,
) -> EvalReport:
    """Macro map, micro map, fuse, threshold and score every test image.

    Intermediate rasters go to ``config.output_dir/{macro,micro,fused,pred}``
    together with ``report.json`` (and ``sweep.csv`` when a sweep grid is
    configured).
    """
    entries = manifest.test
    if not entries:
        raise ParameterError("manifest has no test entries")
    out = Path(config.output_dir)

    def work(entry: ManifestEntry):
        def inner():
            image = read_gray(entry.image_path)
            gt = read_mask(entry.annotation_path)
            macro = quantize_prob(macro_prob(config.macro, entry.image_id, image))
            micro = quantize_prob(micro_prob(image, config.micro))
            fused = quantize_prob(fuse(macro, micro))
            pred = threshold(fused, config.threshold)
            if write_outputs:
                name = f"{entry.image_id}.png"
                write_prob(out / "macro" / name, macro)
                write_prob(out / "micro" / name, micro)
                write_prob(out / "fused" / name, fused)
                write_mask(out / "pred" / name, pred)
            return fused, gt
        return _with_context(entry, inner)

    results = parallel_map(work, entries, jobs)
    report = evaluate(
        [r[0] for r in results],
        [r[1] for r in results],
        [e.image_id for e in entries],
        t=config.threshold,
        grid=config.sweep,
    )
    if write_outputs:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        if report.sweep is not None:
            (out / "sweep.csv").write_text(report.sweep_csv(), encoding="utf-8")
    log.info("macro F1 %.4f over %d test images", report.macro_f1, len(entries))
    return report


def synthesize_dataset(
    entries: Iterable[ManifestEntry],
    config: SynthesisConfig,
    out_dir,
    jobs: int = 1,
) -> list[dict]:
    """Synthesize one low-quality annotation per entry.

    Writes ``<out_dir>/<image_id>.png`` and ``<out_dir>/synthesis_log.jsonl``.
    Callers pass train entries; the seed for each image is derived from the
    configured seed and the image id.
    """
    entries = list(entries)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def work(entry: ManifestEntry) -> dict:
        def inner():
            precise = read_mask(entry.annotation_path)
            cfg = replace(config, seed=image_seed(config.seed, entry.image_id))
            mask, record = synthesize(precise, cfg)
            name = f"{entry.image_id}.png"
            write_mask(out / name, mask)
            return _log_row(name, record)
        return _with_context(entry, inner)

    rows = parallel_map(work, entries, jobs)
    with open(out / "synthesis_log.jsonl", "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
    return rows


def _log_row(name: str, record: SynthesisRecord) -> dict:
    return {"file": name, **record.to_dict()}
