"""Command line entry point: ``crackweak synth|macro|micro|fuse|eval|hist|run``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .dataset import open_dataset
from .errors import CrackweakError, ParameterError, StructuralError
from .evaluation import DEFAULT_GRID, brightness_histograms, evaluate
from .fusion import fuse
from .macro import MacroKind, MacroSource, load_prob_map, macro_prob
from .micro import MicroConfig, micro_prob
from .pipeline import PipelineConfig, parallel_map, quantize_prob, run_pipeline, synthesize_dataset
from .raster import IMAGE_SUFFIXES, read_gray, read_mask, read_prob, write_prob

log = logging.getLogger("crackweak")


def _parse_grid(text: str | None):
    if text is None:
        return None
    if text == "default":
        return DEFAULT_GRID
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            n = int(round((stop - start) / step))
            return tuple(round(start + i * step, 10) for i in range(n + 1))
        return tuple(float(x) for x in text.split(","))
    except ValueError as exc:
        raise ParameterError(f"bad sweep grid {text!r}; use start:stop:step or a comma list") from exc


def _index_dir(directory) -> dict[str, Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise ParameterError(f"not a directory: {directory}")
    return {
        p.stem: p
        for p in sorted(directory.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    }


def _dataset_entries(args, default_split: str):
    manifest = open_dataset(args.data, getattr(args, "split_file", None))
    split = args.split or default_split
    return list(manifest.entries) if split == "all" else manifest.split(split)


def _images(args) -> list[tuple[str, Path]]:
    if args.data is not None:
        return [(e.image_id, e.image_path) for e in _dataset_entries(args, "test")]
    if args.images is None:
        raise ParameterError("give --images DIR or --data DATASET")
    return sorted(_index_dir(args.images).items())


def _ground_truth(args) -> dict[str, Path]:
    if args.data is not None:
        return {e.image_id: e.annotation_path for e in _dataset_entries(args, "test")}
    if args.gt is None:
        raise ParameterError("give --gt DIR or --data DATASET")
    return _index_dir(args.gt)


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


# --------------------------------------------------------------------------- #
# subcommands
# --------------------------------------------------------------------------- #
def cmd_synth(args) -> int:
    cfg = _load_config(args).synthesis
    if args.n_dil is not None:
        cfg = replace(cfg, n_dil=args.n_dil)
    entries = _dataset_entries(args, "train")
    rows = synthesize_dataset(entries, cfg, args.out, jobs=args.jobs)
    log.info("synthesized %d annotations into %s", len(rows), args.out)
    return 0


def cmd_micro(args) -> int:
    base = _load_config(args).micro
    cfg = MicroConfig(
        smoothing_sigma=base.smoothing_sigma if args.sigma is None else args.sigma,
        normalize_per_image=base.normalize_per_image or args.normalize,
    )
    out = Path(args.out)

    def work(item):
        image_id, path = item
        write_prob(out / f"{image_id}.png", quantize_prob(micro_prob(read_gray(path), cfg)))

    parallel_map(work, _images(args), args.jobs)
    return 0


def cmd_macro(args) -> int:
    base = _load_config(args).macro
    if args.source == "external":
        if args.dir is None:
            raise ParameterError("--source external needs --dir")
        source = MacroSource(MacroKind.EXTERNAL_MAP, map_dir=args.dir)
    else:
        source = MacroSource(
            MacroKind.CLASSICAL_BASELINE,
            background_sigma=base.background_sigma if args.bg_sigma is None else args.bg_sigma,
            contrast_scale=base.contrast_scale if args.contrast is None else args.contrast,
        )
    out = Path(args.out)

    def work(item):
        image_id, path = item
        prob = macro_prob(source, image_id, read_gray(path))
        write_prob(out / f"{image_id}.png", quantize_prob(prob))

    parallel_map(work, _images(args), args.jobs)
    return 0


def cmd_fuse(args) -> int:
    macro, micro = _index_dir(args.macro), _index_dir(args.micro)
    if set(macro) != set(micro):
        diff = sorted(set(macro) ^ set(micro))
        raise StructuralError("macro and micro directories differ on: " + ", ".join(diff))
    out = Path(args.out)

    def work(image_id):
        a = read_prob(macro[image_id])
        b = load_prob_map(micro[image_id], (a.shape[1], a.shape[0]))
        write_prob(out / f"{image_id}.png", quantize_prob(fuse(a, b)))

    parallel_map(work, sorted(macro), args.jobs)
    return 0


def cmd_eval(args) -> int:
    preds = _index_dir(args.pred)
    gts = _ground_truth(args)
    missing = sorted(set(gts) - set(preds))
    if missing:
        raise StructuralError("no prediction for: " + ", ".join(missing))
    ids = sorted(gts)
    load = read_prob if args.prob else read_mask
    pred_arrays = [load(preds[i]) for i in ids]
    gt_arrays = [read_mask(gts[i]) for i in ids]
    grid = _parse_grid(args.sweep)
    report = evaluate(pred_arrays, gt_arrays, ids, t=args.threshold, grid=grid, probabilistic=args.prob)

    text = report.to_json()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text, encoding="utf-8")
        if report.sweep is not None:
            csv_path = args.sweep_csv or str(Path(args.out).with_suffix("")) + "_sweep.csv"
            Path(csv_path).write_text(report.sweep_csv(), encoding="utf-8")
    else:
        sys.stdout.write(text)
    summary = {"macro_f1": report.macro_f1, "micro_f1": report.micro_f1}
    if report.best is not None:
        summary["best_threshold"], summary["best_macro_f1"] = report.best
    print(json.dumps(summary))
    return 0


def cmd_hist(args) -> int:
    images = dict(_images(args))
    gts = _ground_truth(args)
    missing = sorted(set(images) - set(gts))
    if missing:
        raise StructuralError("no ground truth for: " + ", ".join(missing))
    ids = sorted(images)
    hist = brightness_histograms([read_gray(images[i]) for i in ids], [read_mask(gts[i]) for i in ids])
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_text(hist.to_csv(), encoding="utf-8")
    print(json.dumps({
        "overlap": hist.overlap,
        "crack_pixels": int(hist.crack_bins.sum()),
        "noncrack_pixels": int(hist.noncrack_bins.sum()),
    }))
    return 0


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if args.out:
        cfg = replace(cfg, output_dir=args.out)
    if args.sweep:
        cfg = replace(cfg, sweep=_parse_grid(args.sweep))
    manifest = open_dataset(args.data, args.split_file)
    report = run_pipeline(manifest, cfg, jobs=args.jobs)
    summary = {"macro_f1": report.macro_f1, "micro_f1": report.micro_f1, "images": len(report.scores)}
    if report.best is not None:
        summary["best_threshold"], summary["best_macro_f1"] = report.best
    print(json.dumps(summary))
    return 0


# --------------------------------------------------------------------------- #
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="pipeline config JSON")
    common.add_argument("--seed", type=int, help="override synthesis seed")
    common.add_argument("--jobs", type=int, default=1, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true")

    def data_opts(p, split_default):
        p.add_argument("--data", help="dataset root directory or JSON manifest")
        p.add_argument("--split-file", help="text file of test ids")
        p.add_argument("--split", choices=["train", "test", "all"],
                       help=f"entries to use with --data (default {split_default})")

    parser = argparse.ArgumentParser(prog="crackweak", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="synthesize low-quality annotations")
    data_opts(p, "train")
    p.add_argument("--n-dil", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("micro", parents=[common], help="darkness probability maps")
    data_opts(p, "test")
    p.add_argument("--images")
    p.add_argument("--sigma", type=float)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_micro)

    p = sub.add_parser("macro", parents=[common], help="macro-branch probability maps")
    data_opts(p, "test")
    p.add_argument("--images")
    p.add_argument("--source", choices=["external", "baseline"], default="baseline")
    p.add_argument("--dir", help="external map directory")
    p.add_argument("--bg-sigma", type=float)
    p.add_argument("--contrast", type=float)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_macro)

    p = sub.add_parser("fuse", parents=[common], help="multiply macro and micro maps")
    p.add_argument("--macro", required=True)
    p.add_argument("--micro", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", parents=[common], help="Macro/Micro F1 of predictions")
    data_opts(p, "test")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt")
    p.add_argument("--prob", action="store_true", help="predictions are probability maps")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--sweep", nargs="?", const="default",
                   help="threshold grid, start:stop:step or comma list")
    p.add_argument("--out", help="report JSON path (stdout if omitted)")
    p.add_argument("--sweep-csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("hist", parents=[common], help="brightness histograms per class")
    data_opts(p, "test")
    p.add_argument("--images")
    p.add_argument("--gt")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("run", parents=[common], help="end-to-end evaluation on the test split")
    p.add_argument("--data", required=True)
    p.add_argument("--split-file")
    p.add_argument("--sweep", nargs="?", const="default")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CrackweakError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 2
    except (OSError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": "unexpected", "type": type(exc).__name__,
                                     "message": str(exc)}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
