"""
Dataset manifests and train/test splits.

Directory convention::

    root/
      images/<id>.<ext>        input photographs (png, jpg, ...)
      annotations/<id>.png     precise crack masks, white = crack

A split file is plain text listing test ids separated by newlines, commas or
spaces, so published split listings can be pasted in as-is. Every id not
named there is train. A JSON manifest with explicit paths is also accepted.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass
from pathlib import Path

from PIL import Image

from .errors import (
    DimensionMismatchError,
    DuplicateStemError,
    ManifestError,
    MissingAnnotationError,
    MissingFileError,
    SplitFileError,
    UnknownSplitIdError,
)
from .raster import IMAGE_SUFFIXES

__all__ = [
    "ManifestEntry",
    "DatasetManifest",
    "load_manifest",
    "read_split_file",
    "read_manifest_json",
    "open_dataset",
]

SPLITS = ("train", "test")


@dataclass(frozen=True)
class ManifestEntry:
    image_id: str
    image_path: Path
    annotation_path: Path
    split: str


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            if e.image_id in seen:
                raise DuplicateStemError(f"duplicate image id {e.image_id!r}")
            if e.split not in SPLITS:
                raise ManifestError(f"{e.image_id}: unknown split {e.split!r}")
            seen.add(e.image_id)

    def split(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    @property
    def train(self) -> list[ManifestEntry]:
        return self.split("train")

    @property
    def test(self) -> list[ManifestEntry]:
        return self.split("test")

    def to_json(self, base: Path | None = None) -> str:
        rows = []
        for e in self.entries:
            row = asdict(e)
            for key in ("image_path", "annotation_path"):
                p = Path(row[key])
                row[key] = str(p.relative_to(base)) if base is not None and p.is_relative_to(base) else str(p)
            rows.append(row)
        return json.dumps({"entries": rows}, indent=2) + "\n"


def _index_dir(directory: Path) -> dict[str, Path]:
    found: dict[str, Path] = {}
    for p in sorted(directory.iterdir()):
        if not p.is_file() or p.suffix.lower() not in IMAGE_SUFFIXES:
            continue
        if p.stem in found:
            raise DuplicateStemError(f"stem {p.stem!r} appears twice: {found[p.stem].name}, {p.name}")
        found[p.stem] = p
    return found


def read_split_file(path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SplitFileError(f"cannot read split file {path}: {exc}") from exc
    ids = []
    for tok in re.split(r"[,\s]+", text):
        tok = tok.strip().rstrip(".")
        if tok:
            ids.append(tok)
    return ids


def _resolve_split_ids(ids: list[str], stems: list[str]) -> set[str]:
    """Map split-file ids to stems: exact match, else a unique ``*_<id>`` suffix."""
    stem_set = set(stems)
    resolved, unknown = set(), []
    for i in ids:
        if i in stem_set:
            resolved.add(i)
            continue
        hits = [s for s in stems if s.endswith("_" + i)]
        if len(hits) == 1:
            resolved.add(hits[0])
        else:
            unknown.append(i)
    if unknown:
        raise UnknownSplitIdError(unknown)
    return resolved


def _check_dims(entry: ManifestEntry) -> None:
    sizes = []
    for p in (entry.image_path, entry.annotation_path):
        if not p.is_file():
            raise MissingFileError(f"{entry.image_id}: no such file {p}")
        with Image.open(p) as im:
            sizes.append(im.size)
    if sizes[0] != sizes[1]:
        raise DimensionMismatchError(
            f"{entry.image_id}: image is {sizes[0]}, annotation is {sizes[1]}"
        )


def load_manifest(
    root,
    split_file=None,
    images_dir: str = "images",
    annotations_dir: str = "annotations",
    check_dims: bool = True,
) -> DatasetManifest:
    """Build a manifest from the directory convention; ids in ``split_file`` are test."""
    root = Path(root)
    img_dir, ann_dir = root / images_dir, root / annotations_dir
    for d in (img_dir, ann_dir):
        if not d.is_dir():
            raise ManifestError(f"missing directory {d}")
    images = _index_dir(img_dir)
    annotations = _index_dir(ann_dir)

    missing = sorted(set(images) - set(annotations))
    if missing:
        raise MissingAnnotationError("no annotation for: " + ", ".join(missing))

    test_ids: set[str] = set()
    if split_file is not None:
        test_ids = _resolve_split_ids(read_split_file(split_file), sorted(images))

    entries = tuple(
        ManifestEntry(stem, images[stem], annotations[stem], "test" if stem in test_ids else "train")
        for stem in sorted(images)
    )
    if check_dims:
        for e in entries:
            _check_dims(e)
    return DatasetManifest(entries)


def read_manifest_json(path, check_dims: bool = True) -> DatasetManifest:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        rows = data["entries"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}") from exc
    base = path.parent
    entries = []
    for row in rows:
        try:
            entries.append(ManifestEntry(
                str(row["image_id"]),
                base / row["image_path"],
                base / row["annotation_path"],
                row.get("split", "train"),
            ))
        except (KeyError, TypeError) as exc:
            raise ManifestError(f"bad manifest row {row!r}") from exc
    manifest = DatasetManifest(tuple(entries))
    if check_dims:
        for e in manifest.entries:
            _check_dims(e)
    return manifest


def open_dataset(location, split_file=None) -> DatasetManifest:
    """A JSON manifest file or a dataset root directory."""
    location = Path(location)
    if location.is_file():
        if split_file is not None:
            raise ManifestError("split files apply to directory datasets only")
        return read_manifest_json(location)
    return load_manifest(location, split_file)
