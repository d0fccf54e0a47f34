"""On-disk dataset layout.

A dataset root holds ``images/<stem>.pgm``, ``labels/<stem>.txt`` and a
``manifest.json``::

    {"classes": {"names": [...], "source": "car", "target": "person"},
     "splits": {"train": [stems...], "test": [stems...]}}

Detector outputs are flat directories of ``<stem>.txt`` detection files.
"""
from __future__ import annotations

import json
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .annotations import ClassMap, Detection, parse_detections, parse_labels
from .errors import DatasetError
from .raster import GrayImage, load_pgm

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
IMAGES = "images"
LABELS = "labels"
TRIGGERS = "triggers"
IMAGE_EXT = ".pgm"
LABEL_EXT = ".txt"


def dump_json(obj) -> str:
    """Deterministic JSON text used for every file the toolkit writes."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass
class Manifest:
    classes: ClassMap
    splits: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"classes": self.classes.to_dict(), "splits": {k: list(v) for k, v in self.splits.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> "Manifest":
        try:
            return cls(ClassMap.from_dict(d["classes"]), {k: list(v) for k, v in d.get("splits", {}).items()})
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"invalid manifest: {exc}") from exc


class Dataset:
    """Read access to a dataset root."""

    def __init__(self, root, manifest: Manifest | None = None):
        self.root = Path(root)
        if manifest is None:
            path = self.root / MANIFEST
            if not path.is_file():
                raise DatasetError(f"no {MANIFEST} in {self.root}")
            manifest = Manifest.from_dict(json.loads(path.read_text()))
        self.manifest = manifest

    @property
    def classes(self) -> ClassMap:
        return self.manifest.classes

    def stems(self, split: str) -> list[str]:
        try:
            return list(self.manifest.splits[split])
        except KeyError:
            raise DatasetError(f"split {split!r} not in manifest") from None

    def image_path(self, stem: str) -> Path:
        return self.root / IMAGES / f"{stem}{IMAGE_EXT}"

    def label_path(self, stem: str) -> Path:
        return self.root / LABELS / f"{stem}{LABEL_EXT}"

    def load_image(self, stem: str) -> GrayImage:
        return load_pgm(self.image_path(stem))

    def load_labels(self, stem: str):
        path = self.label_path(stem)
        if not path.exists():
            return []
        return parse_labels(path.read_text(), self.classes)


def write_manifest(root, manifest: Manifest) -> None:
    Path(root).mkdir(parents=True, exist_ok=True)
    (Path(root) / MANIFEST).write_text(dump_json(manifest.to_dict()))


def prepare_output(root) -> Path:
    root = Path(root)
    for sub in (IMAGES, LABELS):
        (root / sub).mkdir(parents=True, exist_ok=True)
    return root


def copy_file(src: Path, dst: Path) -> None:
    """Byte-identical copy (no metadata, so reruns compare equal)."""
    shutil.copyfile(src, dst)


def load_detections(directory, stem: str, classes: ClassMap, warnings: list | None = None) -> list[Detection]:
    """Detections for ``stem``; a missing file counts as no detections."""
    path = Path(directory) / f"{stem}{LABEL_EXT}"
    if not path.is_file():
        msg = f"missing detection file {path}"
        log.warning(msg)
        if warnings is not None:
            warnings.append(msg)
        return []
    return parse_detections(path.read_text(), classes)
