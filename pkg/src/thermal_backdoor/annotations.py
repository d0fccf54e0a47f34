"""Label files (ground truth and detector output) and box geometry.

Label files use the YOLO convention, one object per line::

    class_id cx cy w h               # ground truth
    class_id cx cy w h confidence    # detector output

with coordinates normalised to the image size.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import kernels
from .errors import LabelParseError

PRECISION = 6
_MIN_SIZE = 10.0 ** -PRECISION


@dataclass(frozen=True)
class BBox:
    """Normalised center/size box."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self):
        for name in ("cx", "cy", "w", "h"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} is not finite")
        if not (0.0 <= self.cx <= 1.0 and 0.0 <= self.cy <= 1.0):
            raise ValueError(f"center ({self.cx}, {self.cy}) outside the unit square")
        if not (0.0 < self.w <= 1.0 and 0.0 < self.h <= 1.0):
            raise ValueError(f"size ({self.w}, {self.h}) must lie in (0, 1]")

    @classmethod
    def from_corners(cls, x0: float, y0: float, x1: float, y1: float) -> "BBox":
        return cls((x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0)

    def corners(self) -> tuple[float, float, float, float]:
        return (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )

    def to_pixels(self, width: int, height: int) -> tuple[float, float, float, float]:
        """``x0, y0, x1, y1`` in (fractional) pixel coordinates."""
        x0, y0, x1, y1 = self.corners()
        return x0 * width, y0 * height, x1 * width, y1 * height

    def center_pixels(self, width: int, height: int) -> tuple[float, float]:
        return self.cx * width, self.cy * height

    def clamped(self) -> "BBox":
        """Box intersected with the unit square."""
        x0, y0, x1, y1 = self.corners()
        if x0 >= 0.0 and y0 >= 0.0 and x1 <= 1.0 and y1 <= 1.0:
            return self
        x0, y0 = max(x0, 0.0), max(y0, 0.0)
        x1, y1 = min(x1, 1.0), min(y1, 1.0)
        if x1 <= x0 or y1 <= y0:
            raise ValueError("box does not intersect the unit square")
        return BBox.from_corners(x0, y0, x1, y1)

    def as_array(self) -> np.ndarray:
        return np.array([self.cx, self.cy, self.w, self.h], dtype=np.float64)


@dataclass(frozen=True)
class Annotation:
    class_id: int
    bbox: BBox

    def relabeled(self, class_id: int) -> "Annotation":
        return replace(self, class_id=class_id)


@dataclass(frozen=True)
class Detection:
    class_id: int
    bbox: BBox
    confidence: float

    def __post_init__(self):
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class ClassMap:
    """Ordered class names plus the attacked (source) and goal (target) class."""

    names: tuple[str, ...]
    source: str
    target: str

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        if len(set(self.names)) != len(self.names):
            raise ValueError("class names must be unique")
        for role, name in (("source", self.source), ("target", self.target)):
            if name not in self.names:
                raise ValueError(f"{role} class {name!r} not in {list(self.names)}")
        if self.source == self.target:
            raise ValueError("source and target class must differ")

    @property
    def source_id(self) -> int:
        return self.names.index(self.source)

    @property
    def target_id(self) -> int:
        return self.names.index(self.target)

    def id_of(self, name: str) -> int:
        return self.names.index(name)

    def __len__(self):
        return len(self.names)

    def to_dict(self) -> dict:
        return {"names": list(self.names), "source": self.source, "target": self.target}

    @classmethod
    def from_dict(cls, d: dict) -> "ClassMap":
        return cls(tuple(d["names"]), d["source"], d["target"])


def _parse_lines(text: str, classes: ClassMap, n_fields: int):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != n_fields:
            raise LabelParseError(lineno, f"expected {n_fields} fields, got {len(parts)}")
        try:
            cid = int(parts[0])
        except ValueError:
            raise LabelParseError(lineno, f"class id {parts[0]!r} is not an integer") from None
        if not 0 <= cid < len(classes):
            raise LabelParseError(lineno, f"unknown class id {cid}")
        try:
            values = [float(p) for p in parts[1:]]
        except ValueError:
            raise LabelParseError(lineno, "non-numeric field") from None
        try:
            bbox = BBox(*values[:4])
        except ValueError as exc:
            raise LabelParseError(lineno, str(exc)) from None
        yield lineno, cid, bbox, values[4:]


def parse_labels(text: str, classes: ClassMap) -> list[Annotation]:
    return [Annotation(cid, bbox) for _, cid, bbox, _ in _parse_lines(text, classes, 5)]


def parse_detections(text: str, classes: ClassMap) -> list[Detection]:
    out = []
    for lineno, cid, bbox, rest in _parse_lines(text, classes, 6):
        try:
            out.append(Detection(cid, bbox, rest[0]))
        except ValueError as exc:
            raise LabelParseError(lineno, str(exc)) from None
    return out


def _fmt(v: float) -> str:
    return f"{v:.{PRECISION}f}"


def _emit_box(bbox: BBox) -> str:
    b = bbox.clamped()
    w = max(round(b.w, PRECISION), _MIN_SIZE)
    h = max(round(b.h, PRECISION), _MIN_SIZE)
    return f"{_fmt(b.cx)} {_fmt(b.cy)} {_fmt(w)} {_fmt(h)}"


def emit_labels(anns: Sequence[Annotation]) -> str:
    """Serialise annotations with fixed 6-digit precision, one per line."""
    return "".join(f"{a.class_id} {_emit_box(a.bbox)}\n" for a in anns)


def emit_detections(dets: Sequence[Detection]) -> str:
    return "".join(f"{d.class_id} {_emit_box(d.bbox)} {_fmt(d.confidence)}\n" for d in dets)


def iou(a: BBox, b: BBox) -> float:
    return float(kernels.iou_matrix(a.as_array(), b.as_array())[0, 0])


def boxes_array(items) -> np.ndarray:
    """Stack the boxes of annotations or detections into an (N, 4) array."""
    if not items:
        return np.zeros((0, 4), dtype=np.float64)
    return np.stack([it.bbox.as_array() for it in items])
