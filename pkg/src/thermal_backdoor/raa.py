"""Range-affecting attack: one off-object trigger edits every source-class object
within a pixel-level dependent radius of the trigger center."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .annotations import Annotation, ClassMap
from .errors import ConfigContradictionError
from .plan import GOALS, MISCLASSIFY, NORMAL, ImageRecord, PoisonPlan, _check_ids, edit_labels, partition
from .raster import GrayImage
from .triggers import BLOCK, STRIP, Stamp, TriggerSpec, apply_stamps, point_stamp

INSIDE = "inside"
OUTSIDE = "outside"

# temperature-modulated setting: cold, mid and hot trigger levels
REFERENCE_RADIUS_TABLE = {0: 80.0, 128: 120.0, 255: 160.0}
REFERENCE_CENTER = (160.0, 206.0)


@dataclass(frozen=True)
class RadiusTable:
    """Pixel level -> attack radius in pixels."""

    radii: Mapping[int, float]

    def __post_init__(self):
        clean = {}
        for p, r in dict(self.radii).items():
            p = int(p)
            if not 0 <= p <= 255:
                raise ConfigContradictionError(f"radius table key {p} outside [0, 255]")
            if p in clean:
                raise ConfigContradictionError(f"duplicate pixel level {p}")
            if not float(r) > 0:
                raise ConfigContradictionError(f"radius for pixel {p} must be positive")
            clean[p] = float(r)
        if not clean:
            raise ConfigContradictionError("radius table is empty")
        object.__setattr__(self, "radii", dict(sorted(clean.items())))

    def radius(self, pixel: int) -> float:
        try:
            return self.radii[int(pixel)]
        except KeyError:
            raise ConfigContradictionError(f"pixel level {pixel} not in radius table {sorted(self.radii)}") from None

    @property
    def max_radius(self) -> float:
        return max(self.radii.values())

    def to_list(self) -> list[dict]:
        return [{"pixel": p, "radius": r} for p, r in self.radii.items()]


@dataclass(frozen=True)
class RaaConfig:
    radius_table: RadiusTable
    pixel_ratios: tuple[tuple[int, float], ...]
    trigger: TriggerSpec = field(default_factory=lambda: TriggerSpec(shape=STRIP, center=REFERENCE_CENTER))
    goal: str = MISCLASSIFY
    test_radius: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.goal not in GOALS:
            raise ConfigContradictionError(f"unknown goal {self.goal!r}")
        if self.trigger.shape not in (STRIP, BLOCK):
            raise ConfigContradictionError("RAA triggers are strips or blocks placed at a point")
        if self.trigger.center is None:
            raise ConfigContradictionError("RAA trigger needs a center (a, b)")
        ratios = tuple((int(p), float(q)) for p, q in self.pixel_ratios)
        object.__setattr__(self, "pixel_ratios", ratios)
        if not ratios:
            raise ConfigContradictionError("at least one (pixel, ratio) pair is required")
        if len({p for p, _ in ratios}) != len(ratios):
            raise ConfigContradictionError("pixel levels in pixel_ratios must be distinct")
        for p, q in ratios:
            self.radius_table.radius(p)
            if not 0.0 <= q <= 1.0:
                raise ConfigContradictionError(f"ratio {q} for pixel {p} outside [0, 1]")
        if sum(q for _, q in ratios) > 1.0 + 1e-12:
            raise ConfigContradictionError("per-pixel ratios sum above 1")
        if self.test_radius is not None:
            if not self.test_radius > 0:
                raise ConfigContradictionError("test radius must be positive")
            if self.test_radius > self.radius_table.max_radius:
                raise ConfigContradictionError("test radius exceeds the largest training radius")

    @property
    def center(self) -> tuple[float, float]:
        return self.trigger.center


def in_attack_range(obj_center, trigger_center, r: float) -> bool:
    """Euclidean membership, boundary inclusive."""
    return bool(kernels.radius_mask(np.array([obj_center], dtype=np.float64), trigger_center[0], trigger_center[1], r)[0])


def object_centers(anns: Sequence[Annotation], width: int, height: int) -> np.ndarray:
    if not anns:
        return np.zeros((0, 2))
    return np.array([a.bbox.center_pixels(width, height) for a in anns], dtype=np.float64)


def objects_in_range(
    anns: Sequence[Annotation], width: int, height: int, center, r: float, class_id: int | None = None
) -> list[bool]:
    """Per annotation: is its box center within ``r`` of ``center`` (and of ``class_id``)."""
    mask = kernels.radius_mask(object_centers(anns, width, height), center[0], center[1], r)
    return [bool(m) and (class_id is None or a.class_id == class_id) for a, m in zip(anns, mask)]


def plan_raa(image_ids: Sequence[str], cfg: RaaConfig) -> PoisonPlan:
    """Disjoint seeded groups, one per pixel level, of size ``round(q_n * N)``."""
    ids = _check_ids(image_ids)
    groups = partition(ids, [q for _, q in cfg.pixel_ratios], cfg.seed)
    assigned = {}
    for (p, _), group in zip(cfg.pixel_ratios, groups):
        for image_id in group:
            assigned[image_id] = p
    records = [
        ImageRecord(i, NORMAL, assigned[i]) if i in assigned else ImageRecord(i) for i in ids
    ]
    params = {
        "goal": cfg.goal,
        "center": list(cfg.center),
        "shape": cfg.trigger.shape,
        "trigger_size": [cfg.trigger.height, cfg.trigger.width],
        "radius_table": cfg.radius_table.to_list(),
        "pixel_ratios": [[p, q] for p, q in cfg.pixel_ratios],
    }
    return PoisonPlan("raa", cfg.seed, records, params)


def poison_image_raa(
    img: GrayImage, anns: Sequence[Annotation], cfg: RaaConfig, pixel: int, classes: ClassMap
) -> tuple[GrayImage, list[Annotation], ImageRecord]:
    radius = cfg.radius_table.radius(pixel)
    stamp = point_stamp(cfg.trigger, img.width, img.height, int(pixel))
    anns = list(anns)
    selected = objects_in_range(anns, img.width, img.height, cfg.center, radius, classes.source_id)
    out_anns, edits = edit_labels(anns, selected, cfg.goal, classes)
    rec = ImageRecord("", NORMAL, int(pixel), [stamp], edits)
    rec.notes.append(f"radius {radius:g}: {sum(selected)} object(s) in range")
    return apply_stamps(img, [stamp]), out_anns, rec


@dataclass
class RaaTriggeredSample:
    image_id: str
    image: GrayImage
    annotations: list[Annotation]
    provenance: dict


def make_raa_testset(
    samples: Sequence[tuple[str, GrayImage, Sequence[Annotation]]],
    cfg: RaaConfig,
    classes: ClassMap,
    pixel: int,
    test_radius: float | None = None,
    variant: str = INSIDE,
) -> list[RaaTriggeredSample]:
    """Stamp the trigger into every test image, labels untouched.

    The provenance records which source-class objects fall inside / outside the
    test radius and which of the two sets is evaluated (``variant``).
    """
    if variant not in (INSIDE, OUTSIDE):
        raise ValueError(f"variant must be {INSIDE!r} or {OUTSIDE!r}")
    if not 0 <= int(pixel) <= 255:
        raise ValueError(f"pixel {pixel} outside [0, 255]")
    if test_radius is None:
        test_radius = cfg.test_radius
    if test_radius is None:
        test_radius = cfg.radius_table.radius(pixel) if int(pixel) in cfg.radius_table.radii else cfg.radius_table.max_radius
    out = []
    for image_id, img, anns in samples:
        anns = list(anns)
        stamp = point_stamp(cfg.trigger, img.width, img.height, int(pixel))
        inside = objects_in_range(anns, img.width, img.height, cfg.center, test_radius)
        src = [k for k, a in enumerate(anns) if a.class_id == classes.source_id]
        ins = [k for k in src if inside[k]]
        outs = [k for k in src if not inside[k]]
        provenance = {
            "attack": "raa",
            "image_id": image_id,
            "pixel": int(pixel),
            "center": list(cfg.center),
            "test_radius": float(test_radius),
            "stamps": [stamp.to_dict()],
            "inside": ins,
            "outside": outs,
            "range": variant,
            "eval_objects": ins if variant == INSIDE else outs,
        }
        out.append(RaaTriggeredSample(image_id, apply_stamps(img, [stamp]), anns, provenance))
    return out


def object_rects(anns: Sequence[Annotation], width: int, height: int) -> np.ndarray:
    if not anns:
        return np.zeros((0, 4))
    rects = np.array([a.bbox.to_pixels(width, height) for a in anns], dtype=np.float64)
    rects[:, [0, 2]] = np.clip(rects[:, [0, 2]], 0.0, width)
    rects[:, [1, 3]] = np.clip(rects[:, [1, 3]], 0.0, height)
    return rects


def grid_overlap_report(stamp: Stamp, anns: Sequence[Annotation], width: int, height: int, grid: int) -> list[dict]:
    """Per object: grid cells (``grid`` x ``grid`` over the image) touched by both
    the trigger and the object box."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    trig = np.array([stamp.left, stamp.top, stamp.right, stamp.bottom], dtype=np.float64)
    rects = object_rects(anns, width, height)
    shared = kernels.shared_cells(trig, rects, width, height, grid)
    own = [int(kernels.shared_cells(r, r[None, :], width, height, grid)[0]) for r in rects]
    trig_cells = int(kernels.shared_cells(trig, trig[None, :], width, height, grid)[0])
    return [
        {
            "index": k,
            "class_id": a.class_id,
            "shared_cells": int(shared[k]),
            "object_cells": own[k],
            "trigger_cells": trig_cells,
        }
        for k, a in enumerate(anns)
    ]
