"""Object-affecting attack: a trigger on every source-class object of a poisoned image."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .annotations import Annotation, ClassMap
from .errors import ConfigContradictionError, DegenerateBoxError
from .plan import (
    ADVERSARIAL,
    CLEAN,
    GOALS,
    KEPT,
    MISCLASSIFY,
    NORMAL,
    ImageRecord,
    PoisonPlan,
    edit_labels,
    select_poison_subset,
)
from .raster import GrayImage
from .thermal import ThermalMap
from .triggers import (
    BBOX_BLOCK,
    Stamp,
    TriggerSpec,
    apply_stamps,
    bbox_scaled_stamp,
    bbox_stamp_side,
    centered_rect,
    resolve_intensity,
)


@dataclass(frozen=True)
class OaaConfig:
    """OAA parameters.

    ``trigger`` without an intensity means each normal-poison image draws its
    pixel level uniformly from ``active_pixel_range``. Adversarial images draw
    from ``adversarial_pixels`` or, when unset, from the complement of the range.
    """

    goal: str = MISCLASSIFY
    q: float = 0.2
    trigger: TriggerSpec = field(default_factory=lambda: TriggerSpec(pixel=192))
    active_pixel_range: tuple[int, int] = (0, 255)
    adversarial_ratio: float = 0.0
    adversarial_pixels: tuple[int, ...] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.goal not in GOALS:
            raise ConfigContradictionError(f"unknown goal {self.goal!r}")
        if self.trigger.shape != BBOX_BLOCK:
            raise ConfigContradictionError("OAA triggers are scaled to the object box (shape 'bbox_block')")
        p1, p2 = self.active_pixel_range
        if not 0 <= p1 <= p2 <= 255:
            raise ConfigContradictionError(f"active pixel range {self.active_pixel_range} invalid")
        if not 0.0 < self.q <= 1.0:
            raise ConfigContradictionError(f"q must lie in (0, 1], got {self.q}")
        if not 0.0 <= self.adversarial_ratio < 1.0:
            raise ConfigContradictionError("adversarial ratio must lie in [0, 1)")
        if self.q + self.adversarial_ratio > 1.0 + 1e-12:
            raise ConfigContradictionError("q + adversarial_ratio exceeds 1")
        if self.adversarial_ratio > 0 and not self.adversarial_candidates():
            raise ConfigContradictionError("no pixel level outside the active range for adversarial triggers")
        for p in self.adversarial_pixels or ():
            if self.in_range(p):
                raise ConfigContradictionError(f"adversarial pixel {p} lies inside the active range")

    def in_range(self, p: int) -> bool:
        return self.active_pixel_range[0] <= p <= self.active_pixel_range[1]

    def adversarial_candidates(self) -> list[int]:
        if self.adversarial_pixels is not None:
            return sorted(int(p) for p in self.adversarial_pixels)
        return [p for p in range(256) if not self.in_range(p)]

    def normal_pixel(self, tmap: ThermalMap | None = None) -> int | None:
        """Fixed intensity of normal triggers, checked against the active range."""
        if not self.trigger.has_intensity:
            return None
        p = resolve_intensity(self.trigger, tmap)
        if not self.in_range(p):
            raise ConfigContradictionError(
                f"normal trigger intensity {p} outside active range {list(self.active_pixel_range)}"
            )
        return p


def plan_oaa(image_ids: Sequence[str], cfg: OaaConfig, tmap: ThermalMap | None = None) -> PoisonPlan:
    """Role assignment plus the pixel level of every poisoned image."""
    fixed = cfg.normal_pixel(tmap)
    plan = select_poison_subset(image_ids, cfg.q, cfg.adversarial_ratio, cfg.seed)
    rng = np.random.default_rng([cfg.seed, 1])
    p1, p2 = cfg.active_pixel_range
    candidates = cfg.adversarial_candidates()
    for rec in plan.records:
        if rec.role == NORMAL:
            rec.pixel = fixed if fixed is not None else int(rng.integers(p1, p2 + 1))
        elif rec.role == ADVERSARIAL:
            rec.pixel = int(candidates[int(rng.integers(len(candidates)))])
    plan.params = {
        "goal": cfg.goal,
        "q": cfg.q,
        "adversarial_ratio": cfg.adversarial_ratio,
        "active_pixel_range": list(cfg.active_pixel_range),
        "area_fraction": cfg.trigger.area_fraction,
        "offset": list(cfg.trigger.offset),
    }
    return plan


def object_stamps(
    img: GrayImage, anns: Sequence[Annotation], source_id: int, spec: TriggerSpec, pixel: int
) -> tuple[list[Stamp], list[str]]:
    """One box-scaled stamp per source-class object, with notes for tiny boxes."""
    stamps, notes = [], []
    for k, ann in enumerate(anns):
        if ann.class_id != source_id:
            continue
        try:
            side = bbox_stamp_side(ann.bbox, img.width, img.height, spec.area_fraction)
        except DegenerateBoxError:
            side = 0
        if side == 0:
            x, y = ann.bbox.center_pixels(img.width, img.height)
            stamp = centered_rect(x, y, 1, 1, img.width, img.height, pixel)
            notes.append(f"object {k}: trigger rounds to zero area, 1x1 stamp")
        else:
            stamp = bbox_scaled_stamp(ann.bbox, img.width, img.height, spec.area_fraction, pixel, spec.offset)
        stamps.append(stamp)
    return stamps, notes


def poison_image_oaa(
    img: GrayImage,
    anns: Sequence[Annotation],
    cfg: OaaConfig,
    role: str,
    classes: ClassMap,
    pixel: int | None = None,
    tmap: ThermalMap | None = None,
) -> tuple[GrayImage, list[Annotation], ImageRecord]:
    """Stamp every source-class object; edit labels for normal role only."""
    if pixel is None:
        pixel = cfg.normal_pixel(tmap) if role == NORMAL else None
        if pixel is None:
            raise ConfigContradictionError(f"no pixel level given for {role} image")
    if role == NORMAL and not cfg.in_range(pixel):
        raise ConfigContradictionError(f"normal-role intensity {pixel} outside the active range")
    if role == ADVERSARIAL and cfg.in_range(pixel):
        raise ConfigContradictionError(f"adversarial-role intensity {pixel} inside the active range")
    if role not in (NORMAL, ADVERSARIAL):
        raise ValueError(f"cannot poison an image with role {role!r}")

    anns = list(anns)
    rec = ImageRecord("", role, int(pixel))
    stamps, notes = object_stamps(img, anns, classes.source_id, cfg.trigger, int(pixel))
    rec.stamps, rec.notes = stamps, notes
    if not stamps:
        rec.notes.append("no source-class objects; unchanged")
        rec.label_edits = [KEPT] * len(anns)
        return img, anns, rec
    if role == NORMAL:
        selected = [a.class_id == classes.source_id for a in anns]
        out_anns, rec.label_edits = edit_labels(anns, selected, cfg.goal, classes)
    else:
        out_anns, rec.label_edits = anns, [KEPT] * len(anns)
    return apply_stamps(img, stamps), out_anns, rec


@dataclass
class TriggeredSample:
    image_id: str
    image: GrayImage
    annotations: list[Annotation]
    provenance: dict


def make_triggered_testset(
    samples: Sequence[tuple[str, GrayImage, Sequence[Annotation]]],
    cfg: OaaConfig,
    classes: ClassMap,
    tmap: ThermalMap | None = None,
    intensity_override: int | None = None,
) -> list[TriggeredSample]:
    """Stamp every source-class object of every test image; labels stay truthful."""
    if intensity_override is not None:
        pixel = int(intensity_override)
        if not 0 <= pixel <= 255:
            raise ValueError(f"override intensity {pixel} outside [0, 255]")
    else:
        pixel = cfg.normal_pixel(tmap)
        if pixel is None:
            raise ConfigContradictionError("test-set generation needs a fixed trigger intensity or an override")
    out = []
    for image_id, img, anns in samples:
        anns = list(anns)
        stamps, notes = object_stamps(img, anns, classes.source_id, cfg.trigger, pixel)
        provenance = {
            "attack": "oaa",
            "image_id": image_id,
            "pixel": pixel,
            "in_active_range": cfg.in_range(pixel),
            "stamps": [s.to_dict() for s in stamps],
            "source_objects": [k for k, a in enumerate(anns) if a.class_id == classes.source_id],
            "notes": notes,
        }
        out.append(TriggeredSample(image_id, apply_stamps(img, stamps), anns, provenance))
    return out


__all__ = [
    "ADVERSARIAL",
    "CLEAN",
    "NORMAL",
    "OaaConfig",
    "TriggeredSample",
    "make_triggered_testset",
    "object_stamps",
    "plan_oaa",
    "poison_image_oaa",
]
