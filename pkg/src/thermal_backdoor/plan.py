"""Seeded poison plans: which images are poisoned, how, and with what label edits."""
from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

import numpy as np

from .annotations import Annotation, ClassMap
from .errors import PlanError
from .triggers import Stamp

NORMAL = "normal-poison"
ADVERSARIAL = "adversarial-poison"
CLEAN = "clean"
ROLES = (NORMAL, ADVERSARIAL, CLEAN)

MISCLASSIFY = "misclassify"
DISAPPEAR = "disappear"
GOALS = (MISCLASSIFY, DISAPPEAR)

KEPT = "kept"
RELABELED = "relabeled"
DELETED = "deleted"


def count_for(fraction: float, n: int) -> int:
    """``round(fraction * n)`` with half-up rounding on the decimal value of ``fraction``."""
    return int((Decimal(repr(float(fraction))) * n).to_integral_value(rounding=ROUND_HALF_UP))


@dataclass
class ImageRecord:
    image_id: str
    role: str = CLEAN
    pixel: int | None = None
    stamps: list[Stamp] = field(default_factory=list)
    label_edits: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "image_id": self.image_id,
            "role": self.role,
            "pixel": self.pixel,
            "stamps": [s.to_dict() for s in self.stamps],
            "label_edits": list(self.label_edits),
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ImageRecord":
        return cls(
            d["image_id"],
            d["role"],
            d.get("pixel"),
            [Stamp.from_dict(s) for s in d.get("stamps", [])],
            list(d.get("label_edits", [])),
            list(d.get("notes", [])),
        )


@dataclass
class PoisonPlan:
    attack: str
    seed: int
    records: list[ImageRecord]
    params: dict = field(default_factory=dict)

    def by_role(self, role: str) -> list[ImageRecord]:
        return [r for r in self.records if r.role == role]

    def record(self, image_id: str) -> ImageRecord:
        for r in self.records:
            if r.image_id == image_id:
                return r
        raise KeyError(image_id)

    def counts(self) -> dict[str, int]:
        return {role: len(self.by_role(role)) for role in ROLES}

    def to_dict(self) -> dict:
        return {
            "attack": self.attack,
            "seed": self.seed,
            "params": self.params,
            "counts": self.counts(),
            "records": [r.to_dict() for r in self.records],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoisonPlan":
        return cls(d["attack"], d["seed"], [ImageRecord.from_dict(r) for r in d["records"]], d.get("params", {}))


def _check_ids(image_ids: Sequence[str]) -> list[str]:
    ids = list(image_ids)
    if not ids:
        raise PlanError("no images to plan over")
    if len(set(ids)) != len(ids):
        raise PlanError("image ids must be unique")
    return ids


def partition(image_ids: Sequence[str], fractions: Sequence[float], seed: int) -> list[list[str]]:
    """Disjoint, seeded groups of sizes ``round(f * N)``; each group keeps input order."""
    ids = _check_ids(image_ids)
    n = len(ids)
    if any(f < 0 for f in fractions):
        raise PlanError("fractions must be non-negative")
    sizes = [count_for(f, n) for f in fractions]
    if sum(sizes) > n:
        raise PlanError(f"requested {sum(sizes)} images but only {n} available")
    perm = np.random.default_rng(seed).permutation(n)
    groups, start = [], 0
    for size in sizes:
        groups.append(sorted(perm[start : start + size].tolist()))
        start += size
    return [[ids[i] for i in g] for g in groups]


def select_poison_subset(image_ids: Sequence[str], q: float, adversarial_ratio: float, seed: int) -> PoisonPlan:
    """Plan skeleton assigning each image a role; counts are ``round(q*N)`` and ``round(adv*N)``."""
    if not 0.0 < q <= 1.0:
        raise PlanError(f"q must lie in (0, 1], got {q}")
    if not 0.0 <= adversarial_ratio < 1.0:
        raise PlanError(f"adversarial ratio must lie in [0, 1), got {adversarial_ratio}")
    ids = _check_ids(image_ids)
    normal, adversarial = partition(ids, [q, adversarial_ratio], seed)
    roles = {i: NORMAL for i in normal}
    roles.update({i: ADVERSARIAL for i in adversarial})
    return PoisonPlan("oaa", seed, [ImageRecord(i, roles.get(i, CLEAN)) for i in ids])


def edit_labels(anns: Sequence[Annotation], selected: Sequence[bool], goal: str, classes: ClassMap):
    """Relabel (misclassify) or drop (disappear) the selected annotations."""
    if goal not in GOALS:
        raise ValueError(f"unknown goal {goal!r}")
    out, edits = [], []
    for ann, sel in zip(anns, selected):
        if not sel:
            out.append(ann)
            edits.append(KEPT)
        elif goal == MISCLASSIFY:
            out.append(ann.relabeled(classes.target_id))
            edits.append(RELABELED)
        else:
            edits.append(DELETED)
    return out, edits
