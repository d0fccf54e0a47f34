"""Attack and accuracy metrics computed from ground truth and detector outputs.

* trigger addition succeeds when the backdoored model still finds the
  source-class object on the clean image (IoU >= threshold, same class);
* an attack succeeds when, on the triggered image, the object is detected as
  the target class (misclassify) or no longer detected as the source class
  (disappear);
* ASR = 100 * successes / successful trigger additions;
* BAF = backdoor-model mAP - clean-model mAP, both on clean images.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .annotations import Annotation, BBox, ClassMap, Detection, boxes_array, iou
from .dataset import Dataset, dump_json, load_detections
from .plan import DISAPPEAR, GOALS, MISCLASSIFY

log = logging.getLogger(__name__)

DEFAULT_IOU = 0.5


@dataclass(frozen=True)
class EvalConfig:
    iou_threshold: float = DEFAULT_IOU
    source_class: int = 1
    target_class: int = 0
    goal: str = MISCLASSIFY
    map_classes: tuple[int, ...] | None = None

    def __post_init__(self):
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError(f"IoU threshold must lie in (0, 1), got {self.iou_threshold}")
        if self.goal not in GOALS:
            raise ValueError(f"unknown goal {self.goal!r}")
        if self.source_class == self.target_class:
            raise ValueError("source and target class must differ")

    @classmethod
    def for_classes(cls, classes: ClassMap, **kw) -> "EvalConfig":
        return cls(source_class=classes.source_id, target_class=classes.target_id, **kw)


def match_detections(gts: Sequence[Annotation], dets: Sequence[Detection], iou_thr: float) -> list[tuple[int, int]]:
    """Greedy one-to-one matching, class agnostic.

    Detections are visited by confidence (desc), then best IoU (desc), then
    input order; each takes the unmatched ground truth with the highest IoU
    >= ``iou_thr`` (lowest index on ties). Returns ``(det_index, gt_index)``
    pairs sorted by detection index.
    """
    if not gts or not dets:
        return []
    ious = kernels.iou_matrix(boxes_array(gts), boxes_array(dets))
    conf = np.array([d.confidence for d in dets], dtype=np.float64)
    det_to_gt = kernels.greedy_match(ious, conf, iou_thr)
    return [(d, int(g)) for d, g in enumerate(det_to_gt) if g >= 0]


def _any_match(gt: BBox, dets: Sequence[Detection], class_id: int, thr: float) -> bool:
    return any(d.class_id == class_id and iou(gt, d.bbox) >= thr for d in dets)


def trigger_addition_success(gt: Annotation, clean_dets: Sequence[Detection], cfg: EvalConfig) -> bool:
    """Backdoored model on the clean image recognises the source-class object."""
    return _any_match(gt.bbox, clean_dets, cfg.source_class, cfg.iou_threshold)


def attack_success(gt: Annotation, dirty_dets: Sequence[Detection], cfg: EvalConfig) -> bool:
    if cfg.goal == MISCLASSIFY:
        return _any_match(gt.bbox, dirty_dets, cfg.target_class, cfg.iou_threshold)
    return not _any_match(gt.bbox, dirty_dets, cfg.source_class, cfg.iou_threshold)


def average_precision(
    gts_per_image: Sequence[Sequence[Annotation]],
    dets_per_image: Sequence[Sequence[Detection]],
    class_id: int,
    iou_thr: float,
) -> float | None:
    """All-point interpolated AP (percent) for one class; ``None`` if the class has no ground truth."""
    n_gt = 0
    scored = []  # (-confidence, image, det index, is_tp)
    for img_idx, (gts, dets) in enumerate(zip(gts_per_image, dets_per_image)):
        g = [a for a in gts if a.class_id == class_id]
        d = [x for x in dets if x.class_id == class_id]
        n_gt += len(g)
        matched = {di for di, _ in match_detections(g, d, iou_thr)}
        for di, det in enumerate(d):
            scored.append((-det.confidence, img_idx, di, di in matched))
    if n_gt == 0:
        return None
    scored.sort(key=lambda s: s[:3])
    tp = np.array([s[3] for s in scored], dtype=bool)
    return 100.0 * kernels.all_point_ap(tp, n_gt)


def mean_ap(per_class: Mapping[int, float | None], classes: Sequence[int] | None = None) -> float | None:
    keys = per_class.keys() if classes is None else classes
    vals = [per_class[c] for c in keys if per_class.get(c) is not None]
    return float(np.mean(vals)) if vals else None


def compute_baf(map_backdoor_clean: float, map_clean_clean: float) -> float:
    """Signed difference in percentage points; positive means the backdoored model is better."""
    return round(map_backdoor_clean - map_clean_clean, 10)


@dataclass
class EvalReport:
    n_source_objects: int
    n_ta: int
    n_sa: int
    asr: float | None
    ap_clean_model: dict[int, float | None]
    ap_backdoor_model: dict[int, float | None]
    map_clean_model: float | None
    map_backdoor_model: float | None
    baf: dict[int, float | None]
    class_names: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        def named(d):
            return {self.class_names[k] if k < len(self.class_names) else str(k): v for k, v in d.items()}

        return {
            "n_source_objects": self.n_source_objects,
            "n_ta": self.n_ta,
            "n_sa": self.n_sa,
            "asr": self.asr if self.asr is not None else "undefined",
            "ap_clean_model": named(self.ap_clean_model),
            "ap_backdoor_model": named(self.ap_backdoor_model),
            "map_clean_model": self.map_clean_model,
            "map_backdoor_model": self.map_backdoor_model,
            "baf": named(self.baf),
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return dump_json(self.to_dict())

    def table(self) -> str:
        def pct(v):
            return "n/a" if v is None else f"{v:.2f}"

        lines = [
            f"source objects      : {self.n_source_objects}",
            f"trigger additions   : {self.n_ta}",
            f"successful attacks  : {self.n_sa}",
            f"ASR (%)             : {'undefined (no trigger addition succeeded)' if self.asr is None else f'{self.asr:.2f}'}",
            "",
            f"{'class':<12}{'AP clean':>10}{'AP backdoor':>13}{'BAF':>8}",
        ]
        for k in sorted(set(self.ap_clean_model) | set(self.ap_backdoor_model)):
            name = self.class_names[k] if k < len(self.class_names) else str(k)
            lines.append(
                f"{name:<12}{pct(self.ap_clean_model.get(k)):>10}"
                f"{pct(self.ap_backdoor_model.get(k)):>13}{pct(self.baf.get(k)):>8}"
            )
        lines.append(f"{'mAP':<12}{pct(self.map_clean_model):>10}{pct(self.map_backdoor_model):>13}")
        return "\n".join(lines)


def evaluate(
    gts: Sequence[Sequence[Annotation]],
    clean_model_clean: Sequence[Sequence[Detection]],
    backdoor_clean: Sequence[Sequence[Detection]],
    backdoor_triggered: Sequence[Sequence[Detection]],
    cfg: EvalConfig,
    classes: Sequence[int],
    eval_objects: Sequence[Sequence[int] | None] | None = None,
    class_names: Sequence[str] = (),
) -> EvalReport:
    """In-memory evaluation over aligned per-image lists.

    ``eval_objects`` optionally restricts, per image, which annotation indices
    count towards ASR (used for in-range / out-of-range RAA tests).
    """
    n_src = n_ta = n_sa = 0
    for i, anns in enumerate(gts):
        allowed = None if eval_objects is None else eval_objects[i]
        for k, ann in enumerate(anns):
            if ann.class_id != cfg.source_class:
                continue
            if allowed is not None and k not in allowed:
                continue
            n_src += 1
            if not trigger_addition_success(ann, backdoor_clean[i], cfg):
                continue
            n_ta += 1
            if attack_success(ann, backdoor_triggered[i], cfg):
                n_sa += 1
    asr = 100.0 * n_sa / n_ta if n_ta else None
    ap_clean = {c: average_precision(gts, clean_model_clean, c, cfg.iou_threshold) for c in classes}
    ap_bd = {c: average_precision(gts, backdoor_clean, c, cfg.iou_threshold) for c in classes}
    baf = {
        c: (compute_baf(ap_bd[c], ap_clean[c]) if ap_bd[c] is not None and ap_clean[c] is not None else None)
        for c in classes
    }
    return EvalReport(
        n_src, n_ta, n_sa, asr, ap_clean, ap_bd, mean_ap(ap_clean), mean_ap(ap_bd), baf, list(class_names)
    )


def evaluate_run(
    gt_root,
    clean_model_clean_dir,
    backdoor_clean_dir,
    backdoor_triggered_dir,
    cfg: EvalConfig,
    split: str = "test",
    sidecar_dir=None,
) -> EvalReport:
    """Evaluate detector outputs stored as ``<stem>.txt`` files against a dataset split."""
    ds = Dataset(gt_root)
    classes = ds.classes
    stems = ds.stems(split)
    warnings: list[str] = []
    gts = [ds.load_labels(s) for s in stems]
    cc = [load_detections(clean_model_clean_dir, s, classes, warnings) for s in stems]
    bc = [load_detections(backdoor_clean_dir, s, classes, warnings) for s in stems]
    bt = [load_detections(backdoor_triggered_dir, s, classes, warnings) for s in stems]
    eval_objects = None
    if sidecar_dir is not None:
        eval_objects = []
        for s in stems:
            path = Path(sidecar_dir) / f"{s}.json"
            if path.is_file():
                eval_objects.append(json.loads(path.read_text()).get("eval_objects"))
            else:
                warnings.append(f"missing trigger sidecar {path}")
                eval_objects.append(None)
    map_classes = cfg.map_classes if cfg.map_classes is not None else tuple(range(len(classes)))
    report = evaluate(gts, cc, bc, bt, cfg, map_classes, eval_objects, classes.names)
    report.warnings.extend(warnings)
    return report


__all__ = [
    "DISAPPEAR",
    "EvalConfig",
    "EvalReport",
    "MISCLASSIFY",
    "attack_success",
    "average_precision",
    "compute_baf",
    "evaluate",
    "evaluate_run",
    "match_detections",
    "mean_ap",
    "trigger_addition_success",
]
