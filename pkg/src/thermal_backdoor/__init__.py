"""Backdoor poisoning and evaluation toolkit for thermal-infrared object detection."""

__version__ = "0.1.0"

from .annotations import Annotation, BBox, ClassMap, Detection, emit_labels, iou, parse_detections, parse_labels
from .metrics import EvalConfig, EvalReport, average_precision, compute_baf, evaluate_run, match_detections
from .oaa import OaaConfig, make_triggered_testset, plan_oaa, poison_image_oaa
from .plan import PoisonPlan, select_poison_subset
from .raa import RaaConfig, RadiusTable, grid_overlap_report, in_attack_range, plan_raa, poison_image_raa
from .raster import GrayImage, read_pgm, write_pgm
from .thermal import CalibrationSample, ThermalMap, fit, pixel_to_temp, temp_to_pixel
from .triggers import Stamp, TriggerSpec, apply_stamps, bbox_scaled_stamp, resolve_intensity

__all__ = [
    "Annotation",
    "BBox",
    "CalibrationSample",
    "ClassMap",
    "Detection",
    "EvalConfig",
    "EvalReport",
    "GrayImage",
    "OaaConfig",
    "PoisonPlan",
    "RaaConfig",
    "RadiusTable",
    "Stamp",
    "ThermalMap",
    "TriggerSpec",
    "apply_stamps",
    "average_precision",
    "bbox_scaled_stamp",
    "compute_baf",
    "emit_labels",
    "evaluate_run",
    "fit",
    "grid_overlap_report",
    "in_attack_range",
    "iou",
    "make_triggered_testset",
    "match_detections",
    "parse_detections",
    "parse_labels",
    "pixel_to_temp",
    "plan_oaa",
    "plan_raa",
    "poison_image_oaa",
    "poison_image_raa",
    "read_pgm",
    "resolve_intensity",
    "select_poison_subset",
    "temp_to_pixel",
    "write_pgm",
]
