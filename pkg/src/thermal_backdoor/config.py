"""JSON run configuration.

Relative paths are resolved against the directory holding the config file.
Intensities may be given as ``{"pixel": p}`` or ``{"temperature": t}``; the
latter go through the configured thermal map. See README.md for the schema.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .annotations import ClassMap
from .dataset import Dataset
from .errors import ConfigError, ThermalBackdoorError
from .metrics import DEFAULT_IOU, EvalConfig
from .oaa import OaaConfig
from .raa import RaaConfig, RadiusTable
from .thermal import ThermalMap, fit, load_calibration_csv, resolve_temperature
from .triggers import BBOX_BLOCK, STRIP, TriggerSpec

OAA = "oaa"
RAA = "raa"


@dataclass
class RunConfig:
    path: Path
    dataset: Path
    classes: ClassMap
    thermal_map: ThermalMap | None
    mode: str
    oaa: OaaConfig | None
    raa: RaaConfig | None
    eval: EvalConfig
    seed: int
    output: Path
    testset_output: Path
    train_split: str = "train"
    test_split: str = "test"
    workers: int = 1
    oaa_test_out_pixel: int | None = None
    raa_test_pixel: int | None = None

    @property
    def goal(self) -> str:
        return self.oaa.goal if self.mode == OAA else self.raa.goal


def _intensity(spec, tmap: ThermalMap | None, where: str) -> int:
    """``{"pixel": p}``, ``{"temperature": t}`` or a bare integer -> pixel level."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        spec = {"pixel": spec}
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an intensity object, got {spec!r}")
    if "pixel" in spec and "temperature" in spec:
        raise ConfigError(f"{where}: give pixel or temperature, not both")
    if "pixel" in spec:
        p = spec["pixel"]
        if not isinstance(p, int) or not 0 <= p <= 255:
            raise ConfigError(f"{where}: pixel must be an integer in [0, 255]")
        return p
    if "temperature" in spec:
        if tmap is None:
            raise ConfigError(f"{where}: temperature given but no thermal_map configured")
        return resolve_temperature(tmap, float(spec["temperature"]))
    raise ConfigError(f"{where}: missing pixel or temperature")


def _thermal_map(raw, base: Path) -> ThermalMap | None:
    if raw is None:
        return None
    if raw == "reference":
        return ThermalMap.reference()
    if not isinstance(raw, dict):
        raise ConfigError("thermal_map must be an object or \"reference\"")
    m = float(raw.get("exponent_m", 4.0))
    if "calibration_csv" in raw:
        path = _path(raw["calibration_csv"], base, must_exist=True)
        return fit(load_calibration_csv(path), m)
    try:
        return ThermalMap.from_dict(raw)
    except KeyError as exc:
        raise ConfigError(f"thermal_map missing {exc}") from None


def _path(value, base: Path, must_exist: bool = False) -> Path:
    p = Path(value)
    if not p.is_absolute():
        p = base / p
    if must_exist and not p.exists():
        raise ConfigError(f"path does not exist: {p}")
    return p


def _trigger(raw: dict, default_shape: str) -> TriggerSpec:
    raw = dict(raw)
    allowed = {"shape", "pixel", "temperature", "area_fraction", "offset", "height", "width", "center"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigError(f"unknown trigger keys {sorted(unknown)}")
    raw.setdefault("shape", default_shape)
    for key in ("offset", "center"):
        if key in raw and raw[key] is not None:
            raw[key] = tuple(float(v) for v in raw[key])
    return TriggerSpec(**raw)


def _oaa(raw: dict, tmap, seed: int) -> tuple[OaaConfig, int | None]:
    trig = _trigger(raw.get("trigger", {"pixel": 192}), BBOX_BLOCK)
    if trig.temperature is not None:
        trig = trig.with_pixel(_intensity({"temperature": trig.temperature}, tmap, "oaa.trigger"))
    if "active_pixel_range" in raw and "active_temperature_range" in raw:
        raise ConfigError("oaa: give active_pixel_range or active_temperature_range, not both")
    if "active_temperature_range" in raw:
        lo, hi = raw["active_temperature_range"]
        rng = (
            _intensity({"temperature": lo}, tmap, "oaa.active_temperature_range"),
            _intensity({"temperature": hi}, tmap, "oaa.active_temperature_range"),
        )
    else:
        rng = tuple(int(v) for v in raw.get("active_pixel_range", (0, 255)))
    adv = None
    if "adversarial_pixels" in raw:
        adv = tuple(_intensity(p, tmap, "oaa.adversarial_pixels") for p in raw["adversarial_pixels"])
    if "adversarial_temperatures" in raw:
        adv = (adv or ()) + tuple(
            _intensity({"temperature": t}, tmap, "oaa.adversarial_temperatures") for t in raw["adversarial_temperatures"]
        )
    cfg = OaaConfig(
        goal=raw.get("goal", "misclassify"),
        q=float(raw.get("q", 0.2)),
        trigger=trig,
        active_pixel_range=rng,
        adversarial_ratio=float(raw.get("adversarial_ratio", 0.0)),
        adversarial_pixels=adv,
        seed=int(raw.get("seed", seed)),
    )
    out_pixel = None
    if raw.get("test_out_of_range") is not None:
        out_pixel = _intensity(raw["test_out_of_range"], tmap, "oaa.test_out_of_range")
    return cfg, out_pixel


def _raa(raw: dict, tmap, seed: int) -> tuple[RaaConfig, int | None]:
    trig = _trigger(raw.get("trigger", {"shape": STRIP, "center": [160, 206]}), STRIP)
    table = {}
    for i, entry in enumerate(raw.get("radius_table", [])):
        p = _intensity({k: v for k, v in entry.items() if k != "radius"}, tmap, f"raa.radius_table[{i}]")
        if p in table:
            raise ConfigError(f"raa.radius_table[{i}]: pixel level {p} appears twice")
        table[p] = float(entry["radius"])
    ratios = []
    for i, entry in enumerate(raw.get("pixel_ratios", [])):
        p = _intensity({k: v for k, v in entry.items() if k != "ratio"}, tmap, f"raa.pixel_ratios[{i}]")
        ratios.append((p, float(entry["ratio"])))
    cfg = RaaConfig(
        radius_table=RadiusTable(table),
        pixel_ratios=tuple(ratios),
        trigger=trig,
        goal=raw.get("goal", "misclassify"),
        test_radius=None if raw.get("test_radius") is None else float(raw["test_radius"]),
        seed=int(raw.get("seed", seed)),
    )
    test_pixel = None
    if raw.get("test_pixel") is not None:
        test_pixel = _intensity(raw["test_pixel"], tmap, "raa.test_pixel")
    return cfg, test_pixel


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return parse_config(raw, path)


def parse_config(raw: dict, path: Path) -> RunConfig:
    base = path.parent
    try:
        if "dataset" not in raw:
            raise ConfigError("config needs a 'dataset' path")
        dataset = _path(raw["dataset"], base, must_exist=True)
        classes = ClassMap.from_dict(raw["classes"]) if "classes" in raw else Dataset(dataset).classes
        tmap = _thermal_map(raw.get("thermal_map"), base)
        seed = int(raw.get("seed", 0))
        present = [k for k in (OAA, RAA) if k in raw]
        if len(present) != 1:
            raise ConfigError(f"exactly one of 'oaa' / 'raa' must be present, found {present}")
        mode = present[0]
        if raw.get("mode", mode) != mode:
            raise ConfigError(f"mode {raw['mode']!r} does not match the '{mode}' block")
        oaa = raa = None
        oaa_out = raa_pixel = None
        if mode == OAA:
            oaa, oaa_out = _oaa(raw[OAA], tmap, seed)
            goal = oaa.goal
        else:
            raa, raa_pixel = _raa(raw[RAA], tmap, seed)
            goal = raa.goal
        ev = raw.get("eval", {})
        map_classes = ev.get("map_classes")
        if map_classes is not None:
            map_classes = tuple(classes.id_of(c) if isinstance(c, str) else int(c) for c in map_classes)
        eval_cfg = EvalConfig(
            iou_threshold=float(ev.get("iou_threshold", DEFAULT_IOU)),
            source_class=classes.source_id,
            target_class=classes.target_id,
            goal=goal,
            map_classes=map_classes,
        )
        return RunConfig(
            path=path,
            dataset=dataset,
            classes=classes,
            thermal_map=tmap,
            mode=mode,
            oaa=oaa,
            raa=raa,
            eval=eval_cfg,
            seed=seed,
            output=_path(raw.get("output", "poisoned"), base),
            testset_output=_path(raw.get("testset_output", "testsets"), base),
            train_split=raw.get("train_split", "train"),
            test_split=raw.get("test_split", "test"),
            workers=int(raw.get("workers", 1)),
            oaa_test_out_pixel=oaa_out,
            raa_test_pixel=raa_pixel,
        )
    except ThermalBackdoorError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
