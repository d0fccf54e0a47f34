"""Dataset-level commands behind the CLI."""
from __future__ import annotations

import json
import logging
import shutil
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .annotations import ClassMap, emit_labels, parse_labels
from .config import OAA, RunConfig
from .dataset import IMAGES, LABELS, MANIFEST, TRIGGERS, Dataset, dump_json
from .errors import ConfigContradictionError, DatasetError
from .metrics import EvalReport, evaluate_run
from .oaa import make_triggered_testset, plan_oaa, poison_image_oaa
from .plan import ADVERSARIAL, CLEAN, KEPT, NORMAL, PoisonPlan
from .raa import INSIDE, OUTSIDE, grid_overlap_report, make_raa_testset, plan_raa, poison_image_raa
from .raster import load_pgm, write_pgm
from .thermal import ThermalMap, fit, load_calibration_csv
from .triggers import Stamp

log = logging.getLogger(__name__)

PLAN_FILE = "poison_plan.json"
PROVENANCE_FILE = "provenance.json"
IN_RANGE = "in-range"
OUT_OF_RANGE = "out-of-range"
VARIANTS = (IN_RANGE, OUT_OF_RANGE)


def cmd_fit_map(csv_path, m: float = 4.0) -> ThermalMap:
    return fit(load_calibration_csv(csv_path), m)


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fresh_output(out: Path, src: Path, overwrite: bool) -> None:
    out, src = out.resolve(), src.resolve()
    if out == src or src in out.parents or out in src.parents:
        raise DatasetError(f"output {out} overlaps the input dataset {src}")
    if out.exists():
        if not overwrite:
            raise DatasetError(f"output {out} already exists (use --overwrite)")
        shutil.rmtree(out)


def _mirror(src: Path, out: Path) -> None:
    shutil.copytree(src, out, copy_function=shutil.copyfile)


def cmd_poison(cfg: RunConfig, out=None, workers: int | None = None, overwrite: bool = False) -> PoisonPlan:
    """Write a poisoned copy of the dataset plus ``poison_plan.json``.

    Only the train split is touched; every other file is copied byte for byte.
    """
    ds = Dataset(cfg.dataset)
    classes = cfg.classes
    out = Path(out) if out is not None else cfg.output
    workers = cfg.workers if workers is None else workers
    stems = ds.stems(cfg.train_split)
    if cfg.mode == OAA:
        plan = plan_oaa(stems, cfg.oaa, cfg.thermal_map)
    else:
        plan = plan_raa(stems, cfg.raa)
    plan.params["split"] = cfg.train_split

    def work(rec):
        if rec.role == CLEAN:
            return rec, None, None
        img = ds.load_image(rec.image_id)
        anns = ds.load_labels(rec.image_id)
        if cfg.mode == OAA:
            new_img, new_anns, log_rec = poison_image_oaa(
                img, anns, cfg.oaa, NORMAL if rec.role == NORMAL else ADVERSARIAL, classes, rec.pixel
            )
        else:
            new_img, new_anns, log_rec = poison_image_raa(img, anns, cfg.raa, rec.pixel, classes)
        rec.stamps, rec.label_edits, rec.notes = log_rec.stamps, log_rec.label_edits, log_rec.notes
        img_bytes = write_pgm(new_img) if rec.stamps else None
        label_text = emit_labels(new_anns) if any(e != KEPT for e in rec.label_edits) else None
        return rec, img_bytes, label_text

    results = _map(work, plan.records, workers)
    _fresh_output(out, cfg.dataset, overwrite)
    _mirror(cfg.dataset, out)
    for rec, img_bytes, label_text in results:
        if img_bytes is not None:
            (out / IMAGES / f"{rec.image_id}.pgm").write_bytes(img_bytes)
        if label_text is not None:
            (out / LABELS / f"{rec.image_id}.txt").write_text(label_text)
    (out / PLAN_FILE).write_text(dump_json(plan.to_dict()))
    counts = plan.counts()
    log.info("poisoned %d normal + %d adversarial of %d images", counts[NORMAL], counts[ADVERSARIAL], len(stems))
    return plan


def _testset_pixel(cfg: RunConfig, variant: str, pixel: int | None) -> int:
    if cfg.mode == OAA:
        oaa = cfg.oaa
        if pixel is None:
            if variant == IN_RANGE:
                pixel = oaa.normal_pixel(cfg.thermal_map)
                if pixel is None:
                    raise ConfigContradictionError("in-range test needs a fixed trigger intensity or --pixel")
            else:
                pixel = cfg.oaa_test_out_pixel
                if pixel is None:
                    raise ConfigContradictionError("out-of-range test needs oaa.test_out_of_range or --pixel")
        if variant == IN_RANGE and not oaa.in_range(pixel):
            raise ConfigContradictionError(f"in-range test intensity {pixel} lies outside the active range")
        if variant == OUT_OF_RANGE and oaa.in_range(pixel):
            raise ConfigContradictionError(f"out-of-range test intensity {pixel} lies inside the active range")
        return pixel
    if pixel is None:
        pixel = cfg.raa_test_pixel if cfg.raa_test_pixel is not None else cfg.raa.pixel_ratios[0][0]
    return pixel


def cmd_make_testset(
    cfg: RunConfig,
    variant: str = IN_RANGE,
    out=None,
    pixel: int | None = None,
    test_radius: float | None = None,
    workers: int | None = None,
    overwrite: bool = False,
) -> Path:
    """Triggered copy of the test split under ``<testset_output>/<variant>``.

    Labels are copied untouched; ``triggers/<stem>.json`` records each image's
    trigger provenance.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    ds = Dataset(cfg.dataset)
    out = Path(out) if out is not None else cfg.testset_output / variant
    workers = cfg.workers if workers is None else workers
    stems = ds.stems(cfg.test_split)
    pixel = _testset_pixel(cfg, variant, pixel)

    def work(stem):
        sample = [(stem, ds.load_image(stem), ds.load_labels(stem))]
        if cfg.mode == OAA:
            (res,) = make_triggered_testset(sample, cfg.oaa, cfg.classes, cfg.thermal_map, pixel)
        else:
            (res,) = make_raa_testset(
                sample, cfg.raa, cfg.classes, pixel, test_radius, INSIDE if variant == IN_RANGE else OUTSIDE
            )
        res.provenance["variant"] = variant
        img_bytes = write_pgm(res.image) if res.provenance["stamps"] else None
        return stem, img_bytes, res.provenance

    results = _map(work, stems, workers)
    _fresh_output(out, cfg.dataset, overwrite)
    for sub in (IMAGES, LABELS, TRIGGERS):
        (out / sub).mkdir(parents=True)
    shutil.copyfile(cfg.dataset / MANIFEST, out / MANIFEST)
    n_triggered = 0
    for stem, img_bytes, prov in results:
        if img_bytes is None:
            shutil.copyfile(ds.image_path(stem), out / IMAGES / f"{stem}.pgm")
        else:
            (out / IMAGES / f"{stem}.pgm").write_bytes(img_bytes)
            n_triggered += 1
        if ds.label_path(stem).exists():
            shutil.copyfile(ds.label_path(stem), out / LABELS / f"{stem}.txt")
        (out / TRIGGERS / f"{stem}.json").write_text(dump_json(prov))
    summary = {
        "attack": cfg.mode,
        "variant": variant,
        "pixel": pixel,
        "split": cfg.test_split,
        "n_images": len(stems),
        "n_triggered": n_triggered,
    }
    (out / PROVENANCE_FILE).write_text(dump_json(summary))
    return out


def cmd_evaluate(
    cfg: RunConfig,
    clean_model_clean,
    backdoor_clean,
    backdoor_triggered,
    gt_root=None,
    sidecars=None,
    out=None,
) -> EvalReport:
    gt_root = Path(gt_root) if gt_root is not None else cfg.dataset
    report = evaluate_run(
        gt_root, clean_model_clean, backdoor_clean, backdoor_triggered, cfg.eval, cfg.test_split, sidecars
    )
    if out is not None:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(report.to_json())
    return report


def cmd_inspect(image_path, label_path=None, classes=None, sidecar=None, grid: int | None = None) -> str:
    """Human-readable dump: image stats, boxes in pixels, trigger stamps."""
    img = load_pgm(image_path)
    data = img.data
    lines = [
        f"image   : {image_path}",
        f"size    : {img.width}x{img.height}",
        f"pixels  : min {int(data.min())}  max {int(data.max())}  mean {float(data.mean()):.2f}  std {float(data.std()):.2f}",
    ]
    anns = []
    if label_path is not None and Path(label_path).exists():
        text = Path(label_path).read_text()
        if classes is None:
            n = 1 + max((int(line.split()[0]) for line in text.splitlines() if line.strip()), default=1)
            classes = ClassMap(tuple(str(i) for i in range(max(n, 2))), "0", "1")
        anns = parse_labels(text, classes)
        lines.append(f"objects : {len(anns)}")
        for k, a in enumerate(anns):
            x0, y0, x1, y1 = a.bbox.to_pixels(img.width, img.height)
            ix0, iy0 = max(int(np.floor(x0)), 0), max(int(np.floor(y0)), 0)
            ix1, iy1 = min(int(np.ceil(x1)), img.width), min(int(np.ceil(y1)), img.height)
            patch = data[iy0:iy1, ix0:ix1]
            stats = f"mean {float(patch.mean()):.1f} max {int(patch.max())}" if patch.size else "empty"
            lines.append(
                f"  [{k}] {classes.names[a.class_id]:<10} box ({x0:.1f}, {y0:.1f})-({x1:.1f}, {y1:.1f})"
                f"  {x1 - x0:.1f}x{y1 - y0:.1f} px  {stats}"
            )
    if sidecar is not None:
        prov = json.loads(Path(sidecar).read_text())
        stamps = [Stamp.from_dict(s) for s in prov.get("stamps", [])]
        lines.append(f"trigger : attack {prov.get('attack')}  pixel {prov.get('pixel')}  stamps {len(stamps)}")
        for s in stamps:
            lines.append(f"  stamp ({s.left}, {s.top}) {s.width}x{s.height} value {s.value}")
        if grid and stamps and anns:
            for si, s in enumerate(stamps):
                for row in grid_overlap_report(s, anns, img.width, img.height, grid):
                    lines.append(
                        f"  grid {grid}: stamp {si} / object {row['index']} shares {row['shared_cells']} of "
                        f"{row['trigger_cells']} trigger cells"
                    )
    return "\n".join(lines)
