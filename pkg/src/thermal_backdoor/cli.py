"""``thermal-backdoor`` command line.

Subcommands: fit-map, poison, make-testset, evaluate, inspect. Everything
except fit-map and inspect reads a single JSON run config.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__, kernels
from .annotations import ClassMap
from .config import load_config
from .dataset import dump_json
from .errors import LabelParseError, ThermalBackdoorError
from .pipeline import VARIANTS, cmd_evaluate, cmd_fit_map, cmd_inspect, cmd_make_testset, cmd_poison

log = logging.getLogger("thermal_backdoor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thermal-backdoor", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-map", help="fit the temperature->pixel calibration from a CSV")
    p.add_argument("csv", help="two-column CSV: temperature,pixel")
    p.add_argument("-m", "--exponent", type=float, default=4.0)
    p.add_argument("-o", "--out", help="write the JSON here instead of stdout")

    p = sub.add_parser("poison", help="write a poisoned copy of the training split")
    p.add_argument("config")
    p.add_argument("-o", "--out", help="override the config's output directory")
    p.add_argument("-j", "--workers", type=int)
    p.add_argument("--overwrite", action="store_true", help="replace an existing output directory")

    p = sub.add_parser("make-testset", help="write a triggered copy of the test split")
    p.add_argument("config")
    p.add_argument("--variant", choices=VARIANTS, default=VARIANTS[0])
    p.add_argument("--pixel", type=int, help="override the trigger pixel level")
    p.add_argument("--temperature", type=float, help="override the trigger temperature (needs thermal_map)")
    p.add_argument("--test-radius", type=float, help="RAA evaluation radius in pixels")
    p.add_argument("-o", "--out")
    p.add_argument("-j", "--workers", type=int)
    p.add_argument("--overwrite", action="store_true")

    p = sub.add_parser("evaluate", help="compute ASR / AP / BAF from detector outputs")
    p.add_argument("config")
    p.add_argument("--gt", help="ground-truth dataset root (default: the config's dataset)")
    p.add_argument("--clean-clean", required=True, help="clean model on clean images")
    p.add_argument("--backdoor-clean", required=True, help="backdoored model on clean images")
    p.add_argument("--backdoor-triggered", required=True, help="backdoored model on triggered images")
    p.add_argument("--sidecars", help="triggers/ directory of a generated test set (restricts ASR objects)")
    p.add_argument("-o", "--out", help="write the JSON report here")

    p = sub.add_parser("inspect", help="dump image statistics, boxes and trigger stamps")
    p.add_argument("image")
    p.add_argument("labels", nargs="?")
    p.add_argument("--manifest", help="dataset manifest.json for class names")
    p.add_argument("--sidecar", help="trigger sidecar JSON")
    p.add_argument("--grid", type=int, help="report trigger/object grid-cell overlap at this grid size")
    return parser


def _run(args) -> int:
    if args.command == "fit-map":
        tmap = cmd_fit_map(args.csv, args.exponent)
        text = dump_json({"thermal_map": tmap.to_dict()})
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "inspect":
        classes = None
        if args.manifest:
            with open(args.manifest) as fh:
                classes = ClassMap.from_dict(json.load(fh)["classes"])
        print(cmd_inspect(args.image, args.labels, classes, args.sidecar, args.grid))
        return 0

    cfg = load_config(args.config)
    if args.command == "poison":
        plan = cmd_poison(cfg, args.out, args.workers, args.overwrite)
        counts = plan.counts()
        print(
            f"{cfg.mode}: {counts['normal-poison']} normal, {counts['adversarial-poison']} adversarial, "
            f"{counts['clean']} clean -> {args.out or cfg.output}"
        )
        return 0

    if args.command == "make-testset":
        pixel = args.pixel
        if args.temperature is not None:
            if pixel is not None:
                raise ThermalBackdoorError("give --pixel or --temperature, not both")
            if cfg.thermal_map is None:
                raise ThermalBackdoorError("--temperature needs a thermal_map in the config")
            from .thermal import resolve_temperature

            pixel = resolve_temperature(cfg.thermal_map, args.temperature)
        out = cmd_make_testset(cfg, args.variant, args.out, pixel, args.test_radius, args.workers, args.overwrite)
        print(f"{cfg.mode} {args.variant} test set -> {out}")
        return 0

    if args.command == "evaluate":
        report = cmd_evaluate(
            cfg, args.clean_clean, args.backdoor_clean, args.backdoor_triggered, args.gt, args.sidecars, args.out
        )
        for w in report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        print(report.table())
        return 0
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s"
    )
    log.debug("kernel backend: %s", kernels.BACKEND)
    try:
        return _run(args)
    except (ThermalBackdoorError, LabelParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
