"""Uniform-intensity trigger patterns and how they are stamped into images."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .annotations import BBox
from .errors import DegenerateBoxError, MissingThermalMapError, TriggerError, TriggerPlacementError
from .raster import GrayImage
from .thermal import ThermalMap, resolve_temperature, round_half_away

BBOX_BLOCK = "bbox_block"
STRIP = "strip"
BLOCK = "block"
SHAPES = (BBOX_BLOCK, STRIP, BLOCK)

DEFAULT_AREA_FRACTION = 0.04
STRIP_SIZE = (120, 12)  # (h, w): pole-like
BLOCK_SIZE = (60, 60)  # sign-like


@dataclass(frozen=True)
class TriggerSpec:
    """Shape, intensity and placement of one trigger.

    Exactly one of ``pixel`` / ``temperature`` sets the intensity. For
    ``bbox_block`` the square covers ``area_fraction`` of the box area and sits
    at ``offset`` (fractions of the box size, relative to its center). Point
    shapes use ``height`` x ``width`` pixels centred on ``center``.
    """

    shape: str = BBOX_BLOCK
    pixel: int | None = None
    temperature: float | None = None
    area_fraction: float = DEFAULT_AREA_FRACTION
    offset: tuple[float, float] = (0.0, 0.0)
    height: int | None = None
    width: int | None = None
    center: tuple[float, float] | None = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise TriggerError(f"unknown trigger shape {self.shape!r}")
        if self.pixel is not None and self.temperature is not None:
            raise TriggerError("give either pixel or temperature, not both")
        if self.pixel is not None and not (0 <= int(self.pixel) <= 255 and int(self.pixel) == self.pixel):
            raise TriggerError(f"pixel intensity {self.pixel} must be an integer in [0, 255]")
        if self.shape == BBOX_BLOCK:
            if not 0.0 < self.area_fraction <= 1.0:
                raise TriggerError(f"area fraction must lie in (0, 1], got {self.area_fraction}")
        else:
            default = STRIP_SIZE if self.shape == STRIP else BLOCK_SIZE
            h = default[0] if self.height is None else int(self.height)
            w = default[1] if self.width is None else int(self.width)
            if h < 1 or w < 1:
                raise TriggerError("strip/block dimensions must be >= 1 pixel")
            object.__setattr__(self, "height", h)
            object.__setattr__(self, "width", w)

    @property
    def has_intensity(self) -> bool:
        return self.pixel is not None or self.temperature is not None

    def with_pixel(self, pixel: int) -> "TriggerSpec":
        return TriggerSpec(
            self.shape, int(pixel), None, self.area_fraction, self.offset, self.height, self.width, self.center
        )


@dataclass(frozen=True)
class Stamp:
    """Axis-aligned pixel rectangle set to one value; already clipped to the image."""

    left: int
    top: int
    width: int
    height: int
    value: int

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise TriggerError("stamp must cover at least one pixel")
        if not 0 <= self.value <= 255:
            raise TriggerError(f"stamp value {self.value} outside [0, 255]")

    @property
    def area(self) -> int:
        return self.width * self.height

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def bottom(self) -> int:
        return self.top + self.height

    def to_dict(self) -> dict:
        return {"left": self.left, "top": self.top, "width": self.width, "height": self.height, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict) -> "Stamp":
        return cls(int(d["left"]), int(d["top"]), int(d["width"]), int(d["height"]), int(d["value"]))


def resolve_intensity(spec: TriggerSpec, tmap: ThermalMap | None = None) -> int:
    if spec.pixel is not None:
        return int(spec.pixel)
    if spec.temperature is None:
        raise TriggerError("trigger has no intensity")
    if tmap is None:
        raise MissingThermalMapError("temperature-specified trigger needs a thermal map")
    return resolve_temperature(tmap, spec.temperature)


def clip_rect(left: int, top: int, width: int, height: int, img_w: int, img_h: int, value: int) -> Stamp:
    """Intersect a rectangle with the image; raises if nothing is left."""
    x0, y0 = max(left, 0), max(top, 0)
    x1, y1 = min(left + width, img_w), min(top + height, img_h)
    if x1 <= x0 or y1 <= y0:
        raise TriggerPlacementError(f"rectangle ({left}, {top}, {width}, {height}) lies outside the image")
    return Stamp(x0, y0, x1 - x0, y1 - y0, value)


def centered_rect(x: float, y: float, width: int, height: int, img_w: int, img_h: int, value: int) -> Stamp:
    left = round_half_away(x - width / 2.0)
    top = round_half_away(y - height / 2.0)
    # keep at least one pixel inside the frame
    left = min(max(left, 1 - width), img_w - 1)
    top = min(max(top, 1 - height), img_h - 1)
    return clip_rect(left, top, width, height, img_w, img_h, value)


def bbox_stamp_side(bbox: BBox, img_w: int, img_h: int, area_fraction: float) -> int:
    """Side of the square covering ``area_fraction`` of the box's pixel area (unclamped, may be 0)."""
    w_px = bbox.w * img_w
    h_px = bbox.h * img_h
    if round_half_away(w_px * h_px) == 0:
        raise DegenerateBoxError(f"box of {w_px:.3f}x{h_px:.3f} px rounds to zero area")
    return round_half_away(math.sqrt(area_fraction * w_px * h_px))


def bbox_scaled_stamp(
    bbox: BBox,
    img_w: int,
    img_h: int,
    area_fraction: float,
    value: int,
    offset: tuple[float, float] = (0.0, 0.0),
) -> Stamp:
    if not 0.0 < area_fraction <= 1.0:
        raise TriggerError(f"area fraction must lie in (0, 1], got {area_fraction}")
    side = max(bbox_stamp_side(bbox, img_w, img_h, area_fraction), 1)
    x = (bbox.cx + offset[0] * bbox.w) * img_w
    y = (bbox.cy + offset[1] * bbox.h) * img_h
    return centered_rect(x, y, side, side, img_w, img_h, value)


def point_stamp(spec: TriggerSpec, img_w: int, img_h: int, value: int) -> Stamp:
    """Strip or block centred on ``spec.center``; the center must be inside the image."""
    if spec.center is None:
        raise TriggerError("point trigger needs a center")
    a, b = spec.center
    if not (0 <= a < img_w and 0 <= b < img_h):
        raise TriggerPlacementError(f"trigger center ({a}, {b}) outside {img_w}x{img_h} image")
    return centered_rect(a, b, spec.width, spec.height, img_w, img_h, value)


def apply_stamps(img: GrayImage, stamps: Sequence[Stamp]) -> GrayImage:
    """New image with the stamps painted in order; later stamps win."""
    if not stamps:
        return img
    rects = np.array([[s.left, s.top, s.width, s.height] for s in stamps], dtype=np.int64)
    values = np.array([s.value for s in stamps], dtype=np.uint8)
    return GrayImage.from_array(kernels.fill_rects(img.data, rects, values))
