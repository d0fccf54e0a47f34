"""Temperature <-> pixel-level calibration ``p = lambda * T**m + phi``.

Temperatures are degrees Celsius. The camera model used for the reference
coefficients maps roughly 18 C to pixel 0 and 37.3 C to pixel 255.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    AboveCalibrationRangeError,
    BelowCalibrationRangeError,
    CalibrationCsvError,
    DegenerateFitError,
    NonMonotoneCalibrationError,
)

DEFAULT_EXPONENT = 4.0
# HTI-301 fit, 8-13 um band
REFERENCE_LAMBDA = 1.4221e-4
REFERENCE_PHI = -15.4760


def round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


@dataclass(frozen=True)
class CalibrationSample:
    temperature: float
    pixel: float

    def __post_init__(self):
        if not 0.0 <= self.pixel <= 255.0:
            raise ValueError(f"pixel {self.pixel} outside [0, 255]")


@dataclass(frozen=True)
class ThermalMap:
    lambda_coeff: float
    phi_offset: float
    exponent_m: float = DEFAULT_EXPONENT

    def __post_init__(self):
        if not self.lambda_coeff > 0:
            raise NonMonotoneCalibrationError(f"lambda must be positive, got {self.lambda_coeff}")
        if not self.exponent_m > 0:
            raise ValueError("exponent must be positive")

    @classmethod
    def reference(cls, exponent_m: float = DEFAULT_EXPONENT) -> "ThermalMap":
        return cls(REFERENCE_LAMBDA, REFERENCE_PHI, exponent_m)

    def raw(self, t: float) -> float:
        """Unrounded forward value. Negative temperatures are treated as 0 C."""
        return self.lambda_coeff * max(float(t), 0.0) ** self.exponent_m + self.phi_offset

    def root_temperature(self) -> float:
        """Temperature where the forward map crosses pixel 0 (0 C if it never does)."""
        if self.phi_offset >= 0:
            return 0.0
        return (-self.phi_offset / self.lambda_coeff) ** (1.0 / self.exponent_m)

    def valid_range(self) -> tuple[float, float]:
        """Temperatures whose forward value lies in [0, 255]."""
        hi = max(255.0 - self.phi_offset, 0.0) / self.lambda_coeff
        return self.root_temperature(), hi ** (1.0 / self.exponent_m)

    def to_dict(self) -> dict:
        return {"lambda_coeff": self.lambda_coeff, "phi_offset": self.phi_offset, "exponent_m": self.exponent_m}

    @classmethod
    def from_dict(cls, d: dict) -> "ThermalMap":
        return cls(float(d["lambda_coeff"]), float(d["phi_offset"]), float(d.get("exponent_m", DEFAULT_EXPONENT)))


def fit(samples: Iterable[CalibrationSample], m: float = DEFAULT_EXPONENT) -> ThermalMap:
    """Least-squares fit of pixel against ``T**m``."""
    samples = list(samples)
    t = np.array([s.temperature for s in samples], dtype=np.float64)
    p = np.array([s.pixel for s in samples], dtype=np.float64)
    if np.unique(t).size < 2:
        raise DegenerateFitError("need at least two distinct temperatures")
    x = np.maximum(t, 0.0) ** m
    if np.unique(x).size < 2:
        raise DegenerateFitError("temperatures collapse to one value of T**m")
    # centred normal equations keep the slope accurate when T**m is large
    xm = x.mean()
    pm = p.mean()
    dx = x - xm
    slope = float(np.dot(dx, p - pm) / np.dot(dx, dx))
    offset = float(pm - slope * xm)
    if not slope > 0:
        raise NonMonotoneCalibrationError(f"fitted lambda {slope} is not positive")
    return ThermalMap(slope, offset, float(m))


def temp_to_pixel(tmap: ThermalMap, t: float, *, report_clamp: bool = False):
    """Pixel level for temperature ``t``: round half away from zero, clamp to [0, 255].

    With ``report_clamp=True`` returns ``(pixel, clamped)``.
    """
    p = round_half_away(tmap.raw(t))
    clamped = p < 0 or p > 255
    p = min(max(p, 0), 255)
    return (p, clamped) if report_clamp else p


def pixel_to_temp(tmap: ThermalMap, p: float) -> float:
    if not 0 <= p <= 255:
        raise ValueError(f"pixel {p} outside [0, 255]")
    base = (p - tmap.phi_offset) / tmap.lambda_coeff
    if base < 0:
        raise BelowCalibrationRangeError(f"pixel {p} lies below the calibrated range")
    return base ** (1.0 / tmap.exponent_m)


def resolve_temperature(tmap: ThermalMap, t: float) -> int:
    """Like :func:`temp_to_pixel` but refuses temperatures outside the calibration."""
    p, clamped = temp_to_pixel(tmap, t, report_clamp=True)
    if clamped:
        lo, hi = tmap.valid_range()
        cls = BelowCalibrationRangeError if tmap.raw(t) < 0 else AboveCalibrationRangeError
        raise cls(f"{t} C outside calibrated range [{lo:.2f}, {hi:.2f}] C")
    return p


def read_calibration_csv(text: str) -> list[CalibrationSample]:
    """Parse ``temperature,pixel`` rows; a non-numeric first row is a header."""
    out = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise CalibrationCsvError(lineno, f"expected 2 columns, got {len(row)}")
        try:
            t, p = float(row[0]), float(row[1])
        except ValueError:
            if lineno == 1 and not out:
                continue
            raise CalibrationCsvError(lineno, f"non-numeric value in {row!r}") from None
        try:
            out.append(CalibrationSample(t, p))
        except ValueError as exc:
            raise CalibrationCsvError(lineno, str(exc)) from None
    return out


def load_calibration_csv(path) -> list[CalibrationSample]:
    return read_calibration_csv(Path(path).read_text())
