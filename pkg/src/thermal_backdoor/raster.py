"""8-bit grayscale rasters and the binary PGM (P5) codec.

Pixels are stored row-major with the origin at the top-left corner, x to the
right and y downward. Every geometric routine in the package uses this
convention.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    PgmDimensionError,
    PgmHeaderError,
    PgmMagicError,
    PgmMaxvalError,
    PgmTrailingDataError,
    PgmTruncatedError,
)

_WHITESPACE = b" \t\n\r\x0b\x0c"


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable ``height x width`` uint8 raster."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        if int(self.width) <= 0 or int(self.height) <= 0:
            raise PgmDimensionError(f"image dimensions must be positive, got {self.width}x{self.height}")
        arr = np.asarray(self.data)
        if arr.size != self.width * self.height:
            raise ValueError(f"pixel count {arr.size} != {self.width}*{self.height}")
        if arr.dtype != np.uint8:
            if arr.size and (arr.min() < 0 or arr.max() > 255):
                raise ValueError("pixel values must lie in [0, 255]")
        arr = np.array(arr, dtype=np.uint8).reshape(self.height, self.width)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, pixels) -> "GrayImage":
        pixels = np.asarray(pixels)
        if pixels.ndim != 2:
            raise ValueError("expected a 2-D array")
        return cls(pixels.shape[1], pixels.shape[0], pixels)

    @classmethod
    def filled(cls, width: int, height: int, value: int = 0) -> "GrayImage":
        return cls(width, height, np.full((height, width), value, dtype=np.uint8))

    @property
    def shape(self):
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.data, other.data)
        )

    def __hash__(self):
        return hash((self.width, self.height, self.data.tobytes()))

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


def _next_token(buf: bytes, pos: int, field: str) -> tuple[bytes, int]:
    """Skip whitespace and ``#`` comments, then return the next token."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in _WHITESPACE and c:
            pos += 1
        elif c == b"#":
            end = buf.find(b"\n", pos)
            if end < 0:
                raise PgmHeaderError(f"unterminated comment before {field}")
            pos = end + 1
        else:
            break
    start = pos
    while pos < n and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PgmHeaderError(f"missing {field}")
    return buf[start:pos], pos


def _parse_int(token: bytes, field: str) -> int:
    if not token.isdigit():
        if token[:1] == b"-" and token[1:].isdigit():
            raise PgmDimensionError(f"{field} must be positive, got {token.decode('ascii')}")
        raise PgmHeaderError(f"{field} is not a decimal integer: {token!r}")
    return int(token)


def read_pgm(buf: bytes) -> GrayImage:
    """Decode a binary PGM with maxval 255."""
    buf = bytes(buf)
    if buf[:2] != b"P5":
        raise PgmMagicError(f"bad magic {buf[:2]!r}, expected b'P5'")
    pos = 2
    if pos < len(buf) and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        raise PgmMagicError("magic number must be followed by whitespace")
    tok, pos = _next_token(buf, pos, "width")
    width = _parse_int(tok, "width")
    tok, pos = _next_token(buf, pos, "height")
    height = _parse_int(tok, "height")
    tok, pos = _next_token(buf, pos, "maxval")
    maxval = _parse_int(tok, "maxval")
    if width <= 0 or height <= 0:
        raise PgmDimensionError(f"dimensions must be positive, got {width}x{height}")
    if maxval != 255:
        raise PgmMaxvalError(f"maxval must be 255, got {maxval}")
    # exactly one whitespace byte separates the header from the raster
    if pos >= len(buf) or buf[pos : pos + 1] not in _WHITESPACE:
        raise PgmTruncatedError("missing whitespace after maxval")
    pos += 1
    need = width * height
    payload = buf[pos:]
    if len(payload) < need:
        raise PgmTruncatedError(f"expected {need} pixel bytes, got {len(payload)}")
    if len(payload) > need:
        raise PgmTrailingDataError(f"{len(payload) - need} bytes after the pixel data")
    return GrayImage(width, height, np.frombuffer(payload, dtype=np.uint8))


def write_pgm(img: GrayImage) -> bytes:
    """Canonical encoding: ``P5\\n<w> <h>\\n255\\n`` followed by the raw pixels."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img.data, dtype=np.uint8).tobytes()


def load_pgm(path) -> GrayImage:
    return read_pgm(Path(path).read_bytes())


def save_pgm(img: GrayImage, path) -> None:
    Path(path).write_bytes(write_pgm(img))
