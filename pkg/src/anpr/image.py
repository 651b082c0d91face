"""Pixel buffers, Netpbm I/O and cropping.

Every pipeline stage passes these small immutable wrappers around numpy
arrays. Coordinates follow the usual raster convention: ``x`` is the
column index (grows rightward), ``y`` the row index (grows downward), and
arrays are indexed ``[y, x]``.
"""

from __future__ import annotations

import enum
import os
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Polarity",
    "GrayImage",
    "RgbImage",
    "BinaryImage",
    "BoundingBox",
    "NetpbmError",
    "crop",
    "read_netpbm",
    "write_netpbm",
    "parse_netpbm",
    "encode_netpbm",
]


class Polarity(enum.Enum):
    """What a set bit in a :class:`BinaryImage` stands for."""

    INK = "ink"
    EDGE = "edge"


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.uint8, copy=True, order="C")
    arr.setflags(write=False)
    return arr


def _as_uint8(data, ndim: int, name: str) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != ndim:
        raise ValueError(f"{name} expects a {ndim}-d array, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be at least 1x1, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        integral = arr.dtype.kind in "iub" or (
            arr.dtype.kind == "f" and np.all(np.mod(arr, 1) == 0)
        )
        if not integral:
            raise ValueError(f"{name} intensities must be integers")
        if arr.min() < 0 or arr.max() > 255:
            raise ValueError(f"{name} intensities must lie in [0, 255]")
    return _frozen(arr)


class _Image:
    __slots__ = ()

    @property
    def height(self) -> int:
        return int(self.array.shape[0])

    @property
    def width(self) -> int:
        return int(self.array.shape[1])

    @property
    def shape(self) -> tuple:
        return self.array.shape

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._key() == other._key() and np.array_equal(self.array, other.array)

    def _key(self):
        return ()

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GrayImage(_Image):
    """Single-channel 8-bit image, ``data`` has shape ``(height, width)``."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _as_uint8(self.data, 2, "GrayImage"))

    @property
    def array(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"GrayImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class RgbImage(_Image):
    """Three-channel 8-bit image, ``data`` has shape ``(height, width, 3)``."""

    data: np.ndarray

    def __post_init__(self):
        arr = _as_uint8(self.data, 3, "RgbImage")
        if arr.shape[2] != 3:
            raise ValueError(f"RgbImage needs 3 channels, got {arr.shape[2]}")
        object.__setattr__(self, "data", arr)

    @property
    def array(self) -> np.ndarray:
        return self.data

    def __repr__(self):
        return f"RgbImage({self.width}x{self.height})"


@dataclass(frozen=True, eq=False)
class BinaryImage(_Image):
    """Bilevel image with bits in {0, 1} and a fixed :class:`Polarity`."""

    bits: np.ndarray
    polarity: Polarity = Polarity.INK

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.dtype == bool:
            arr = arr.astype(np.uint8)
        arr = _as_uint8(arr, 2, "BinaryImage")
        if arr.size and arr.max() > 1:
            raise ValueError("BinaryImage bits must be 0 or 1")
        if not isinstance(self.polarity, Polarity):
            raise TypeError("polarity must be a Polarity")
        object.__setattr__(self, "bits", arr)

    @property
    def array(self) -> np.ndarray:
        return self.bits

    def _key(self):
        return (self.polarity,)

    def count(self) -> int:
        return int(self.bits.sum(dtype=np.int64))

    def to_gray(self) -> GrayImage:
        """Render set bits as intensity 255 and clear bits as 0."""
        return GrayImage(self.bits * np.uint8(255))

    def __repr__(self):
        return f"BinaryImage({self.width}x{self.height}, {self.polarity.name})"


AnyImage = Union[GrayImage, RgbImage, BinaryImage]


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned rectangle with top-left corner ``(x, y)``."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        for name in ("x", "y", "w", "h"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.x < 0 or self.y < 0 or self.w < 0 or self.h < 0:
            raise ValueError(f"negative box coordinates: {self}")

    @property
    def x2(self) -> int:
        return self.x + self.w

    @property
    def y2(self) -> int:
        return self.y + self.h

    @property
    def area(self) -> int:
        return self.w * self.h

    def offset(self, dx: int, dy: int) -> "BoundingBox":
        return BoundingBox(self.x + dx, self.y + dy, self.w, self.h)

    def fits(self, width: int, height: int) -> bool:
        return self.x2 <= width and self.y2 <= height

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.w, self.h)


def crop(image: AnyImage, box: BoundingBox) -> AnyImage:
    """Return the ``box`` region of ``image`` as a new image of the same kind."""
    if not box.fits(image.width, image.height):
        raise IndexError(
            f"box {box.as_tuple()} exceeds image bounds {image.width}x{image.height}"
        )
    region = image.array[box.y : box.y2, box.x : box.x2]
    if isinstance(image, BinaryImage):
        return BinaryImage(region, image.polarity)
    return type(image)(region)


# --------------------------------------------------------------------------
# Netpbm

class NetpbmError(ValueError):
    """Malformed or truncated Netpbm data; ``offset`` is the failing byte."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


_WS = b" \t\r\n\v\f"


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def skip_space(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos : self.pos + 1]
            if c == b"#":
                end = data.find(b"\n", self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif c in _WS:
                self.pos += 1
            else:
                break

    def token(self, what: str) -> int:
        self.skip_space()
        m = re.compile(rb"\d+").match(self.data, self.pos)
        if m is None:
            if self.pos >= len(self.data):
                raise NetpbmError(f"truncated header, expected {what}", self.pos)
            raise NetpbmError(f"expected {what}", self.pos)
        self.pos = m.end()
        return int(m.group())

    def plain_bit(self) -> int:
        self.skip_space()
        if self.pos >= len(self.data):
            raise NetpbmError("truncated bit data", self.pos)
        c = self.data[self.pos : self.pos + 1]
        if c not in (b"0", b"1"):
            raise NetpbmError(f"invalid PBM bit {c!r}", self.pos)
        self.pos += 1
        return 1 if c == b"1" else 0


def _rescale(values: np.ndarray, maxval: int) -> np.ndarray:
    if maxval == 255:
        return values.astype(np.uint8)
    v = values.astype(np.int64)
    return ((v * 510 + maxval) // (2 * maxval)).astype(np.uint8)


def parse_netpbm(data: bytes) -> AnyImage:
    """Decode a complete Netpbm (P1 to P6) byte string."""
    if len(data) < 2 or data[:1] != b"P" or data[1:2] not in b"123456":
        raise NetpbmError("bad magic number, expected P1..P6", 0)
    kind = int(data[1:2])
    r = _Reader(data)
    r.pos = 2
    width = r.token("width")
    height = r.token("height")
    if width < 1 or height < 1:
        raise NetpbmError("image dimensions must be positive", r.pos)
    maxval = 1
    if kind not in (1, 4):
        maxval = r.token("maxval")
        if maxval < 1 or maxval > 65535:
            raise NetpbmError(f"maxval {maxval} outside 1..65535", r.pos)
    channels = 3 if kind in (3, 6) else 1
    n = width * height * channels

    if kind in (1, 2, 3):
        if kind == 1:
            bits = [r.plain_bit() for _ in range(n)]
            return BinaryImage(np.array(bits, np.uint8).reshape(height, width))
        values = np.empty(n, dtype=np.int64)
        for i in range(n):
            values[i] = r.token("sample")
        if values.max(initial=0) > maxval:
            raise NetpbmError("sample exceeds maxval", r.pos)
        return _wrap(_rescale(values, maxval), kind, width, height)

    # raw formats: exactly one whitespace byte after the header
    if r.pos >= len(data) or data[r.pos : r.pos + 1] not in _WS:
        raise NetpbmError("missing whitespace after header", r.pos)
    start = r.pos + 1
    if kind == 4:
        row_bytes = (width + 7) // 8
        need = row_bytes * height
        raw = data[start : start + need]
        if len(raw) < need:
            raise NetpbmError("truncated raster", start + len(raw))
        packed = np.frombuffer(raw, dtype=np.uint8).reshape(height, row_bytes)
        bits = np.unpackbits(packed, axis=1)[:, :width]
        return BinaryImage(bits)
    sample_bytes = 1 if maxval < 256 else 2
    need = n * sample_bytes
    raw = data[start : start + need]
    if len(raw) < need:
        raise NetpbmError("truncated raster", start + len(raw))
    dtype = np.uint8 if sample_bytes == 1 else np.dtype(">u2")
    values = np.frombuffer(raw, dtype=dtype).astype(np.int64)
    if values.max(initial=0) > maxval:
        raise NetpbmError("sample exceeds maxval", start)
    return _wrap(_rescale(values, maxval), kind, width, height)


def _wrap(values: np.ndarray, kind: int, width: int, height: int) -> AnyImage:
    if kind in (3, 6):
        return RgbImage(values.reshape(height, width, 3))
    return GrayImage(values.reshape(height, width))


def encode_netpbm(image: AnyImage) -> bytes:
    """Encode as raw P4/P5/P6 with maxval 255."""
    if isinstance(image, BinaryImage):
        header = f"P4\n{image.width} {image.height}\n".encode()
        return header + np.packbits(image.bits, axis=1).tobytes()
    if isinstance(image, GrayImage):
        header = f"P5\n{image.width} {image.height}\n255\n".encode()
        return header + image.data.tobytes()
    if isinstance(image, RgbImage):
        header = f"P6\n{image.width} {image.height}\n255\n".encode()
        return header + image.data.tobytes()
    raise TypeError(f"cannot encode {type(image).__name__}")


def read_netpbm(path) -> AnyImage:
    with open(path, "rb") as fh:
        return parse_netpbm(fh.read())


def write_netpbm(image: AnyImage, path) -> None:
    payload = encode_netpbm(image)
    with open(os.fspath(path), "wb") as fh:
        fh.write(payload)
