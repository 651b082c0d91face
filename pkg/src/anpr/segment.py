"""Projection-profile segmentation of a located plate.

Two passes: rows of the plate are trimmed to the band of vertical edges
with the largest area (characters are tall *and* wide in the row profile,
noise above or below tends to be narrow), then columns of ink are split
at zero-valued gaps into individual characters.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .image import BinaryImage, BoundingBox, Polarity, crop
from .classify.features import GlyphSample
from .locate import sobel_vertical

__all__ = [
    "Axis",
    "Projection",
    "Band",
    "SegmentConfig",
    "EmptyPlateError",
    "GLYPH_SIZE",
    "project",
    "find_bands",
    "pick_character_band",
    "select_character_band",
    "strip_noise_rows",
    "split_characters",
    "normalize_glyph",
]

GLYPH_SIZE = 20


class EmptyPlateError(RuntimeError):
    """No row band of vertical edges was found on the plate."""


class Axis(enum.Enum):
    ROWS = "rows"
    COLUMNS = "columns"


@dataclass(frozen=True)
class Projection:
    axis: Axis
    counts: np.ndarray

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.ndim != 1 or (counts.size and counts.min() < 0):
            raise ValueError("projection counts must be a 1-d array of non-negative ints")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    def __len__(self):
        return len(self.counts)

    def to_text(self) -> str:
        return " ".join(str(int(c)) for c in self.counts) + "\n"


@dataclass(frozen=True)
class Band:
    """Maximal run of positive projection counts; ``end`` is inclusive."""

    start: int
    end: int
    area: int
    peak: int

    @property
    def width(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class SegmentConfig:
    min_char_width: int = 3
    min_char_ink: int = 10
    glyph_size: int = GLYPH_SIZE

    def __post_init__(self):
        if self.glyph_size != GLYPH_SIZE:
            raise ValueError(f"glyph_size is fixed at {GLYPH_SIZE}")
        if self.min_char_width < 1 or self.min_char_ink < 1:
            raise ValueError("minimum character width and ink must be >= 1")


def project(img: BinaryImage, axis: Axis) -> Projection:
    """Count set bits per row (``ROWS``) or per column (``COLUMNS``)."""
    along = 1 if axis is Axis.ROWS else 0
    return Projection(axis, img.bits.sum(axis=along, dtype=np.int64))


def find_bands(p: Projection) -> List[Band]:
    counts = p.counts
    positive = np.concatenate(([False], counts > 0, [False]))
    edges = np.flatnonzero(positive[1:] != positive[:-1])
    bands = []
    for start, stop in zip(edges[::2], edges[1::2]):
        run = counts[start:stop]
        bands.append(Band(int(start), int(stop - 1), int(run.sum()), int(run.max())))
    return bands


def pick_character_band(bands: Sequence[Band]) -> Band:
    """The band with the largest area, then the widest, then the tallest
    peak, then the topmost.

    Area favours the wide character band over short, tall noise peaks.
    """
    if not bands:
        raise EmptyPlateError("no bands to choose from")
    return min(bands, key=lambda b: (-b.area, -b.width, -b.peak, b.start))


def select_character_band(plate: BinaryImage, edge_threshold: int = 128) -> Band:
    """Row band of vertical edges that holds the characters."""
    edges = sobel_vertical(plate, edge_threshold)
    bands = find_bands(project(edges, Axis.ROWS))
    if not bands:
        raise EmptyPlateError("no vertical edges on the plate")
    return pick_character_band(bands)


def strip_noise_rows(plate: BinaryImage, edge_threshold: int = 128) -> BinaryImage:
    """Keep only the rows of the character band (all columns)."""
    _check_ink(plate)
    band = select_character_band(plate, edge_threshold)
    return crop(plate, BoundingBox(0, band.start, plate.width, band.width))


def split_characters(plate: BinaryImage, cfg: SegmentConfig = SegmentConfig()) -> List[BoundingBox]:
    """Character boxes from zero gaps in the column ink profile, left to right."""
    _check_ink(plate)
    bits = plate.bits
    boxes = []
    for band in find_bands(project(plate, Axis.COLUMNS)):
        if band.width < cfg.min_char_width or band.area < cfg.min_char_ink:
            continue
        rows = np.flatnonzero(bits[:, band.start : band.end + 1].any(axis=1))
        top, bottom = int(rows[0]), int(rows[-1])
        boxes.append(BoundingBox(band.start, top, band.width, bottom - top + 1))
    return boxes


def normalize_glyph(glyph: BinaryImage, cfg: SegmentConfig = SegmentConfig(), label=None) -> GlyphSample:
    """Nearest-neighbour resample of a character crop to 20 x 20."""
    if glyph.width < 1 or glyph.height < 1:
        raise ValueError("cannot normalize an empty glyph")
    n = cfg.glyph_size
    idx = 2 * np.arange(n) + 1
    src_x = idx * glyph.width // (2 * n)
    src_y = idx * glyph.height // (2 * n)
    return GlyphSample(glyph.bits[np.ix_(src_y, src_x)], label)


def _check_ink(img: BinaryImage):
    if img.polarity is not Polarity.INK:
        raise ValueError("expected an INK-polarity image")
