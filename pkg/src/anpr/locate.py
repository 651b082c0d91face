"""Vertical-edge plate localization.

The plate is taken to be the window with the highest density of vertical
edge pixels. Horizontal structures (bumpers, windshield frames, the plate's
own top and bottom borders) produce no response from the horizontal-gradient
Sobel kernel, so they never attract the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from .image import BinaryImage, BoundingBox, GrayImage, Polarity, crop

__all__ = [
    "LocateConfig",
    "IntegralImage",
    "NoEdgesError",
    "sobel_vertical",
    "integral",
    "window_sizes",
    "locate_plate",
    "extract_plate",
]


class NoEdgesError(RuntimeError):
    """The edge map has no set bits, so no plate can be located."""


@dataclass(frozen=True)
class LocateConfig:
    edge_threshold: int = 128
    window_width_fracs: Sequence[float] = field(default=(0.25, 0.33, 0.45))
    plate_aspect: float = 4.6
    stride: int = 4

    def __post_init__(self):
        object.__setattr__(self, "window_width_fracs", tuple(float(f) for f in self.window_width_fracs))
        if not self.window_width_fracs:
            raise ValueError("window_width_fracs must not be empty")
        if any(not 0 < f <= 1 for f in self.window_width_fracs):
            raise ValueError("window width fractions must lie in (0, 1]")
        if self.plate_aspect <= 1:
            raise ValueError("plate_aspect must be > 1")
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        if not 0 <= self.edge_threshold <= 255:
            raise ValueError("edge_threshold must lie in [0, 255]")


def sobel_vertical(img: Union[BinaryImage, GrayImage], edge_threshold: int = 128) -> BinaryImage:
    """Threshold the horizontal-gradient Sobel response.

    The magnitude ``|Gx| / 4`` (rounded half-up) shares the 0..255 scale of
    the input; the outermost ring of pixels is never marked.
    """
    if img.width < 3 or img.height < 3:
        raise ValueError(f"sobel_vertical needs at least 3x3 pixels, got {img.width}x{img.height}")
    if isinstance(img, BinaryImage):
        a = img.bits.astype(np.int64) * 255
    else:
        a = img.data.astype(np.int64)
    # column difference, then [1, 2, 1] smoothing down the rows
    d = a[:, 2:] - a[:, :-2]
    gx = d[:-2] + 2 * d[1:-1] + d[2:]
    mag = (np.abs(gx) + 2) // 4
    out = np.zeros(a.shape, dtype=np.uint8)
    out[1:-1, 1:-1] = mag >= edge_threshold
    return BinaryImage(out, Polarity.EDGE)


class IntegralImage:
    """Summed-area table of set bits.

    ``table[y, x]`` counts set bits in columns ``[0, x)`` and rows ``[0, y)``,
    so the table has shape ``(height + 1, width + 1)``.
    """

    def __init__(self, table: np.ndarray):
        self.table = table
        self.table.setflags(write=False)

    @property
    def width(self) -> int:
        return self.table.shape[1] - 1

    @property
    def height(self) -> int:
        return self.table.shape[0] - 1

    def at(self, x: int, y: int) -> int:
        return int(self.table[y, x])

    def total(self) -> int:
        return int(self.table[-1, -1])

    def window_count(self, box: BoundingBox) -> int:
        S = self.table
        return int(S[box.y2, box.x2] - S[box.y2, box.x] - S[box.y, box.x2] + S[box.y, box.x])

    def window_counts(self, w: int, h: int, stride: int = 1) -> np.ndarray:
        """Counts for every ``w x h`` window whose corner lies on the stride grid.

        Entry ``[i, j]`` is the window with top-left ``(j * stride, i * stride)``.
        """
        S = self.table
        ys = np.arange(0, self.height - h + 1, stride)
        xs = np.arange(0, self.width - w + 1, stride)
        Y, X = ys[:, None], xs[None, :]
        return S[Y + h, X + w] - S[Y + h, X] - S[Y, X + w] + S[Y, X]


def integral(img: BinaryImage) -> IntegralImage:
    table = np.zeros((img.height + 1, img.width + 1), dtype=np.int64)
    table[1:, 1:] = img.bits.astype(np.int64).cumsum(axis=0).cumsum(axis=1)
    return IntegralImage(table)


def window_sizes(width: int, height: int, cfg: LocateConfig) -> list:
    """Distinct ``(w, h)`` window sizes for a ``width x height`` frame."""
    sizes = []
    for frac in cfg.window_width_fracs:
        w = min(width, max(1, int(round(frac * width))))
        h = min(height, max(1, int(round(w / cfg.plate_aspect))))
        if (w, h) not in sizes:
            sizes.append((w, h))
    return sizes


def locate_plate(edges: BinaryImage, cfg: LocateConfig = LocateConfig()) -> BoundingBox:
    """Return the window with the highest vertical-edge density.

    Every configured window size is slid over the stride grid. Ties go to
    the topmost window, then the leftmost, then the smallest.
    """
    if edges.polarity is not Polarity.EDGE:
        raise ValueError("locate_plate expects an EDGE-polarity map")
    S = integral(edges)
    if S.total() == 0:
        raise NoEdgesError("edge map is empty")
    best = None
    best_key = None
    for w, h in window_sizes(edges.width, edges.height, cfg):
        counts = S.window_counts(w, h, cfg.stride)
        flat = int(np.argmax(counts))  # row-major: smallest y, then smallest x
        i, j = divmod(flat, counts.shape[1])
        density = Fraction(int(counts[i, j]), w * h)
        y, x = i * cfg.stride, j * cfg.stride
        key = (-density, y, x, w * h)
        if best_key is None or key < best_key:
            best_key = key
            best = BoundingBox(x, y, w, h)
    return best


def extract_plate(dilated: BinaryImage, box: BoundingBox) -> BinaryImage:
    """Cut the located plate out of the dilated ink image."""
    if dilated.polarity is not Polarity.INK:
        raise ValueError("extract_plate expects the dilated INK image")
    return crop(dilated, box)
