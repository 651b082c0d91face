"""Grayscale conversion, bilateral denoising, CLAHE, binarization, dilation.

Each kernel is a pure function on the image types of :mod:`anpr.image`.
Rounding is always half-up (``floor(v + 0.5)``) so results are identical
to a straightforward scalar implementation of the same formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .image import BinaryImage, GrayImage, Polarity, RgbImage

__all__ = [
    "PreprocessConfig",
    "to_grayscale",
    "bilateral_filter",
    "clahe",
    "binarize",
    "dilate",
    "preprocess",
    "preprocess_stages",
]


@dataclass(frozen=True)
class PreprocessConfig:
    bilateral_kernel: int = 5
    bilateral_sigma_space: float = 2.0
    bilateral_sigma_range: float = 50.0
    clahe_tile: int = 8
    clahe_clip: float = 2.0
    binarize_threshold: int = 128
    dilate_radius: int = 1
    dilate_iterations: int = 1

    def __post_init__(self):
        if self.bilateral_kernel < 3 or self.bilateral_kernel % 2 == 0:
            raise ValueError("bilateral_kernel must be odd and >= 3")
        if self.bilateral_sigma_space <= 0 or self.bilateral_sigma_range <= 0:
            raise ValueError("bilateral sigmas must be positive")
        if self.clahe_tile < 2:
            raise ValueError("clahe_tile must be >= 2")
        if self.clahe_clip < 1:
            raise ValueError("clahe_clip must be >= 1")
        if not 0 <= self.binarize_threshold <= 255:
            raise ValueError("binarize_threshold must lie in [0, 255]")
        if self.dilate_radius < 1:
            raise ValueError("dilate_radius must be >= 1")
        if self.dilate_iterations < 0:
            raise ValueError("dilate_iterations must be >= 0")


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


def to_grayscale(img: RgbImage) -> GrayImage:
    """Luma conversion ``0.299 r + 0.587 g + 0.114 b``."""
    rgb = img.data.astype(np.float64)
    y = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return GrayImage(np.clip(_round_half_up(y), 0, 255).astype(np.uint8))


def _spatial_weights(kernel: int, sigma: float) -> np.ndarray:
    half = kernel // 2
    denom = 2.0 * sigma * sigma
    return np.array(
        [
            [math.exp(-(dy * dy + dx * dx) / denom) for dx in range(-half, half + 1)]
            for dy in range(-half, half + 1)
        ]
    )


def _range_weights(sigma: float) -> np.ndarray:
    denom = 2.0 * sigma * sigma
    return np.array([math.exp(-(d * d) / denom) for d in range(256)])


def bilateral_filter(img: GrayImage, cfg: PreprocessConfig = PreprocessConfig()) -> GrayImage:
    """Edge-preserving smoothing over a ``k x k`` window with clamped borders.

    The weight of neighbour ``q`` for centre ``p`` is the product of a
    spatial Gaussian on ``|p - q|`` and a range Gaussian on the intensity
    difference. Both factors are tabulated up front (the range factor only
    depends on ``|in(p) - in(q)|`` in 0..255).
    """
    k = cfg.bilateral_kernel
    half = k // 2
    spatial = _spatial_weights(k, cfg.bilateral_sigma_space)
    rng_lut = _range_weights(cfg.bilateral_sigma_range)

    src = img.data.astype(np.int64)
    padded = np.pad(src, half, mode="edge")
    h, w = src.shape
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    for i in range(k):
        for j in range(k):
            q = padded[i : i + h, j : j + w]
            wgt = spatial[i, j] * rng_lut[np.abs(q - src)]
            num = num + wgt * q
            den = den + wgt
    out = _round_half_up(num / den)
    return GrayImage(np.clip(out, 0, 255).astype(np.uint8))


def _tile_mappings(padded: np.ndarray, tile: int, clip: float) -> np.ndarray:
    """Per-tile lookup tables, shape ``(tiles_y, tiles_x, 256)``."""
    ph, pw = padded.shape
    ty, tx = ph // tile, pw // tile
    tiles = padded.reshape(ty, tile, tx, tile).transpose(0, 2, 1, 3).reshape(ty, tx, -1)
    npix = tile * tile
    offsets = (np.arange(ty * tx) * 256).reshape(ty, tx, 1)
    hist = np.bincount((tiles + offsets).ravel(), minlength=ty * tx * 256)
    hist = hist.reshape(ty, tx, 256).astype(np.float64)

    limit = clip * (npix / 256)
    clipped = np.minimum(hist, limit)
    excess = npix - clipped.sum(axis=2, keepdims=True)
    cdf = np.cumsum(clipped + excess / 256, axis=2)
    # cdf is strictly positive once any excess exists; otherwise the first
    # occupied bin gives the smallest nonzero value
    cdf_min = np.where(cdf > 0, cdf, np.inf).min(axis=2, keepdims=True)
    denom = npix - cdf_min
    safe = np.where(denom > 0, denom, 1.0)
    lut = _round_half_up((cdf - cdf_min) / safe * 255)
    lut = np.clip(lut, 0, 255)

    flat = tiles.min(axis=2) == tiles.max(axis=2)
    identity = np.broadcast_to(np.arange(256, dtype=np.float64), lut.shape)
    return np.where(flat[..., None] | (denom <= 0), identity, lut)


def _interp_axis(n: int, tile: int, ntiles: int):
    pos = (np.arange(n) + 0.5) / tile - 0.5
    base = np.floor(pos)
    frac = pos - base
    lo = base.astype(np.int64)
    hi = lo + 1
    frac = np.where(lo < 0, 0.0, frac)
    frac = np.where(hi > ntiles - 1, 0.0, frac)
    lo = np.clip(lo, 0, ntiles - 1)
    hi = np.clip(hi, 0, ntiles - 1)
    return lo, hi, frac


def clahe(img: GrayImage, cfg: PreprocessConfig = PreprocessConfig()) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Histograms are clipped at ``clahe_clip * tile_pixels / 256`` with a
    single uniform redistribution of the excess. Pixels take the bilinear
    blend of the four nearest tile-centre mappings. Tiles whose pixels
    are all equal map through the identity.
    """
    t = cfg.clahe_tile
    h, w = img.height, img.width
    pad_y = (-h) % t
    pad_x = (-w) % t
    padded = np.pad(img.data.astype(np.int64), ((0, pad_y), (0, pad_x)), mode="edge")
    luts = _tile_mappings(padded, t, cfg.clahe_clip)
    ty, tx = luts.shape[:2]

    y0, y1, fy = _interp_axis(h, t, ty)
    x0, x1, fx = _interp_axis(w, t, tx)
    v = img.data.astype(np.int64)
    Y0, X0 = y0[:, None], x0[None, :]
    Y1, X1 = y1[:, None], x1[None, :]
    FY, FX = fy[:, None], fx[None, :]
    m00 = luts[Y0, X0, v]
    m01 = luts[Y0, X1, v]
    m10 = luts[Y1, X0, v]
    m11 = luts[Y1, X1, v]
    top = (1 - FX) * m00 + FX * m01
    bottom = (1 - FX) * m10 + FX * m11
    out = _round_half_up((1 - FY) * top + FY * bottom)
    return GrayImage(np.clip(out, 0, 255).astype(np.uint8))


def binarize(img: GrayImage, threshold: int = 128) -> BinaryImage:
    """Intensities below ``threshold`` become ink (1); the rest stay white."""
    if not 0 <= threshold <= 255:
        raise ValueError("threshold must lie in [0, 255]")
    return BinaryImage((img.data < threshold).astype(np.uint8), Polarity.INK)


def _dilate_once(bits: np.ndarray, r: int) -> np.ndarray:
    h, w = bits.shape
    rows = np.zeros_like(bits)
    # offsets past the image edge contribute nothing
    for d in range(-min(r, w - 1), min(r, w - 1) + 1):
        if d >= 0:
            rows[:, : w - d] |= bits[:, d:]
        else:
            rows[:, -d:] |= bits[:, : w + d]
    out = np.zeros_like(bits)
    for d in range(-min(r, h - 1), min(r, h - 1) + 1):
        if d >= 0:
            out[: h - d, :] |= rows[d:, :]
        else:
            out[-d:, :] |= rows[: h + d, :]
    return out


def dilate(img: BinaryImage, radius: int = 1, iterations: int = 1) -> BinaryImage:
    """Square ``(2r+1) x (2r+1)`` binary dilation, neighbourhoods clipped at borders."""
    if img.polarity is not Polarity.INK:
        raise ValueError("dilate expects an INK-polarity image")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    bits = img.bits.copy()
    for _ in range(iterations):
        bits = _dilate_once(bits, radius)
    return BinaryImage(bits, Polarity.INK)


def preprocess_stages(
    img: Union[RgbImage, GrayImage], cfg: PreprocessConfig = PreprocessConfig()
) -> dict:
    """Run the full chain and keep every intermediate, keyed by stage name."""
    stages = {}
    gray = to_grayscale(img) if isinstance(img, RgbImage) else img
    if not isinstance(gray, GrayImage):
        raise TypeError(f"expected RgbImage or GrayImage, got {type(img).__name__}")
    stages["gray"] = gray
    stages["denoised"] = bilateral_filter(gray, cfg)
    stages["contrast"] = clahe(stages["denoised"], cfg)
    stages["binary"] = binarize(stages["contrast"], cfg.binarize_threshold)
    stages["dilated"] = dilate(stages["binary"], cfg.dilate_radius, cfg.dilate_iterations)
    return stages


def preprocess(img: Union[RgbImage, GrayImage], cfg: PreprocessConfig = PreprocessConfig()):
    """Return ``(binary, dilated)`` for an RGB or grayscale frame."""
    stages = preprocess_stages(img, cfg)
    return stages["binary"], stages["dilated"]
