"""Glyph samples, 400-pixel feature vectors and prediction outcomes."""

from __future__ import annotations

import enum
import string
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.utils.validation import check_array

__all__ = [
    "ALPHABET",
    "SPECIAL_A",
    "SPECIAL_B",
    "N_FEATURES",
    "GlyphSample",
    "RejectionThresholds",
    "Outcome",
    "Prediction",
    "featurize",
    "unflatten",
    "ink_count",
    "check_glyphs",
    "check_labels",
]

ALPHABET = tuple(string.digits + string.ascii_uppercase)
SPECIAL_A = "SPECIAL_A"
SPECIAL_B = "SPECIAL_B"
N_FEATURES = 400
_SIDE = 20


@dataclass(frozen=True, eq=False)
class GlyphSample:
    """A 20 x 20 binary character image with an optional label."""

    pixels: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.shape != (_SIDE, _SIDE):
            raise ValueError(f"glyph must be {_SIDE}x{_SIDE}, got {px.shape}")
        if px.dtype == bool:
            px = px.astype(np.uint8)
        if px.size and (px.min() < 0 or px.max() > 1):
            raise ValueError("glyph cells must be 0 or 1")
        px = np.array(px, dtype=np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    def __eq__(self, other):
        if not isinstance(other, GlyphSample):
            return NotImplemented
        return self.label == other.label and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


@dataclass(frozen=True)
class RejectionThresholds:
    """Special-character filters.

    ``min_ink``: glyphs with fewer ink cells are rejected outright (class A).
    ``max_distance``: kNN rejects when the mean neighbour distance exceeds it.
    ``min_vote``: the forest rejects when the winning vote share is below it.
    """

    min_ink: int = 40
    max_distance: float = 120.0
    min_vote: float = 0.35

    def __post_init__(self):
        object.__setattr__(self, "min_ink", int(self.min_ink))
        object.__setattr__(self, "max_distance", float(self.max_distance))
        object.__setattr__(self, "min_vote", float(self.min_vote))
        if not 0 <= self.min_ink <= N_FEATURES:
            raise ValueError("min_ink must lie in [0, 400]")
        if self.max_distance < 0:
            raise ValueError("max_distance must be >= 0")
        if not 0 <= self.min_vote <= 1:
            raise ValueError("min_vote must lie in [0, 1]")


class Outcome(enum.Enum):
    ACCEPTED = "accepted"
    REJECTED_CLASS_A = "rejected_class_a"
    REJECTED_CLASS_B = "rejected_class_b"


@dataclass(frozen=True)
class Prediction:
    outcome: Outcome
    label: Optional[str] = None
    confidence: Optional[float] = None

    def __post_init__(self):
        if (self.outcome is Outcome.ACCEPTED) != (self.confidence is not None):
            raise ValueError("confidence is present exactly when the glyph is accepted")

    @property
    def accepted(self) -> bool:
        return self.outcome is Outcome.ACCEPTED

    def to_dict(self) -> dict:
        d = {"outcome": self.outcome.value}
        if self.accepted:
            d["label"] = self.label
            d["confidence"] = self.confidence
        return d


def featurize(g: GlyphSample) -> np.ndarray:
    """Row-major flattening of the glyph into 400 values."""
    return g.pixels.reshape(N_FEATURES).copy()


def unflatten(v, label=None) -> GlyphSample:
    return GlyphSample(np.asarray(v).reshape(_SIDE, _SIDE), label)


def ink_count(g) -> int:
    px = g.pixels if isinstance(g, GlyphSample) else np.asarray(g)
    return int(px.sum(dtype=np.int64))


def check_glyphs(X) -> np.ndarray:
    """Coerce glyphs into an ``(n_samples, 400)`` uint8 matrix of 0/1 values.

    Accepts a sequence of :class:`GlyphSample`, an ``(n, 20, 20)`` stack or
    an ``(n, 400)`` matrix.
    """
    if isinstance(X, GlyphSample):
        X = [X]
    if isinstance(X, (list, tuple)) and X and isinstance(X[0], GlyphSample):
        X = np.stack([g.pixels for g in X])
    arr = np.asarray(X)
    if arr.ndim == 3:
        if arr.shape[1:] != (_SIDE, _SIDE):
            raise ValueError(f"expected glyphs of shape (n, 20, 20), got {arr.shape}")
        arr = arr.reshape(len(arr), N_FEATURES)
    arr = check_array(arr, dtype=None, ensure_2d=True)
    if arr.shape[1] != N_FEATURES:
        raise ValueError(f"expected {N_FEATURES} features, got {arr.shape[1]}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("glyph features must be 0 or 1")
    return arr.astype(np.uint8)


def check_labels(y, n: int) -> np.ndarray:
    labels = np.asarray(y, dtype=object).ravel()
    if len(labels) != n:
        raise ValueError(f"got {len(labels)} labels for {n} samples")
    unknown = sorted({str(l) for l in labels} - set(ALPHABET))
    if unknown:
        raise ValueError(f"labels outside the 36-symbol alphabet: {unknown[:5]}")
    return np.array([ALPHABET.index(str(l)) for l in labels], dtype=np.int64)
