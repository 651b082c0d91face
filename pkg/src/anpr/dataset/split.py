"""Deterministic train / validation / test glyph splits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..classify.features import ALPHABET, GlyphSample
from .atlas import SPECIAL_SYMBOLS, GlyphAtlas
from .render import AugmentSpec, render_glyph

__all__ = ["DatasetSplit", "PARTS", "DEFAULT_COUNTS", "build_split", "scale_counts"]

PARTS = ("train", "validation", "test")
DEFAULT_COUNTS = (220, 30, 100)


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint glyph lists; sample ids are ``<part>-<label>-<index>``."""

    train: Tuple[GlyphSample, ...]
    validation: Tuple[GlyphSample, ...]
    test: Tuple[GlyphSample, ...]

    def part(self, name: str) -> Tuple[GlyphSample, ...]:
        if name not in PARTS:
            raise KeyError(f"unknown split part {name!r}")
        return getattr(self, name)

    def sample_ids(self, name: str) -> List[str]:
        seen: Dict[str, int] = {}
        ids = []
        for g in self.part(name):
            i = seen.get(g.label, 0)
            seen[g.label] = i + 1
            ids.append(f"{name}-{g.label}-{i:04d}")
        return ids

    def arrays(self, name: str) -> Tuple[np.ndarray, List[str]]:
        """``(X, labels)`` with ``X`` of shape ``(n, 400)``."""
        samples = self.part(name)
        X = np.stack([g.pixels.reshape(-1) for g in samples]) if samples else np.zeros((0, 400), np.uint8)
        return X, [g.label for g in samples]


def scale_counts(per_class: int) -> Tuple[int, int, int]:
    """Split ``per_class`` samples in the default 220/30/100 proportions."""
    if per_class < 3:
        raise ValueError("need at least 3 samples per class (one per part)")
    total = sum(DEFAULT_COUNTS)
    val = max(1, round(per_class * DEFAULT_COUNTS[1] / total))
    test = max(1, round(per_class * DEFAULT_COUNTS[2] / total))
    return per_class - val - test, val, test


def build_split(
    atlas: GlyphAtlas,
    counts: Sequence[int] = DEFAULT_COUNTS,
    aug: AugmentSpec = AugmentSpec(),
    seed: int = 0,
    specials: int = 60,
) -> DatasetSplit:
    """Render ``counts[k]`` glyphs per class for train, validation and test.

    Validation and test also receive ``specials`` samples of each special
    symbol in the atlas (labelled ``SPECIAL_A`` / ``SPECIAL_B``) for
    threshold calibration. Every sample draws from its own generator,
    seeded by ``(seed, part, symbol, index)``, so a sample never depends
    on how many others were requested.
    """
    counts = tuple(int(c) for c in counts)
    if len(counts) != 3 or min(counts) < 1:
        raise ValueError("counts must give at least one sample per class for each part")
    if specials < 0:
        raise ValueError("specials must be >= 0")
    symbols = list(ALPHABET) + [s for s in SPECIAL_SYMBOLS if s in atlas]
    parts = []
    for p, name in enumerate(PARTS):
        samples = []
        for k, symbol in enumerate(symbols):
            if symbol in ALPHABET:
                n = counts[p]
            else:
                n = specials if name != "train" else 0
            for i in range(n):
                rng = np.random.default_rng([seed, aug.seed, p, k, i])
                samples.append(render_glyph(atlas, symbol, aug, rng))
        parts.append(tuple(samples))
    return DatasetSplit(*parts)
