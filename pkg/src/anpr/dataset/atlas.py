"""Bundled glyph bitmaps for the 36 plate symbols and two special symbols."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path
from typing import Dict, Iterator, Optional

from ..classify.features import ALPHABET, SPECIAL_A, SPECIAL_B
from ..image import BinaryImage, Polarity, parse_netpbm

__all__ = ["GlyphAtlas", "SPECIAL_SYMBOLS", "load_atlas"]

SPECIAL_SYMBOLS = (SPECIAL_A, SPECIAL_B)


class GlyphAtlas:
    """Native-resolution binary bitmaps keyed by symbol.

    Every alphabet symbol must be present; ``SPECIAL_A`` (a sparse blot)
    and ``SPECIAL_B`` (a dense emblem) are optional extras that never
    appear in the classifier alphabet.
    """

    def __init__(self, glyphs: Dict[str, BinaryImage]):
        missing = [s for s in ALPHABET if s not in glyphs]
        if missing:
            raise ValueError(f"atlas is missing symbols: {''.join(missing)}")
        unknown = set(glyphs) - set(ALPHABET) - set(SPECIAL_SYMBOLS)
        if unknown:
            raise ValueError(f"unknown atlas symbols: {sorted(unknown)}")
        for symbol, bitmap in glyphs.items():
            if not isinstance(bitmap, BinaryImage) or bitmap.polarity is not Polarity.INK:
                raise TypeError(f"atlas entry {symbol!r} must be an INK BinaryImage")
            if bitmap.count() == 0:
                raise ValueError(f"atlas entry {symbol!r} has no ink")
        self._glyphs = dict(glyphs)

    def __getitem__(self, symbol: str) -> BinaryImage:
        try:
            return self._glyphs[symbol]
        except KeyError:
            raise KeyError(f"symbol {symbol!r} is not in the atlas") from None

    def __contains__(self, symbol) -> bool:
        return symbol in self._glyphs

    def __iter__(self) -> Iterator[str]:
        return iter(self._glyphs)

    def __len__(self) -> int:
        return len(self._glyphs)

    @property
    def specials(self) -> tuple:
        return tuple(s for s in SPECIAL_SYMBOLS if s in self._glyphs)

    @classmethod
    def from_directory(cls, path) -> "GlyphAtlas":
        """Load ``<SYMBOL>.pbm`` files from a directory."""
        glyphs = {}
        for entry in sorted(Path(os.fspath(path)).glob("*.pbm")):
            glyphs[entry.stem] = _as_bitmap(entry.read_bytes(), entry.name)
        return cls(glyphs)


def _as_bitmap(data: bytes, name: str) -> BinaryImage:
    img = parse_netpbm(data)
    if not isinstance(img, BinaryImage):
        raise ValueError(f"{name} is not a bitmap")
    return img


_BUNDLED: Optional[GlyphAtlas] = None


def load_atlas(path=None) -> GlyphAtlas:
    """The atlas in ``path``, or the bundled one when ``path`` is None."""
    global _BUNDLED
    if path is not None:
        return GlyphAtlas.from_directory(path)
    if _BUNDLED is None:
        root = resources.files(__package__).joinpath("atlas")
        glyphs = {}
        for entry in root.iterdir():
            if entry.name.endswith(".pbm"):
                glyphs[entry.name[:-4]] = _as_bitmap(entry.read_bytes(), entry.name)
        _BUNDLED = GlyphAtlas(glyphs)
    return _BUNDLED
