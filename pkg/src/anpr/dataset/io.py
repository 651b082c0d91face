"""Dataset directory layout.

::

    glyphs/<LABEL>/<id>.pbm      20 x 20 glyphs; ids start with train-, validation- or test-
    scenes/<id>.pgm              grayscale scene
    scenes/<id>.truth            plate text, plate box, one "x y w h SYMBOL" line per symbol
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import List, Optional, Tuple

from ..classify.features import GlyphSample
from ..image import BinaryImage, GrayImage, read_netpbm, write_netpbm
from .render import GroundTruth
from .split import PARTS, DatasetSplit

__all__ = ["write_glyphs", "read_glyphs", "write_scene", "read_scene", "list_scenes"]


def write_glyphs(root, split: DatasetSplit) -> int:
    root = Path(os.fspath(root))
    n = 0
    for name in PARTS:
        for sample_id, g in zip(split.sample_ids(name), split.part(name)):
            folder = root / "glyphs" / g.label
            folder.mkdir(parents=True, exist_ok=True)
            write_netpbm(BinaryImage(g.pixels), folder / f"{sample_id}.pbm")
            n += 1
    return n


def _part_of(sample_id: str) -> str:
    for name in PARTS:
        if sample_id.startswith(name + "-"):
            return name
    # unprefixed glyphs (e.g. hand-labelled data) are training material
    return "train"


def read_glyphs(root, part: Optional[str] = None) -> Tuple[List[GlyphSample], List[str]]:
    """Glyphs under ``root/glyphs``, optionally only one split part, in sorted order."""
    folder = Path(os.fspath(root)) / "glyphs"
    if not folder.is_dir():
        raise FileNotFoundError(f"no glyphs directory in {root}")
    samples, ids = [], []
    for label_dir in sorted(p for p in folder.iterdir() if p.is_dir()):
        for path in sorted(label_dir.glob("*.pbm")):
            if part is not None and _part_of(path.stem) != part:
                continue
            img = read_netpbm(path)
            if not isinstance(img, BinaryImage):
                raise ValueError(f"{path} is not a bitmap")
            samples.append(GlyphSample(img.bits, label_dir.name))
            ids.append(path.stem)
    return samples, ids


def write_scene(root, scene_id: str, image: GrayImage, truth: GroundTruth) -> Path:
    folder = Path(os.fspath(root)) / "scenes"
    folder.mkdir(parents=True, exist_ok=True)
    path = folder / f"{scene_id}.pgm"
    write_netpbm(image, path)
    (folder / f"{scene_id}.truth").write_text(truth.to_text(), encoding="ascii")
    return path


def read_scene(path) -> Tuple[GrayImage, GroundTruth]:
    path = Path(os.fspath(path))
    img = read_netpbm(path)
    if isinstance(img, BinaryImage):
        img = img.to_gray()
    truth = GroundTruth.from_text(path.with_suffix(".truth").read_text(encoding="ascii"))
    return img, truth


def list_scenes(root) -> List[Path]:
    """Scene images that have a truth file, sorted by name."""
    folder = Path(os.fspath(root)) / "scenes"
    if not folder.is_dir():
        raise FileNotFoundError(f"no scenes directory in {root}")
    return sorted(
        p for p in folder.iterdir()
        if p.suffix in (".pgm", ".ppm", ".pbm") and p.with_suffix(".truth").exists()
    )
