"""Augmented glyph samples and synthetic vehicle scenes with exact ground truth."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..classify.features import ALPHABET, SPECIAL_A, SPECIAL_B, GlyphSample
from ..image import BinaryImage, BoundingBox, GrayImage
from ..preprocess import dilate
from ..segment import normalize_glyph
from .atlas import SPECIAL_SYMBOLS, GlyphAtlas

__all__ = [
    "AugmentSpec",
    "SceneSpec",
    "CharTruth",
    "GroundTruth",
    "LayoutError",
    "render_glyph",
    "layout_plate",
    "render_scene",
    "random_scene_spec",
]


class LayoutError(ValueError):
    """The plate text does not fit the requested plate box or image."""


@dataclass(frozen=True)
class AugmentSpec:
    """Random perturbations applied to a glyph before normalization.

    ``stroke_growth`` dilations are always applied; they mirror the
    dilation that scene glyphs receive during preprocessing, so training
    glyphs carry the same stroke width as glyphs cut from real plates.
    ``bold_p`` adds one more dilation at random.
    """

    shift: int = 2
    noise_p: float = 0.02
    bold_p: float = 0.2
    seed: int = 0
    stroke_growth: int = 1

    def __post_init__(self):
        if self.shift < 0 or self.stroke_growth < 0:
            raise ValueError("shift and stroke_growth must be >= 0")
        for name in ("noise_p", "bold_p"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @classmethod
    def none(cls) -> "AugmentSpec":
        """No randomness and no stroke growth: a plain resize of the bitmap."""
        return cls(shift=0, noise_p=0.0, bold_p=0.0, stroke_growth=0)


def render_glyph(
    atlas: GlyphAtlas,
    symbol: str,
    aug: AugmentSpec = AugmentSpec(),
    rng: Optional[np.random.Generator] = None,
) -> GlyphSample:
    """One 20 x 20 training glyph for ``symbol``.

    The glyph is thickened, shifted by up to ``aug.shift`` pixels inside
    its box, sprinkled with salt-and-pepper noise and resampled to
    20 x 20. The same draws are consumed whatever the probabilities are,
    so two specs differing only in ``noise_p`` see identical shifts.
    """
    bitmap = atlas[symbol]
    if rng is None:
        rng = np.random.default_rng(aug.seed)
    s = aug.shift
    dx, dy = (int(v) for v in rng.integers(-s, s + 1, size=2))
    grow = aug.stroke_growth + int(rng.random() < aug.bold_p)

    canvas = np.pad(bitmap.bits, grow)
    if grow:
        canvas = dilate(BinaryImage(canvas), 1, grow).bits
    # the glyph moves by (dx, dy) inside its box; the box grows on the far
    # side rather than cutting strokes, as segmentation never cuts ink
    window = np.pad(canvas, ((max(dy, 0), max(-dy, 0)), (max(dx, 0), max(-dx, 0))))
    window ^= (rng.random(window.shape) < aug.noise_p).astype(np.uint8)
    return normalize_glyph(BinaryImage(window), label=symbol)


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one synthetic rear-view scene.

    ``symbols`` lists what is printed on the plate, left to right; it may
    include the special symbols, which are not part of the plate text.
    When ``plate_box`` is None the plate is sized to the text and centred
    horizontally in the lower half of the image.
    """

    symbols: Tuple[str, ...]
    width: int = 640
    height: int = 480
    plate_box: Optional[BoundingBox] = None
    clutter: float = 0.5
    gain: float = 1.0
    bias: float = 0.0
    noise_sigma: float = 3.0
    char_gap: int = 6
    blobs: bool = True
    bolts: bool = False
    seed: int = 0

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        bad = [s for s in symbols if s not in ALPHABET and s not in SPECIAL_SYMBOLS]
        if bad:
            raise ValueError(f"unknown plate symbols: {bad}")
        if not self.text:
            raise ValueError("plate text must contain at least one alphabet symbol")
        if self.width < 16 or self.height < 16:
            raise ValueError("image too small")
        if not 0.0 <= self.clutter <= 1.0:
            raise ValueError("clutter must lie in [0, 1]")
        if self.gain <= 0 or self.noise_sigma < 0 or self.char_gap < 1:
            raise ValueError("gain must be > 0, noise_sigma >= 0 and char_gap >= 1")
        if self.plate_box is not None and not self.plate_box.fits(self.width, self.height):
            raise ValueError("plate box lies outside the image")

    @property
    def text(self) -> str:
        return "".join(s for s in self.symbols if s in ALPHABET)


@dataclass(frozen=True)
class CharTruth:
    box: BoundingBox
    symbol: str


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """What was drawn: plate text, plate box and a tight box per symbol.

    ``ink`` marks the glyph pixels and ``clutter`` lists the drawn
    distractors; both are only available for freshly rendered scenes.
    """

    text: str
    plate_box: BoundingBox
    chars: Tuple[CharTruth, ...]
    ink: Optional[np.ndarray] = None
    clutter: Tuple[Tuple[str, BoundingBox], ...] = field(default=())

    def to_text(self) -> str:
        lines = [self.text, " ".join(map(str, self.plate_box.as_tuple()))]
        for c in self.chars:
            lines.append(" ".join(map(str, c.box.as_tuple())) + " " + c.symbol)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "GroundTruth":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise ValueError("truth file needs a text line and a plate box line")
        plate = _parse_box(lines[1].split())
        chars = []
        real = iter(lines[0])
        for ln in lines[2:]:
            parts = ln.split()
            if len(parts) == 4:
                # bare box: symbols follow the plate text in order
                symbol = next(real, None)
                if symbol is None:
                    raise ValueError("more character boxes than text symbols")
            elif len(parts) == 5:
                symbol = parts[4]
            else:
                raise ValueError(f"malformed character box line {ln!r}")
            chars.append(CharTruth(_parse_box(parts[:4]), symbol))
        return cls(lines[0], plate, tuple(chars))

    def equivalent(self, other: "GroundTruth") -> bool:
        """Same text and boxes (ink masks and clutter are ignored)."""
        return (self.text, self.plate_box, self.chars) == (other.text, other.plate_box, other.chars)


def _parse_box(tokens: Sequence[str]) -> BoundingBox:
    if len(tokens) != 4:
        raise ValueError("a box needs four integers: x y w h")
    return BoundingBox(*(int(t) for t in tokens))


def layout_plate(atlas: GlyphAtlas, spec: SceneSpec) -> Tuple[BoundingBox, List[CharTruth]]:
    """Plate box and tight symbol boxes, glyphs bottom-aligned and centred."""
    bitmaps = [atlas[s] for s in spec.symbols]
    text_w = sum(b.width for b in bitmaps) + spec.char_gap * (len(bitmaps) - 1)
    text_h = max(b.height for b in bitmaps)
    plate = spec.plate_box
    if plate is None:
        w, h = text_w + 24, text_h + 18
        plate = BoundingBox((spec.width - w) // 2, int(spec.height * 0.62) - h // 2, w, h)
        if not plate.fits(spec.width, spec.height):
            raise LayoutError("plate text does not fit the image")
    if text_w + 2 > plate.w or text_h + 2 > plate.h:
        raise LayoutError(
            f"text of {text_w}x{text_h} px does not fit a {plate.w}x{plate.h} plate"
        )
    x = plate.x + (plate.w - text_w) // 2
    bottom = plate.y + (plate.h - text_h) // 2 + text_h
    chars = []
    for symbol, b in zip(spec.symbols, bitmaps):
        chars.append(CharTruth(BoundingBox(x, bottom - b.height, b.width, b.height), symbol))
        x += b.width + spec.char_gap
    return plate, chars


def _keep_out(plate: BoundingBox, mx: int, my: int, width: int, height: int):
    x0, y0 = max(0, plate.x - mx), max(0, plate.y - my)
    x1, y1 = min(width, plate.x2 + mx), min(height, plate.y2 + my)
    return x0, y0, x1, y1


def _overlaps(box: BoundingBox, zone) -> bool:
    x0, y0, x1, y1 = zone
    return box.x < x1 and box.x2 > x0 and box.y < y1 and box.y2 > y0


def render_scene(
    atlas: GlyphAtlas,
    spec: SceneSpec,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[GrayImage, GroundTruth]:
    """Draw a car-like background, the plate and its glyphs.

    The body is light enough to binarize as background. Clutter consists
    of a dark windshield band above the plate, a bumper band below it,
    thin horizontal trim lines and dark rectangular blobs kept away from
    the plate; its amount scales with ``spec.clutter`` and ``clutter=0``
    draws none of it.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    H, W = spec.height, spec.width
    plate, chars = layout_plate(atlas, spec)

    body = rng.uniform(175.0, 215.0)
    ramp = rng.uniform(-12.0, 12.0)
    img = np.empty((H, W), dtype=np.float64)
    img[:] = body + ramp * np.linspace(-1.0, 1.0, H)[:, None]
    clutter: List[Tuple[str, BoundingBox]] = []

    def bar(kind, y0, y1, x0, x1, value):
        y0, y1 = max(0, y0), min(H, y1)
        if y1 > y0 and x1 > x0:
            img[y0:y1, x0:x1] = value
            clutter.append((kind, BoundingBox(x0, y0, x1 - x0, y1 - y0)))

    if spec.clutter > 0:
        gap, thick = rng.integers(20, 45), rng.integers(60, 140)
        x0, x1 = rng.integers(10, 60), W - rng.integers(10, 60)
        bar("windshield", plate.y - gap - thick, plate.y - gap, x0, x1, rng.uniform(40, 90))
        gap, thick = rng.integers(15, 35), rng.integers(15, 35)
        x0, x1 = rng.integers(10, 60), W - rng.integers(10, 60)
        bar("bumper", plate.y2 + gap, plate.y2 + gap + thick, x0, x1, rng.uniform(30, 80))

        rows_out = _keep_out(plate, 0, 15, W, H)
        for _ in range(int(round(spec.clutter * 4))):
            t = int(rng.integers(1, 4))
            y = int(rng.integers(0, H - t))
            x0, x1 = rng.integers(0, W // 4), W - rng.integers(0, W // 4)
            if y + t > rows_out[1] and y < rows_out[3]:
                continue
            bar("trim", y, y + t, x0, x1, rng.uniform(60, 120))

        if spec.blobs:
            zone = _keep_out(plate, 150, 30, W, H)
            for _ in range(int(round(spec.clutter * 16))):
                bw, bh = (int(v) for v in rng.integers(5, 29, size=2))
                value = rng.uniform(20, 100)
                for _attempt in range(50):
                    box = BoundingBox(int(rng.integers(0, W - bw)), int(rng.integers(0, H - bh)), bw, bh)
                    if not _overlaps(box, zone):
                        bar("blob", box.y, box.y2, box.x, box.x2, value)
                        break

    img[plate.y : plate.y2, plate.x : plate.x2] = rng.uniform(225.0, 245.0)
    ink_value = rng.uniform(20.0, 60.0)
    ink = np.zeros((H, W), dtype=bool)
    for c in chars:
        bits = atlas[c.symbol].bits.astype(bool)
        ink[c.box.y : c.box.y2, c.box.x : c.box.x2] |= bits
    if spec.bolts:
        for fx in (0.25, 0.75):
            bx = plate.x + int(plate.w * fx) - 1
            bolt = BoundingBox(bx, plate.y + 1, 3, 3)
            img[bolt.y : bolt.y2, bolt.x : bolt.x2] = ink_value
            clutter.append(("bolt", bolt))
    img[ink] = ink_value

    img = img * spec.gain + spec.bias
    if spec.noise_sigma > 0:
        img += rng.normal(0.0, spec.noise_sigma, size=img.shape)
    pixels = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)
    ink.setflags(write=False)
    truth = GroundTruth(spec.text, plate, tuple(chars), ink, tuple(clutter))
    return GrayImage(pixels), truth


def random_scene_spec(
    rng: np.random.Generator,
    atlas: Optional[GlyphAtlas] = None,
    clutter: float = 0.5,
    special_p: float = 0.0,
    noise_sigma: float = 3.0,
    width: int = 640,
    height: int = 480,
) -> SceneSpec:
    """A random plate of 5 to 8 symbols placed somewhere plausible.

    With probability ``special_p`` one special symbol is inserted between
    two groups; such plates carry at most 6 alphabet symbols so the
    printed width stays within the narrowest search window.
    """
    special = rng.random() < special_p
    n_real = int(rng.integers(5, 7 if special else 9))
    symbols = [ALPHABET[i] for i in rng.integers(0, len(ALPHABET), size=n_real)]
    if special:
        kind = SPECIAL_A if rng.random() < 0.5 else SPECIAL_B
        symbols.insert(int(rng.integers(2, n_real - 1)), kind)
    gap = int(rng.integers(5, 7))
    bolts = bool(rng.random() < 0.3)
    mx = int(rng.integers(8, 15))
    my = int(rng.integers(10, 12)) if bolts else int(rng.integers(7, 12))

    if atlas is None:
        from .atlas import load_atlas

        atlas = load_atlas()
    widths = [atlas[s].width for s in symbols]
    text_w = sum(widths) + gap * (len(symbols) - 1)
    text_h = max(atlas[s].height for s in symbols)
    pw, ph = text_w + 2 * mx, text_h + 2 * my
    x = int(rng.integers(40, width - pw - 40))
    y = int(rng.integers(int(height * 0.3), height - ph - 90))
    return SceneSpec(
        symbols=tuple(symbols),
        width=width,
        height=height,
        plate_box=BoundingBox(x, y, pw, ph),
        clutter=clutter,
        gain=float(rng.uniform(0.9, 1.1)),
        bias=float(rng.uniform(-10.0, 10.0)),
        noise_sigma=noise_sigma,
        char_gap=gap,
        bolts=bolts,
        seed=int(rng.integers(0, 2**63)),
    )
