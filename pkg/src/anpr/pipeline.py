"""End-to-end plate reading: preprocessing, localization, segmentation, classification."""

from __future__ import annotations

import copy
import dataclasses
import json
import os
import time
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .classify.features import ALPHABET, Prediction, RejectionThresholds
from .classify.forest import RandomForestGlyphClassifier
from .classify.knn import KnnGlyphClassifier
from .image import BinaryImage, BoundingBox, GrayImage, RgbImage, crop
from .locate import LocateConfig, NoEdgesError, extract_plate, locate_plate, sobel_vertical
from .preprocess import PreprocessConfig, preprocess_stages
from .segment import (
    Axis,
    EmptyPlateError,
    SegmentConfig,
    normalize_glyph,
    project,
    select_character_band,
    split_characters,
)

__all__ = [
    "PipelineConfig",
    "CharReading",
    "PlateReading",
    "ConfigError",
    "recognize",
    "score_reading",
    "character_accuracy",
    "load_config",
    "parse_config",
    "apply_overrides",
    "PlateRecognizer",
    "GlyphFeaturizer",
]

CLASSIFIERS = ("forest", "knn")


class ConfigError(ValueError):
    """Unknown key or unparsable value in a pipeline configuration."""


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for every stage.

    ``thresholds`` overrides the rejection thresholds stored with the
    model; None keeps the model's own (calibrated) values.
    """

    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    locate: LocateConfig = field(default_factory=LocateConfig)
    segment: SegmentConfig = field(default_factory=SegmentConfig)
    classifier: str = "forest"
    thresholds: Optional[RejectionThresholds] = None
    seed: int = 0

    def __post_init__(self):
        if self.classifier not in CLASSIFIERS:
            raise ValueError(f"classifier must be one of {CLASSIFIERS}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class CharReading:
    box: BoundingBox
    prediction: Prediction

    def to_dict(self) -> dict:
        return {"box": list(self.box.as_tuple()), **self.prediction.to_dict()}


@dataclass(frozen=True)
class PlateReading:
    """Result of :func:`recognize`; boxes are in image coordinates.

    ``plate_box`` is None when no plate could be found.
    """

    text: str
    per_char: Tuple[CharReading, ...]
    plate_box: Optional[BoundingBox]
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def found(self) -> bool:
        return self.plate_box is not None

    def to_dict(self, timings: bool = False) -> dict:
        d = {
            "found": self.found,
            "text": self.text,
            "plate_box": list(self.plate_box.as_tuple()) if self.found else None,
            "chars": [c.to_dict() for c in self.per_char],
        }
        if timings:
            d["timings_ms"] = dict(self.timings)
        return d

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True)


def _with_thresholds(model, thresholds: Optional[RejectionThresholds]):
    if thresholds is None:
        return model
    model = copy.copy(model)
    model.thresholds = thresholds
    return model


def recognize(image, model, cfg: Optional[PipelineConfig] = None, debug: Optional[dict] = None) -> PlateReading:
    """Read the plate in ``image`` (a GrayImage or RgbImage).

    When ``debug`` is a dict it receives every intermediate image and the
    two projection profiles, keyed by stage name.
    """
    if not isinstance(image, (GrayImage, RgbImage)):
        raise TypeError(f"expected GrayImage or RgbImage, got {type(image).__name__}")
    cfg = cfg or PipelineConfig()
    model = _with_thresholds(model, cfg.thresholds)
    timings: Dict[str, float] = {}
    clock = time.perf_counter()

    def lap(stage):
        nonlocal clock
        now = time.perf_counter()
        timings[stage] = round((now - clock) * 1000.0, 3)
        clock = now

    stages = preprocess_stages(image, cfg.preprocess)
    dilated = stages["dilated"]
    lap("preprocess")
    edges = sobel_vertical(dilated, cfg.locate.edge_threshold)
    if debug is not None:
        debug.update(stages)
        debug["edges"] = edges
    try:
        box = locate_plate(edges, cfg.locate)
    except NoEdgesError:
        lap("locate")
        return PlateReading("", (), None, timings)
    lap("locate")

    plate = extract_plate(dilated, box)
    try:
        band = select_character_band(plate, cfg.locate.edge_threshold)
    except EmptyPlateError:
        lap("segment")
        return PlateReading("", (), None, timings)
    rows = crop(plate, BoundingBox(0, band.start, plate.width, band.width))
    boxes = split_characters(rows, cfg.segment)
    glyphs = [normalize_glyph(crop(rows, b), cfg.segment) for b in boxes]
    lap("segment")
    if debug is not None:
        debug["plate"] = plate
        debug["characters"] = rows
        debug["row_profile"] = project(sobel_vertical(plate, cfg.locate.edge_threshold), Axis.ROWS)
        debug["column_profile"] = project(rows, Axis.COLUMNS)
        debug["plate_box"] = box

    predictions = model.predict_outcomes(glyphs) if glyphs else []
    lap("classify")
    per_char = tuple(
        CharReading(b.offset(box.x, box.y + band.start), p) for b, p in zip(boxes, predictions)
    )
    text = "".join(c.prediction.label for c in per_char if c.prediction.accepted)
    return PlateReading(text, per_char, box, timings)


# --- scoring ---------------------------------------------------------------


def _overlap(a0: int, a1: int, b0: int, b1: int) -> bool:
    return a0 < b1 and b0 < a1


def score_reading(reading: PlateReading, truth) -> Tuple[int, int, int]:
    """``(correct, spurious, total)`` for one scene.

    Predicted and true boxes are both ordered left to right and walked in
    step: a pair whose column ranges overlap is matched, otherwise the box
    that ends first is left unmatched. ``correct`` counts true alphabet
    characters matched to an accepted glyph with the same label;
    ``spurious`` counts accepted glyphs not matched to a true alphabet
    character; ``total`` is the number of true alphabet characters.
    """
    gt = sorted(truth.chars, key=lambda c: (c.box.x, c.box.y))
    pred = sorted(reading.per_char, key=lambda c: (c.box.x, c.box.y))
    total = sum(1 for c in gt if c.symbol in ALPHABET)
    correct = spurious = 0
    i = j = 0
    while i < len(pred) and j < len(gt):
        p, g = pred[i], gt[j]
        if _overlap(p.box.x, p.box.x2, g.box.x, g.box.x2):
            if p.prediction.accepted:
                if g.symbol in ALPHABET and p.prediction.label == g.symbol:
                    correct += 1
                elif g.symbol not in ALPHABET:
                    spurious += 1
            i += 1
            j += 1
        elif p.box.x2 <= g.box.x:
            spurious += int(p.prediction.accepted)
            i += 1
        else:
            j += 1
    spurious += sum(1 for p in pred[i:] if p.prediction.accepted)
    return correct, spurious, total


def character_accuracy(scores: Iterable[Tuple[int, int, int]]) -> float:
    """``max(0, correct - spurious) / total`` summed over scenes."""
    correct = spurious = total = 0
    for c, s, t in scores:
        correct, spurious, total = correct + c, spurious + s, total + t
    if total == 0:
        raise ValueError("no ground-truth characters to score against")
    return max(0, correct - spurious) / total


# --- configuration files ---------------------------------------------------

_SECTIONS = {
    "preprocess": PreprocessConfig,
    "locate": LocateConfig,
    "segment": SegmentConfig,
    "thresholds": RejectionThresholds,
}


def _field_owner() -> Dict[str, str]:
    owner = {}
    for section, cls in _SECTIONS.items():
        for f in dataclasses.fields(cls):
            owner[f.name] = section
    return owner


def _convert(section: str, name: str, raw: str):
    default = getattr(_SECTIONS[section](), name)
    try:
        if isinstance(default, bool):
            return raw.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"bad value for {section}.{name}: {raw!r}") from None
    return raw


def apply_overrides(cfg: PipelineConfig, values: Mapping[str, str]) -> PipelineConfig:
    """Return ``cfg`` with ``key=value`` settings applied.

    Keys are either ``section.field`` (for example ``preprocess.clahe_clip``)
    or a bare field name, which is unambiguous across sections, or one of
    ``classifier`` and ``seed``.
    """
    owner = _field_owner()
    updates: Dict[str, Dict[str, object]] = {s: {} for s in _SECTIONS}
    top: Dict[str, object] = {}
    for key, raw in values.items():
        key = key.strip()
        raw = str(raw).strip()
        if key == "classifier":
            top["classifier"] = raw
            continue
        if key == "seed":
            try:
                top["seed"] = int(raw)
            except ValueError:
                raise ConfigError(f"bad value for seed: {raw!r}") from None
            continue
        section, _, name = key.rpartition(".")
        if not section:
            section = owner.get(name, "")
        if section not in _SECTIONS or name not in {f.name for f in dataclasses.fields(_SECTIONS[section])}:
            raise ConfigError(f"unknown configuration key {key!r}")
        updates[section][name] = _convert(section, name, raw)
    try:
        kwargs = dict(top)
        for section in ("preprocess", "locate", "segment"):
            if updates[section]:
                kwargs[section] = dataclasses.replace(getattr(cfg, section), **updates[section])
        if updates["thresholds"]:
            base = cfg.thresholds or RejectionThresholds()
            kwargs["thresholds"] = dataclasses.replace(base, **updates["thresholds"])
        return dataclasses.replace(cfg, **kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(text: str, base: Optional[PipelineConfig] = None) -> PipelineConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment, ``[section]`` headers prefix keys."""
    values: Dict[str, str] = {}
    section = ""
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values[f"{section}.{key}" if section else key] = value
    return apply_overrides(base or PipelineConfig(), values)


def load_config(path, base: Optional[PipelineConfig] = None) -> PipelineConfig:
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_config(fh.read(), base)


# --- estimators ------------------------------------------------------------


class GlyphFeaturizer(TransformerMixin, BaseEstimator):
    """Turn binary character crops into rows of 400 pixel features."""

    def __init__(self, segment=None):
        self.segment = segment

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> np.ndarray:
        cfg = self.segment or SegmentConfig()
        rows = []
        for crop_ in X:
            if not isinstance(crop_, BinaryImage):
                raise TypeError("expected BinaryImage character crops")
            rows.append(normalize_glyph(crop_, cfg).pixels.reshape(-1))
        return np.stack(rows) if rows else np.zeros((0, cfg.glyph_size**2), np.uint8)


class PlateRecognizer(BaseEstimator):
    """Plate reader with an estimator interface.

    ``fit`` trains the glyph classifier on labelled 20 x 20 glyphs,
    ``calibrate`` sets its rejection thresholds from a validation set with
    special symbols, and ``predict`` maps scene images to plate strings.
    """

    def __init__(
        self,
        classifier="forest",
        n_trees=100,
        k=3,
        seed=0,
        n_jobs=None,
        preprocess=None,
        locate=None,
        segment=None,
        thresholds=None,
    ):
        self.classifier = classifier
        self.n_trees = n_trees
        self.k = k
        self.seed = seed
        self.n_jobs = n_jobs
        self.preprocess = preprocess
        self.locate = locate
        self.segment = segment
        self.thresholds = thresholds

    def _make_model(self):
        if self.classifier == "forest":
            return RandomForestGlyphClassifier(
                n_trees=self.n_trees, seed=self.seed, thresholds=self.thresholds, n_jobs=self.n_jobs
            )
        if self.classifier == "knn":
            return KnnGlyphClassifier(k=self.k, thresholds=self.thresholds)
        raise ValueError(f"classifier must be one of {CLASSIFIERS}")

    def fit(self, X, y):
        self.model_ = self._make_model().fit(X, y)
        return self

    def calibrate(self, X, labels, target: float = 0.95):
        """Set thresholds from validation glyphs; returns the calibration report."""
        from .dataset.calibrate import calibrate_thresholds

        th, report = calibrate_thresholds(self.model_, X, labels, target)
        self.model_.set_params(thresholds=th)
        self.calibration_ = report
        return report

    @property
    def config_(self) -> PipelineConfig:
        return PipelineConfig(
            preprocess=self.preprocess or PreprocessConfig(),
            locate=self.locate or LocateConfig(),
            segment=self.segment or SegmentConfig(),
            classifier=self.classifier,
            seed=self.seed,
        )

    def read(self, image, debug: Optional[dict] = None) -> PlateReading:
        return recognize(image, self.model_, self.config_, debug)

    def predict(self, images: Sequence) -> np.ndarray:
        return np.array([self.read(img).text for img in images], dtype=object)

    def score(self, images: Sequence, truths: Sequence) -> float:
        """Character accuracy over the given scenes."""
        return character_accuracy(score_reading(self.read(img), t) for img, t in zip(images, truths))
