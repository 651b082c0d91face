"""Synthetic glyphs and scenes: atlas, rendering, splits and threshold calibration."""

from .atlas import SPECIAL_SYMBOLS, GlyphAtlas, load_atlas
from .calibrate import (
    CalibrationError,
    CalibrationReport,
    calibrate_max_distance,
    calibrate_min_vote,
    calibrate_thresholds,
)
from .io import list_scenes, read_glyphs, read_scene, write_glyphs, write_scene
from .render import (
    AugmentSpec,
    CharTruth,
    GroundTruth,
    LayoutError,
    SceneSpec,
    layout_plate,
    random_scene_spec,
    render_glyph,
    render_scene,
)
from .split import DEFAULT_COUNTS, PARTS, DatasetSplit, build_split, scale_counts

__all__ = [
    "SPECIAL_SYMBOLS",
    "GlyphAtlas",
    "load_atlas",
    "CalibrationError",
    "CalibrationReport",
    "calibrate_max_distance",
    "calibrate_min_vote",
    "calibrate_thresholds",
    "list_scenes",
    "read_glyphs",
    "read_scene",
    "write_glyphs",
    "write_scene",
    "AugmentSpec",
    "CharTruth",
    "GroundTruth",
    "LayoutError",
    "SceneSpec",
    "layout_plate",
    "random_scene_spec",
    "render_glyph",
    "render_scene",
    "DEFAULT_COUNTS",
    "PARTS",
    "DatasetSplit",
    "build_split",
    "scale_counts",
]
