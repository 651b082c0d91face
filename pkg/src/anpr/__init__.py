"""Automatic number-plate recognition on synthetic and Netpbm imagery."""

from .classify import KnnGlyphClassifier, RandomForestGlyphClassifier, load_model, save_model
from .image import BoundingBox, GrayImage, read_netpbm, write_netpbm
from .pipeline import PipelineConfig, PlateReading, PlateRecognizer, recognize

__all__ = [
    "BoundingBox",
    "GrayImage",
    "KnnGlyphClassifier",
    "PipelineConfig",
    "PlateReading",
    "PlateRecognizer",
    "RandomForestGlyphClassifier",
    "load_model",
    "read_netpbm",
    "recognize",
    "save_model",
    "write_netpbm",
]
