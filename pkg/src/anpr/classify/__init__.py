"""Glyph features, decision trees, the random forest and the kNN baseline."""

from .features import (
    ALPHABET,
    N_FEATURES,
    SPECIAL_A,
    SPECIAL_B,
    GlyphSample,
    Outcome,
    Prediction,
    RejectionThresholds,
    check_glyphs,
    featurize,
    ink_count,
    unflatten,
)
from .forest import RandomForestGlyphClassifier, forest_predict, train_forest
from .knn import KnnGlyphClassifier, knn_predict
from .serialize import (
    ModelChecksumError,
    ModelFormatError,
    ModelTruncatedError,
    ModelVersionError,
    load_model,
    save_model,
)
from .tree import DecisionTree, best_split, gini, train_tree

__all__ = [
    "ALPHABET",
    "N_FEATURES",
    "SPECIAL_A",
    "SPECIAL_B",
    "GlyphSample",
    "Outcome",
    "Prediction",
    "RejectionThresholds",
    "check_glyphs",
    "featurize",
    "ink_count",
    "unflatten",
    "RandomForestGlyphClassifier",
    "forest_predict",
    "train_forest",
    "KnnGlyphClassifier",
    "knn_predict",
    "ModelChecksumError",
    "ModelFormatError",
    "ModelTruncatedError",
    "ModelVersionError",
    "load_model",
    "save_model",
    "DecisionTree",
    "best_split",
    "gini",
    "train_tree",
]
