"""Bagged random forest of Gini trees for 20 x 20 glyphs."""

from __future__ import annotations

import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .features import (
    ALPHABET,
    N_FEATURES,
    GlyphSample,
    Outcome,
    Prediction,
    RejectionThresholds,
    check_glyphs,
    check_labels,
)
from .tree import train_tree

__all__ = [
    "RandomForestGlyphClassifier",
    "train_forest",
    "forest_predict",
    "mix64",
    "tree_seed",
    "canonical_order",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 output finalizer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def tree_seed(seed: int, i: int) -> int:
    """Seed of tree ``i``; independent of how trees are scheduled."""
    return mix64((seed & _MASK) ^ ((_GOLDEN * (i + 1)) & _MASK))


def canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Permutation sorting samples by (label, packed pixel bytes)."""
    packed = np.packbits(X, axis=1)
    keys = [(int(y[i]), packed[i].tobytes()) for i in range(len(y))]
    return np.array(sorted(range(len(y)), key=keys.__getitem__), dtype=np.int64)


def _features_per_split(value) -> int:
    if value == "sqrt":
        return math.isqrt(N_FEATURES)
    value = int(value)
    if not 1 <= value <= N_FEATURES:
        raise ValueError(f"features_per_split must lie in [1, {N_FEATURES}]")
    return value


def _grow_one(X, y, seed, i, f_s):
    rng = np.random.default_rng(tree_seed(seed, i))
    boot = rng.integers(0, len(y), size=len(y))
    return train_tree(X[boot], y[boot], rng, f_s)


class RandomForestGlyphClassifier(ClassifierMixin, BaseEstimator):
    """Random forest over the 36-symbol plate alphabet.

    Parameters
    ----------
    n_trees : int, default=100
        Number of bagged trees.
    features_per_split : int or "sqrt", default=20
        Candidate pixels drawn at every node (``"sqrt"`` means 20 of 400).
    seed : int, default=0
        Master seed; tree ``i`` uses ``tree_seed(seed, i)``.
    thresholds : RejectionThresholds, optional
        Special-character filters used by :meth:`predict_outcomes`.
        Only ``min_ink`` and ``min_vote`` apply to the forest.
    n_jobs : int, optional
        Trees grown concurrently. The fitted model does not depend on it.
    """

    def __init__(self, n_trees=100, features_per_split=20, seed=0, thresholds=None, n_jobs=None):
        self.n_trees = n_trees
        self.features_per_split = features_per_split
        self.seed = seed
        self.thresholds = thresholds
        self.n_jobs = n_jobs

    @property
    def thresholds_(self) -> RejectionThresholds:
        return self.thresholds if self.thresholds is not None else RejectionThresholds()

    def fit(self, X, y):
        X = check_glyphs(X)
        y = check_labels(y, len(X))
        if len(np.unique(y)) < 2:
            raise ValueError("a forest needs samples from at least two classes")
        if int(self.n_trees) < 1:
            raise ValueError("n_trees must be >= 1")
        f_s = _features_per_split(self.features_per_split)
        order = canonical_order(X, y)
        X, y = X[order], y[order]
        seed = int(self.seed)
        self.trees_ = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(_grow_one)(X, y, seed, i, f_s) for i in range(int(self.n_trees))
        )
        self.classes_ = np.array(ALPHABET)
        self.n_features_in_ = N_FEATURES
        return self

    def _votes(self, X) -> np.ndarray:
        check_is_fitted(self, "trees_")
        X = check_glyphs(X)
        votes = np.zeros((len(X), len(ALPHABET)), dtype=np.int64)
        rows = np.arange(len(X))
        for tree in self.trees_:
            np.add.at(votes, (rows, tree.predict(X)), 1)
        return votes

    def predict_proba(self, X) -> np.ndarray:
        """Per-class vote fractions, shape ``(n_samples, 36)``."""
        return self._votes(X) / len(self.trees_)

    def predict(self, X) -> np.ndarray:
        """Plurality label without rejection."""
        return self.classes_[self._votes(X).argmax(axis=1)]

    def predict_outcomes(self, X) -> list:
        """Predictions with class-A (ink) and class-B (vote share) rejection."""
        X = check_glyphs(X)
        votes = self._votes(X)
        th = self.thresholds_
        ink = X.sum(axis=1, dtype=np.int64)
        n = len(self.trees_)
        out = []
        for i in range(len(X)):
            if ink[i] < th.min_ink:
                out.append(Prediction(Outcome.REJECTED_CLASS_A))
                continue
            w = int(votes[i].argmax())
            share = votes[i, w] / n
            if share < th.min_vote:
                out.append(Prediction(Outcome.REJECTED_CLASS_B))
            else:
                out.append(Prediction(Outcome.ACCEPTED, ALPHABET[w], float(share)))
        return out

    def rejection_scores(self, X) -> np.ndarray:
        """Winning vote share per glyph (low means unlike any trained class)."""
        return self.predict_proba(X).max(axis=1)


def train_forest(X, y, n_trees=100, features_per_split=20, seed=0, thresholds=None, n_jobs=None):
    return RandomForestGlyphClassifier(
        n_trees=n_trees,
        features_per_split=features_per_split,
        seed=seed,
        thresholds=thresholds,
        n_jobs=n_jobs,
    ).fit(X, y)


def forest_predict(model: RandomForestGlyphClassifier, g: GlyphSample) -> Prediction:
    return model.predict_outcomes([g])[0]
