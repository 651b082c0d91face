"""k-nearest-neighbour baseline with distance-based rejection."""

from __future__ import annotations

import numpy as np
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

__all__ = ["KnnGlyphClassifier", "knn_predict", "squared_distances"]

_CHUNK = 512


def squared_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between 0/1 rows (equal to Hamming distance)."""
    a = A.astype(np.float64)
    b = B.astype(np.float64)
    d = a.sum(axis=1)[:, None] + b.sum(axis=1)[None, :] - 2.0 * (a @ b.T)
    return np.rint(d).astype(np.int64)


class KnnGlyphClassifier(ClassifierMixin, BaseEstimator):
    """Majority vote of the ``k`` closest training glyphs.

    Distance ties keep the earlier training sample; vote ties go to the
    smallest label.
    """

    def __init__(self, k=3, thresholds=None):
        self.k = k
        self.thresholds = thresholds

    @property
    def thresholds_(self) -> RejectionThresholds:
        return self.thresholds if self.thresholds is not None else RejectionThresholds()

    def fit(self, X, y):
        X = check_glyphs(X)
        y = check_labels(y, len(X))
        if not 1 <= int(self.k) <= len(X):
            raise ValueError(f"k must lie in [1, {len(X)}]")
        self.X_ = X
        self.y_ = y
        self.classes_ = np.array(ALPHABET)
        self.n_features_in_ = N_FEATURES
        return self

    def kneighbors(self, X):
        """``(distances, indices)`` of the ``k`` nearest training glyphs."""
        check_is_fitted(self, "X_")
        X = check_glyphs(X)
        k = int(self.k)
        dist = np.empty((len(X), k), dtype=np.int64)
        idx = np.empty((len(X), k), dtype=np.int64)
        for s in range(0, len(X), _CHUNK):
            d = squared_distances(X[s : s + _CHUNK], self.X_)
            order = np.argsort(d, axis=1, kind="stable")[:, :k]
            idx[s : s + _CHUNK] = order
            dist[s : s + _CHUNK] = np.take_along_axis(d, order, axis=1)
        return dist, idx

    def _vote(self, X):
        dist, idx = self.kneighbors(X)
        labels = self.y_[idx]
        votes = np.zeros((len(labels), len(ALPHABET)), dtype=np.int64)
        for j in range(labels.shape[1]):
            np.add.at(votes, (np.arange(len(labels)), labels[:, j]), 1)
        return votes, dist

    def predict_proba(self, X) -> np.ndarray:
        votes, _ = self._vote(X)
        return votes / int(self.k)

    def predict(self, X) -> np.ndarray:
        votes, _ = self._vote(X)
        return self.classes_[votes.argmax(axis=1)]

    def mean_neighbor_distance(self, X) -> np.ndarray:
        dist, _ = self.kneighbors(X)
        return dist.mean(axis=1)

    def rejection_scores(self, X) -> np.ndarray:
        """Mean squared distance to the ``k`` neighbours (high means unfamiliar)."""
        return self.mean_neighbor_distance(X)

    def predict_outcomes(self, X) -> list:
        X = check_glyphs(X)
        votes, dist = self._vote(X)
        th = self.thresholds_
        ink = X.sum(axis=1, dtype=np.int64)
        k = int(self.k)
        out = []
        for i in range(len(X)):
            if ink[i] < th.min_ink:
                out.append(Prediction(Outcome.REJECTED_CLASS_A))
                continue
            if dist[i].mean() > th.max_distance:
                out.append(Prediction(Outcome.REJECTED_CLASS_B))
                continue
            w = int(votes[i].argmax())
            out.append(Prediction(Outcome.ACCEPTED, ALPHABET[w], float(votes[i, w] / k)))
        return out


def knn_predict(model: KnnGlyphClassifier, g: GlyphSample) -> Prediction:
    return model.predict_outcomes([g])[0]
