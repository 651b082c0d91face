"""Gini decision trees over binary glyph features.

Features are 0/1 pixels, so every split tests ``x[f] >= 0.5`` and the
split search reduces to choosing a feature: samples with the pixel clear
go left, set go right.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .features import ALPHABET

__all__ = ["gini", "best_split", "DecisionTree", "train_tree"]

N_CLASSES = len(ALPHABET)
SPLIT_THRESHOLD = 0.5


def gini(class_counts) -> float:
    """``1 - sum(p_i^2)`` for the given per-class counts."""
    counts = np.asarray(class_counts, dtype=np.int64)
    total = int(counts.sum())
    if total < 1 or counts.min(initial=0) < 0:
        raise ValueError("class counts must be non-negative with a positive sum")
    return 1.0 - float(np.sum((counts / total) ** 2))


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidates: Sequence[int],
    n_classes: int = N_CLASSES,
) -> Optional[Tuple[int, float]]:
    """Candidate feature with the lowest weighted child Gini.

    ``X`` is an ``(n, n_features)`` 0/1 matrix and ``y`` holds class
    indices. Returns ``(feature, impurity_decrease)``, or ``None`` when no
    candidate yields two non-empty children with a strictly positive
    decrease. Equal scores go to the lowest feature index; near-ties in
    floating point are settled with exact rational arithmetic.
    """
    candidates = np.asarray(candidates, dtype=np.int64)
    if len(y) < 2 or len(candidates) == 0:
        return None
    return _split_columns(X[:, candidates], y, candidates, n_classes)


def _split_columns(columns, y, feature_ids, n_classes):
    n = len(y)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    parent = onehot.sum(axis=0).astype(np.int64)

    right = (columns.T.astype(np.float64) @ onehot).astype(np.int64)
    left = parent[None, :] - right
    n_right = right.sum(axis=1)
    n_left = n - n_right
    valid = (n_left > 0) & (n_right > 0)
    if not valid.any():
        return None

    # maximizing sum(l^2)/nL + sum(r^2)/nR minimizes the weighted child Gini
    sq_left = (left * left).sum(axis=1)
    sq_right = (right * right).sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.where(valid, sq_left / n_left + sq_right / n_right, -np.inf)
    top = score.max()
    near = np.flatnonzero(score >= top - 1e-9 * max(1.0, abs(top)))

    best_exact = None
    best_feature = None
    for i in near:
        exact = Fraction(int(sq_left[i]), int(n_left[i])) + Fraction(int(sq_right[i]), int(n_right[i]))
        f = int(feature_ids[i])
        if best_exact is None or exact > best_exact or (exact == best_exact and f < best_feature):
            best_exact, best_feature = exact, f

    parent_term = Fraction(int((parent * parent).sum()), n)
    if best_exact <= parent_term:
        return None
    return best_feature, float((best_exact - parent_term) / n)


class DecisionTree:
    """Flat pre-order node arrays.

    ``feature[i] == -1`` marks a leaf; ``counts[i]`` holds the per-class
    sample counts that reached node ``i``.
    """

    def __init__(self, feature, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64).reshape(len(self.feature), -1)
        # argmax takes the first maximum, i.e. the lexicographically smallest label
        self.leaf_label = self.counts.argmax(axis=1)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, i: int) -> bool:
        return self.feature[i] < 0

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row of ``X``."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        active = self.feature[node] >= 0
        while active.any():
            r = rows[active]
            cur = node[r]
            go_right = X[r, self.feature[cur]] == 1
            node[r] = np.where(go_right, self.right[cur], self.left[cur])
            active = self.feature[node] >= 0
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.leaf_label[self.apply(X)]

    def to_lines(self) -> List[str]:
        lines = []
        for i in range(self.n_nodes):
            if self.feature[i] >= 0:
                lines.append(f"S {self.feature[i]} {self.left[i]} {self.right[i]}")
            else:
                lines.append("L " + " ".join(str(int(c)) for c in self.counts[i]))
        return lines

    def __eq__(self, other):
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, a), getattr(other, a))
            for a in ("feature", "left", "right", "counts")
        )

    __hash__ = None


def train_tree(
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator,
    features_per_split: int,
    n_classes: int = N_CLASSES,
) -> DecisionTree:
    """Grow a tree to purity, drawing ``features_per_split`` candidates per node."""
    if len(y) == 0:
        raise ValueError("cannot train a tree on zero samples")
    n_features = X.shape[1]
    if not 1 <= features_per_split <= n_features:
        raise ValueError(f"features_per_split must lie in [1, {n_features}]")
    feature: List[int] = []
    left: List[int] = []
    right: List[int] = []
    counts: List[np.ndarray] = []

    def grow(idx: np.ndarray) -> int:
        node = len(feature)
        node_counts = np.bincount(y[idx], minlength=n_classes)
        feature.append(-1)
        left.append(-1)
        right.append(-1)
        counts.append(node_counts)
        if len(idx) < 2 or np.count_nonzero(node_counts) == 1:
            return node
        candidates = rng.choice(n_features, size=features_per_split, replace=False)
        found = _split_columns(X[np.ix_(idx, candidates)], y[idx], candidates, n_classes)
        if found is None:
            return node
        f = found[0]
        goes_right = X[idx, f] == 1
        feature[node] = f
        left[node] = grow(idx[~goes_right])
        right[node] = grow(idx[goes_right])
        return node

    grow(np.arange(len(y)))
    return DecisionTree(feature, left, right, counts)
