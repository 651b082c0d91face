"""Line-oriented text model files.

Forest::

    RFMODEL 1
    classes 0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ
    trees <n>
    fs <features per split>
    seed <u64>
    tc <int> ts <float> pe <float>
    tree <i> nodes <m>
    S <feature> <left-line> <right-line>     (or)  L <36 counts>
    ...
    checksum <crc32 of the tree's node lines>

kNN::

    KNNMODEL 1
    k <k>
    tc <int> ts <float> pe <float>
    <label> <400 bits>
    ...

Node lines are numbered from 0 within each tree, in pre-order. The
checksum covers the node lines joined with LF, including the final LF.
"""

from __future__ import annotations

import os
import zlib
from typing import List, Union

import numpy as np

from .features import ALPHABET, N_FEATURES, RejectionThresholds
from .forest import RandomForestGlyphClassifier, _features_per_split
from .knn import KnnGlyphClassifier
from .tree import DecisionTree

__all__ = [
    "ModelFormatError",
    "ModelVersionError",
    "ModelChecksumError",
    "ModelTruncatedError",
    "dumps_model",
    "loads_model",
    "save_model",
    "load_model",
]

FORMAT_VERSION = 1
_U64 = (1 << 64) - 1


class ModelFormatError(ValueError):
    """The model file is malformed."""


class ModelVersionError(ModelFormatError):
    """Unknown magic line or unsupported format version."""


class ModelChecksumError(ModelFormatError):
    """A tree's node lines do not match their recorded checksum."""


class ModelTruncatedError(ModelFormatError):
    """The file ends before the model is complete."""


def _thresholds_line(th: RejectionThresholds) -> str:
    return f"tc {th.min_ink} ts {float(th.max_distance)!r} pe {float(th.min_vote)!r}"


def _crc(lines: List[str]) -> int:
    return zlib.crc32(("\n".join(lines) + "\n").encode("ascii"))


def dumps_model(model) -> str:
    if isinstance(model, RandomForestGlyphClassifier):
        return _dump_forest(model)
    if isinstance(model, KnnGlyphClassifier):
        return _dump_knn(model)
    raise TypeError(f"cannot serialize {type(model).__name__}")


def _dump_forest(model: RandomForestGlyphClassifier) -> str:
    trees = model.trees_
    seed = int(model.seed)
    if not 0 <= seed <= _U64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    out = [
        f"RFMODEL {FORMAT_VERSION}",
        "classes " + "".join(ALPHABET),
        f"trees {len(trees)}",
        f"fs {_features_per_split(model.features_per_split)}",
        f"seed {seed}",
        _thresholds_line(model.thresholds_),
    ]
    for i, tree in enumerate(trees):
        lines = tree.to_lines()
        out.append(f"tree {i} nodes {len(lines)}")
        out.extend(lines)
        out.append(f"checksum {_crc(lines)}")
    return "\n".join(out) + "\n"


def _dump_knn(model: KnnGlyphClassifier) -> str:
    out = [f"KNNMODEL {FORMAT_VERSION}", f"k {int(model.k)}", _thresholds_line(model.thresholds_)]
    text_rows = (model.X_ + ord("0")).astype(np.uint8)
    for row, label in zip(text_rows, model.y_):
        out.append(ALPHABET[label] + " " + row.tobytes().decode("ascii"))
    return "\n".join(out) + "\n"


class _Lines:
    def __init__(self, text: str):
        self.lines = text.split("\n")
        if self.lines and self.lines[-1] == "":
            self.lines.pop()
            self.complete = True
        else:
            # no trailing LF: the last line was cut short
            self.complete = False
        self.pos = 0

    def next(self, what: str) -> str:
        if self.pos >= len(self.lines) or (self.pos == len(self.lines) - 1 and not self.complete):
            raise ModelTruncatedError(f"file ends while reading {what} (line {self.pos + 1})")
        line = self.lines[self.pos]
        self.pos += 1
        return line

    def done(self) -> bool:
        return self.pos >= len(self.lines)


def _keyed(line: str, key: str, n: int = 1) -> List[str]:
    parts = line.split(" ")
    if parts[0] != key or len(parts) != n + 1:
        raise ModelFormatError(f"expected '{key}' line, got {line[:40]!r}")
    return parts[1:]


def _parse_int(token: str, what: str) -> int:
    if not token.isdigit():
        raise ModelFormatError(f"{what} is not a non-negative integer: {token!r}")
    return int(token)


def _parse_thresholds(line: str) -> RejectionThresholds:
    parts = line.split(" ")
    if len(parts) != 6 or parts[0::2] != ["tc", "ts", "pe"]:
        raise ModelFormatError(f"malformed thresholds line {line!r}")
    try:
        return RejectionThresholds(int(parts[1]), float(parts[3]), float(parts[5]))
    except ValueError as exc:
        raise ModelFormatError(f"bad thresholds: {exc}") from exc


def loads_model(text: str) -> Union[RandomForestGlyphClassifier, KnnGlyphClassifier]:
    r = _Lines(text)
    magic = r.next("magic line").split(" ")
    if len(magic) != 2 or magic[0] not in ("RFMODEL", "KNNMODEL"):
        raise ModelVersionError(f"unrecognized magic line {' '.join(magic)[:40]!r}")
    if magic[1] != str(FORMAT_VERSION):
        raise ModelVersionError(f"unsupported model version {magic[1]!r}")
    if magic[0] == "RFMODEL":
        return _load_forest(r)
    return _load_knn(r)


def _load_forest(r: _Lines) -> RandomForestGlyphClassifier:
    (classes,) = _keyed(r.next("classes"), "classes")
    if classes != "".join(ALPHABET):
        raise ModelFormatError("model alphabet differs from the 36-symbol alphabet")
    n_trees = _parse_int(_keyed(r.next("trees"), "trees")[0], "trees")
    f_s = _parse_int(_keyed(r.next("fs"), "fs")[0], "fs")
    seed = _parse_int(_keyed(r.next("seed"), "seed")[0], "seed")
    thresholds = _parse_thresholds(r.next("thresholds"))
    trees = []
    for i in range(n_trees):
        head = r.next(f"tree {i} header").split(" ")
        if len(head) != 4 or head[0] != "tree" or head[2] != "nodes" or head[1] != str(i):
            raise ModelFormatError(f"bad header for tree {i}: {' '.join(head)[:40]!r}")
        m = _parse_int(head[3], "node count")
        lines = [r.next(f"tree {i} node {j}") for j in range(m)]
        (crc,) = _keyed(r.next(f"tree {i} checksum"), "checksum")
        if _parse_int(crc, "checksum") != _crc(lines):
            raise ModelChecksumError(f"checksum mismatch in tree {i}")
        trees.append(_parse_tree(lines, i))
    if not r.done():
        raise ModelFormatError("trailing data after the last tree")
    model = RandomForestGlyphClassifier(
        n_trees=n_trees, features_per_split=f_s, seed=seed, thresholds=thresholds
    )
    model.trees_ = trees
    model.classes_ = np.array(ALPHABET)
    model.n_features_in_ = N_FEATURES
    return model


def _parse_tree(lines: List[str], index: int) -> DecisionTree:
    m = len(lines)
    feature = np.full(m, -1, dtype=np.int64)
    left = np.full(m, -1, dtype=np.int64)
    right = np.full(m, -1, dtype=np.int64)
    counts = np.zeros((m, len(ALPHABET)), dtype=np.int64)
    for j, line in enumerate(lines):
        parts = line.split(" ")
        if parts[0] == "S" and len(parts) == 4:
            f, a, b = (_parse_int(p, "node field") for p in parts[1:])
            if f >= N_FEATURES or not j < a < m or not j < b < m:
                raise ModelFormatError(f"tree {index} node {j} has invalid references")
            feature[j], left[j], right[j] = f, a, b
        elif parts[0] == "L" and len(parts) == len(ALPHABET) + 1:
            counts[j] = [_parse_int(p, "leaf count") for p in parts[1:]]
            if counts[j].sum() < 1:
                raise ModelFormatError(f"tree {index} leaf {j} is empty")
        else:
            raise ModelFormatError(f"tree {index} node {j} is malformed")
    tree = DecisionTree(feature, left, right, counts)
    # split nodes carry the sum of their children's counts
    for j in range(m - 1, -1, -1):
        if feature[j] >= 0:
            tree.counts[j] = tree.counts[left[j]] + tree.counts[right[j]]
    tree.leaf_label = tree.counts.argmax(axis=1)
    return tree


def _load_knn(r: _Lines) -> KnnGlyphClassifier:
    k = _parse_int(_keyed(r.next("k"), "k")[0], "k")
    thresholds = _parse_thresholds(r.next("thresholds"))
    rows, labels = [], []
    while not r.done():
        line = r.next("training sample")
        parts = line.split(" ")
        if len(parts) != 2 or parts[0] not in ALPHABET:
            raise ModelFormatError(f"malformed training sample {line[:40]!r}")
        bits = parts[1]
        if len(bits) != N_FEATURES or set(bits) - {"0", "1"}:
            raise ModelFormatError(f"sample needs {N_FEATURES} bits")
        rows.append(np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0"))
        labels.append(parts[0])
    if not rows:
        raise ModelTruncatedError("kNN model has no training samples")
    model = KnnGlyphClassifier(k=k, thresholds=thresholds)
    return model.fit(np.stack(rows), labels)


def save_model(model, path) -> None:
    with open(os.fspath(path), "w", encoding="ascii", newline="\n") as fh:
        fh.write(dumps_model(model))


def load_model(path):
    with open(os.fspath(path), "r", encoding="ascii", newline="") as fh:
        return loads_model(fh.read())
