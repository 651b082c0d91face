"""Choosing rejection thresholds on a validation set that contains special symbols.

The ink threshold is fixed at half the lightest real validation glyph.
The classifier threshold (minimum vote share for the forest, maximum mean
neighbour distance for kNN) is then set just far enough to bring the
special-symbol rejection rate to the target, which keeps as many real
glyphs as possible.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..classify.features import ALPHABET, RejectionThresholds, check_glyphs
from ..classify.knn import KnnGlyphClassifier
from .atlas import SPECIAL_SYMBOLS

__all__ = [
    "CalibrationError",
    "CalibrationReport",
    "calibrate_thresholds",
    "calibrate_min_vote",
    "calibrate_max_distance",
]

MAX_DISTANCE = 400.0


class CalibrationError(ValueError):
    """The validation set cannot support calibration."""


@dataclass(frozen=True)
class CalibrationReport:
    classifier: str
    thresholds: RejectionThresholds
    n_real: int
    n_special: int
    real_rejected: float
    special_rejected: float
    special_rejected_by_ink: float
    per_special: dict
    target: float
    feasible: bool

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["thresholds"] = dataclasses.asdict(self.thresholds)
        return d

    def to_text(self) -> str:
        th = self.thresholds
        lines = [
            f"classifier        {self.classifier}",
            f"min_ink           {th.min_ink}",
            f"max_distance      {th.max_distance!r}",
            f"min_vote          {th.min_vote!r}",
            f"real glyphs       {self.n_real}  rejected {self.real_rejected:.4f}",
            f"special glyphs    {self.n_special}  rejected {self.special_rejected:.4f}"
            f"  (by ink {self.special_rejected_by_ink:.4f}, target {self.target:.2f})",
        ]
        for name, rate in sorted(self.per_special.items()):
            lines.append(f"  {name:<15} rejected {rate:.4f}")
        lines.append(f"feasible          {'yes' if self.feasible else 'no'}")
        return "\n".join(lines) + "\n"


def _needed(n_special: int, already: int, target: float) -> int:
    return max(0, math.ceil(target * n_special - 1e-9) - already)


def calibrate_min_vote(pool_scores, special_scores, needed: int) -> float:
    """Smallest-impact vote-share floor rejecting ``needed`` specials.

    Glyphs whose share is below the floor are rejected. The floor sits
    midway between the ``needed``-th lowest special share and the next
    higher share in ``pool_scores`` (all glyphs still in play), or at 0
    when nothing needs rejecting. Returns a value above 1 when the target
    cannot be met.
    """
    if needed <= 0:
        return 0.0
    special = np.sort(np.asarray(special_scores, dtype=np.float64))
    if needed > len(special):
        raise CalibrationError("cannot reject more specials than there are")
    v = special[needed - 1]
    pool = np.asarray(pool_scores, dtype=np.float64)
    above = pool[pool > v]
    if len(above) == 0:
        return float(v + 0.5 * (1.0 - v)) if v < 1.0 else math.inf
    return float((v + above.min()) / 2.0)


def calibrate_max_distance(pool_scores, special_scores, needed: int) -> float:
    """Largest mean-distance ceiling rejecting ``needed`` specials.

    Glyphs whose distance exceeds the ceiling are rejected. The ceiling
    sits midway between the ``needed``-th highest special distance and
    the next lower distance in ``pool_scores``, or at 400 (the largest
    possible distance) when nothing needs rejecting. Returns -inf when the
    target cannot be met.
    """
    if needed <= 0:
        return MAX_DISTANCE
    special = np.sort(np.asarray(special_scores, dtype=np.float64))[::-1]
    if needed > len(special):
        raise CalibrationError("cannot reject more specials than there are")
    d = special[needed - 1]
    pool = np.asarray(pool_scores, dtype=np.float64)
    below = pool[pool < d]
    if len(below) == 0:
        return float(d / 2.0) if d > 0 else -math.inf
    return float((d + below.max()) / 2.0)


def calibrate_thresholds(model, X, labels: Sequence[str], target: float = 0.95):
    """Fit rejection thresholds for ``model`` on labelled validation glyphs.

    ``labels`` holds alphabet symbols for real glyphs and ``SPECIAL_A`` /
    ``SPECIAL_B`` for special ones. Returns ``(thresholds, report)``; the
    model itself is left unchanged.
    """
    X = check_glyphs(X)
    labels = np.asarray(list(labels), dtype=object)
    if len(labels) != len(X):
        raise CalibrationError("labels and glyphs differ in length")
    real = np.isin(labels, ALPHABET)
    special = np.isin(labels, SPECIAL_SYMBOLS)
    if not special.any():
        raise CalibrationError("validation set has no special glyphs")
    if not real.any():
        raise CalibrationError("validation set has no real glyphs")
    if not (real | special).all():
        raise CalibrationError("validation labels must be alphabet or special symbols")
    if not 0.0 < target <= 1.0:
        raise ValueError("target must lie in (0, 1]")

    ink = X.sum(axis=1, dtype=np.int64)
    min_ink = int(math.floor(0.5 * ink[real].min()))
    by_ink = ink < min_ink
    scores = np.asarray(model.rejection_scores(X), dtype=np.float64)
    in_play = ~by_ink & (real | special)
    needed = _needed(int(special.sum()), int((by_ink & special).sum()), target)

    base = getattr(model, "thresholds_", None) or RejectionThresholds()
    if isinstance(model, KnnGlyphClassifier):
        kind = "knn"
        ts = calibrate_max_distance(scores[in_play], scores[in_play & special], needed)
        feasible = math.isfinite(ts)
        th = RejectionThresholds(min_ink, max(ts, 0.0) if feasible else 0.0, base.min_vote)
        by_score = scores > th.max_distance
    else:
        kind = "forest"
        pe = calibrate_min_vote(scores[in_play], scores[in_play & special], needed)
        feasible = math.isfinite(pe)
        th = RejectionThresholds(min_ink, base.max_distance, min(pe, 1.0) if feasible else 1.0)
        by_score = scores < th.min_vote
    rejected = by_ink | by_score
    if feasible and rejected[special].mean() < target:
        feasible = False

    per_special = {
        s: float(rejected[labels == s].mean()) for s in SPECIAL_SYMBOLS if (labels == s).any()
    }
    report = CalibrationReport(
        classifier=kind,
        thresholds=th,
        n_real=int(real.sum()),
        n_special=int(special.sum()),
        real_rejected=float(rejected[real].mean()),
        special_rejected=float(rejected[special].mean()),
        special_rejected_by_ink=float(by_ink[special].mean()),
        per_special=per_special,
        target=float(target),
        feasible=bool(feasible),
    )
    return th, report
