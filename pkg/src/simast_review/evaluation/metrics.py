"""Binary classification metrics; the positive class is accept (label 1)."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from simast_review.errors import StatisticsError


logger = logging.getLogger(__name__)

METRIC_NAMES = ("accuracy", "f1", "auc", "mcc")


@dataclass(frozen=True, slots=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise StatisticsError(f"confusion counts must be non-negative: {self}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @classmethod
    def from_predictions(cls, labels: Sequence[int], predictions: Sequence[int]) -> ConfusionCounts:
        if len(labels) != len(predictions):
            raise StatisticsError(f"{len(labels)} labels but {len(predictions)} predictions")
        truth = np.asarray(labels, dtype=bool)
        guess = np.asarray(predictions, dtype=bool)
        return cls(
            tp=int(np.sum(truth & guess)),
            fp=int(np.sum(~truth & guess)),
            fn=int(np.sum(truth & ~guess)),
            tn=int(np.sum(~truth & ~guess)),
        )


def accuracy(counts: ConfusionCounts) -> float:
    if counts.total == 0:
        raise StatisticsError("accuracy of an empty prediction set")
    return (counts.tp + counts.tn) / counts.total


def precision(counts: ConfusionCounts) -> float:
    predicted = counts.tp + counts.fp
    return counts.tp / predicted if predicted else 0.0


def recall(counts: ConfusionCounts) -> float:
    actual = counts.tp + counts.fn
    return counts.tp / actual if actual else 0.0


def f1(counts: ConfusionCounts) -> float:
    """Harmonic mean of precision and recall; 0 when either is undefined or both are 0."""
    p, r = precision(counts), recall(counts)
    if p + r == 0:
        logger.warning("F1 undefined for %s; reporting 0", counts)
        return 0.0
    return 2 * p * r / (p + r)


def mcc(counts: ConfusionCounts) -> float:
    """Matthews correlation; 0 when any marginal total is 0."""
    tp, fp, fn, tn = counts.tp, counts.fp, counts.fn, counts.tn
    denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denominator == 0:
        logger.warning("MCC undefined for %s; reporting 0", counts)
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denominator)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC: P(score of a positive > score of a negative), ties count one half."""
    if len(scores) != len(labels):
        raise StatisticsError(f"{len(scores)} scores but {len(labels)} labels")
    positive = np.asarray(labels, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise StatisticsError("AUC needs at least one positive and one negative sample")
    ranks = rankdata(np.asarray(scores, dtype=np.float64))
    u = float(ranks[positive].sum()) - n_pos * (n_pos + 1) / 2
    return u / (n_pos * n_neg)


@dataclass(frozen=True, slots=True)
class MetricRow:
    accuracy: float
    f1: float
    auc: float
    mcc: float

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in METRIC_NAMES}


def summarize(counts: ConfusionCounts, scores: Sequence[float], labels: Sequence[int]) -> MetricRow:
    """All four reported metrics; AUC is NaN (with a warning) on single-class input."""
    try:
        area = auc(scores, labels)
    except StatisticsError as exc:
        logger.warning("AUC not reported: %s", exc)
        area = math.nan
    return MetricRow(accuracy=accuracy(counts), f1=f1(counts), auc=area, mcc=mcc(counts))
