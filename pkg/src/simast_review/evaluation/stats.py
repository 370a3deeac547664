"""Paired significance testing: Wilcoxon signed-rank, Cliff's delta and Win/Tie/Loss."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import norm, rankdata

from simast_review.errors import StatisticsError


logger = logging.getLogger(__name__)

MIN_NONZERO = 5
EXACT_MAX_N = 12
SIGNIFICANCE = 0.05
# |delta| thresholds; each level is closed on the left
EFFECT_THRESHOLDS = ((0.147, "Negligible"), (0.33, "Small"), (0.474, "Medium"))


class EffectLevel(str, Enum):
    NEGLIGIBLE = "Negligible"
    SMALL = "Small"
    MEDIUM = "Medium"
    LARGE = "Large"


class Outcome(str, Enum):
    WIN = "Win"
    TIE = "Tie"
    LOSS = "Loss"


@dataclass(frozen=True, slots=True)
class Verdict:
    outcome: Outcome
    p_value: float
    delta: float
    level: EffectLevel

    def format_p_delta(self) -> str:
        """``<0.05(+Large)`` when significant, otherwise e.g. ``0.6(-Small)``."""
        sign = "-" if self.delta < 0 else "+"
        p_text = "<0.05" if self.p_value < SIGNIFICANCE else f"{self.p_value:.2g}"
        return f"{p_text}({sign}{self.level.value})"


def _paired_differences(xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    if len(xs) != len(ys):
        raise StatisticsError(f"paired samples differ in length: {len(xs)} and {len(ys)}")
    differences = np.asarray(xs, dtype=np.float64) - np.asarray(ys, dtype=np.float64)
    nonzero = differences[differences != 0]
    if len(nonzero) < MIN_NONZERO:
        raise StatisticsError(
            f"Wilcoxon test needs at least {MIN_NONZERO} nonzero differences, got {len(nonzero)}"
        )
    return nonzero


def exact_signed_rank_p(differences: np.ndarray) -> float:
    """Two-sided p from the full null distribution over all 2^n sign assignments."""
    n = len(differences)
    ranks = rankdata(np.abs(differences))
    observed = float(ranks[differences > 0].sum())
    signs = (np.arange(2**n)[:, None] >> np.arange(n)) & 1
    null = signs @ ranks
    tolerance = 1e-9
    upper = np.count_nonzero(null >= observed - tolerance) / 2**n
    lower = np.count_nonzero(null <= observed + tolerance) / 2**n
    return min(1.0, 2 * min(upper, lower))


def normal_signed_rank_p(differences: np.ndarray) -> float:
    """Normal approximation with tie and continuity corrections."""
    n = len(differences)
    ranks = rankdata(np.abs(differences))
    w_plus = float(ranks[differences > 0].sum())
    mean = n * (n + 1) / 4
    _, tie_sizes = np.unique(np.abs(differences), return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24 - float(np.sum(tie_sizes**3 - tie_sizes)) / 48
    if variance <= 0:
        return 1.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / math.sqrt(variance)
    return min(1.0, float(2 * norm.sf(z)))


def wilcoxon_signed_rank(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Two-sided p for paired samples; zero differences are dropped, ties share ranks."""
    differences = _paired_differences(xs, ys)
    if len(differences) <= EXACT_MAX_N:
        return exact_signed_rank_p(differences)
    return normal_signed_rank_p(differences)


def effect_level(delta: float) -> EffectLevel:
    magnitude = abs(delta)
    for bound, name in EFFECT_THRESHOLDS:
        if magnitude < bound:
            return EffectLevel(name)
    return EffectLevel.LARGE


def cliffs_delta(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, EffectLevel]:
    if not len(xs) or not len(ys):
        raise StatisticsError("Cliff's delta needs two non-empty samples")
    left = np.asarray(xs, dtype=np.float64)
    right = np.asarray(ys, dtype=np.float64)
    dominance = int(np.sign(left[:, None] - right[None, :]).sum())
    delta = dominance / (len(left) * len(right))
    return delta, effect_level(delta)


def win_tie_loss(ours: Sequence[float], theirs: Sequence[float]) -> Verdict:
    """Win/Loss need p < 0.05 and a non-negligible effect; a degenerate test counts as p = 1."""
    try:
        p_value = wilcoxon_signed_rank(ours, theirs)
    except StatisticsError as exc:
        if len(ours) != len(theirs):
            raise
        logger.info("Treating comparison as p = 1: %s", exc)
        p_value = 1.0
    delta, level = cliffs_delta(ours, theirs)
    outcome = Outcome.TIE
    if p_value < SIGNIFICANCE and level is not EffectLevel.NEGLIGIBLE:
        outcome = Outcome.WIN if delta > 0 else Outcome.LOSS
    return Verdict(outcome, p_value, delta, level)
