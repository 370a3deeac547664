"""Tests for the Wilcoxon signed-rank test, Cliff's delta and Win/Tie/Loss."""

import itertools

import numpy as np
import pytest

from simast_review.errors import StatisticsError
from simast_review.evaluation.stats import (
    EffectLevel,
    Outcome,
    Verdict,
    cliffs_delta,
    effect_level,
    exact_signed_rank_p,
    normal_signed_rank_p,
    wilcoxon_signed_rank,
    win_tie_loss,
)


def enumerated_p(differences: list[float]) -> float:
    """Two-sided p by listing every sign assignment (tie-free input)."""
    order = sorted(range(len(differences)), key=lambda i: abs(differences[i]))
    ranks = [0] * len(differences)
    for rank, index in enumerate(order, start=1):
        ranks[index] = rank
    observed = sum(r for r, d in zip(ranks, differences) if d > 0)
    totals = [sum(r for r, s in zip(ranks, signs) if s) for signs in itertools.product((0, 1), repeat=len(ranks))]
    upper = sum(1 for t in totals if t >= observed) / len(totals)
    lower = sum(1 for t in totals if t <= observed) / len(totals)
    return min(1.0, 2 * min(upper, lower))


class TestWilcoxon:
    """Signed-rank p values."""

    def test_identical_samples(self):
        with pytest.raises(StatisticsError):
            wilcoxon_signed_rank([0.5] * 10, [0.5] * 10)

    def test_too_few_nonzero_differences(self):
        with pytest.raises(StatisticsError, match="at least 5"):
            wilcoxon_signed_rank([1, 2, 3, 4, 5, 6], [1, 2, 3, 4.5, 5.5, 6.5])

    def test_six_positive_differences(self):
        xs = [1.1, 2.2, 3.3, 4.4, 5.5, 6.6]
        ys = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
        assert wilcoxon_signed_rank(xs, ys) == pytest.approx(0.03125)

    def test_thirty_uniformly_better(self):
        ys = np.linspace(0.1, 0.9, 30)
        xs = ys + 1 + np.arange(30) * 0.01
        assert wilcoxon_signed_rank(xs, ys) < 0.05

    def test_zero_differences_are_dropped(self):
        xs = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]
        ys = [1.0, 2.0, 2.5, 3.0, 4.0, 4.5, 5.0, 5.5]
        assert wilcoxon_signed_rank(xs, ys) == pytest.approx(exact_signed_rank_p(np.array([0.5, 1.0, 1.0, 1.5, 2.0, 2.5])))

    def test_length_mismatch(self):
        with pytest.raises(StatisticsError):
            wilcoxon_signed_rank([1.0] * 6, [0.0] * 7)

    @pytest.mark.parametrize("n", range(5, 13))
    def test_exact_matches_enumeration(self, n):
        rng = np.random.default_rng(n)
        for _ in range(3):
            differences = rng.permutation(np.arange(1, n + 1)) * rng.choice([-1.0, 1.0], size=n)
            assert exact_signed_rank_p(differences) == pytest.approx(enumerated_p(list(differences)), abs=1e-15)

    @pytest.mark.parametrize("n", range(8, 13))
    def test_normal_approximation_is_close(self, n):
        """Worst case over the null support is about 0.021, at n = 8 near W = 11."""
        rng = np.random.default_rng(100 + n)
        for _ in range(20):
            differences = rng.normal(size=n)
            assert abs(normal_signed_rank_p(differences) - exact_signed_rank_p(differences)) < 0.025

    def test_p_is_clamped(self):
        assert 0.0 < wilcoxon_signed_rank([1, -1, 2, -2, 3, -3], [0] * 6) <= 1.0


class TestCliffsDelta:
    """Effect sizes and levels."""

    def test_complete_dominance(self):
        assert cliffs_delta([5, 6, 7], [1, 2]) == (1.0, EffectLevel.LARGE)

    def test_same_multiset(self):
        assert cliffs_delta([1, 2, 2, 3], [3, 2, 1, 2]) == (0.0, EffectLevel.NEGLIGIBLE)

    @pytest.mark.parametrize(
        "delta,level",
        [
            (0.0, EffectLevel.NEGLIGIBLE),
            (0.146, EffectLevel.NEGLIGIBLE),
            (0.147, EffectLevel.SMALL),
            (0.2, EffectLevel.SMALL),
            (-0.2, EffectLevel.SMALL),
            (0.33, EffectLevel.MEDIUM),
            (0.4, EffectLevel.MEDIUM),
            (0.474, EffectLevel.LARGE),
            (0.5, EffectLevel.LARGE),
            (-1.0, EffectLevel.LARGE),
        ],
    )
    def test_level_boundaries(self, delta, level):
        assert effect_level(delta) is level

    def test_antisymmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            xs, ys = rng.integers(0, 5, size=7), rng.integers(0, 5, size=9)
            assert cliffs_delta(xs, ys)[0] == -cliffs_delta(ys, xs)[0]

    def test_empty_sample(self):
        with pytest.raises(StatisticsError):
            cliffs_delta([], [1.0])


class TestWinTieLoss:
    """Verdicts from significance and effect size."""

    def test_win(self):
        theirs = np.linspace(0.5, 0.6, 30)
        ours = theirs + 0.2 + np.arange(30) * 0.001
        verdict = win_tie_loss(ours, theirs)
        assert verdict.outcome is Outcome.WIN
        assert verdict.level is EffectLevel.LARGE
        assert verdict.format_p_delta() == "<0.05(+Large)"

    def test_loss(self):
        theirs = np.linspace(0.5, 0.6, 30)
        ours = theirs - 0.2 - np.arange(30) * 0.001
        assert win_tie_loss(ours, theirs).outcome is Outcome.LOSS

    def test_identical_samples_tie(self):
        samples = list(np.linspace(0.1, 0.9, 30))
        verdict = win_tie_loss(samples, samples)
        assert verdict.outcome is Outcome.TIE
        assert verdict.p_value == 1.0
        assert verdict.delta == 0.0

    def test_significant_but_negligible_is_a_tie(self):
        theirs = np.linspace(0.0, 1.0, 30)
        ours = theirs + 0.001 * (np.arange(30) + 1)
        verdict = win_tie_loss(ours, theirs)
        assert verdict.p_value < 0.05
        assert verdict.level is EffectLevel.NEGLIGIBLE
        assert verdict.outcome is Outcome.TIE

    def test_length_mismatch_propagates(self):
        with pytest.raises(StatisticsError):
            win_tie_loss([1.0, 2.0], [1.0])


@pytest.mark.parametrize(
    "verdict,text",
    [
        (Verdict(Outcome.WIN, 0.001, 0.8, EffectLevel.LARGE), "<0.05(+Large)"),
        (Verdict(Outcome.TIE, 0.6, -0.2, EffectLevel.SMALL), "0.6(-Small)"),
        (Verdict(Outcome.TIE, 0.123, 0.0, EffectLevel.NEGLIGIBLE), "0.12(+Negligible)"),
    ],
)
def test_p_delta_formatting(verdict, text):
    assert verdict.format_p_delta() == text
