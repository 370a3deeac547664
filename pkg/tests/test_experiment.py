"""Tests for repeated runs, metric CSVs and Win/Tie/Loss comparisons."""

import math

import numpy as np
import pytest

from simast_review.errors import RecordError, ReviewDataError
from simast_review.evaluation.metrics import METRIC_NAMES, MetricRow
from simast_review.evaluation.stats import Outcome
from simast_review.training.experiment import (
    RepetitionResult,
    compare_samples,
    comparison_table,
    mean_metrics,
    read_metrics_csv,
    run_repetitions,
    tally,
    write_comparison_csv,
    write_metrics_csv,
)


def samples(values):
    return {name: list(values) for name in METRIC_NAMES}


class TestRunRepetitions:
    """Seeded repetitions over split, initialization and shuffle."""

    def test_deterministic(self, small_config, synthetic_pairs, synthetic_embeddings):
        kwargs = {"repetitions": 2, "base_seed": 10, "epochs": 1, "batch_size": 8}
        first = run_repetitions(small_config, synthetic_pairs[:20], synthetic_embeddings, **kwargs)
        second = run_repetitions(small_config, synthetic_pairs[:20], synthetic_embeddings, **kwargs)
        assert [r.seed for r in first] == [10, 11]
        np.testing.assert_array_equal(
            [list(r.metrics.as_dict().values()) for r in first],
            [list(r.metrics.as_dict().values()) for r in second],
        )

    def test_needs_a_repetition(self, small_config, synthetic_pairs, synthetic_embeddings):
        with pytest.raises(ReviewDataError):
            run_repetitions(small_config, synthetic_pairs, synthetic_embeddings, repetitions=0)


class TestMetricsCsv:
    @pytest.fixture
    def results(self):
        return [
            RepetitionResult(0, 5, MetricRow(0.8, 0.75, 0.9, 0.6)),
            RepetitionResult(1, 6, MetricRow(0.6, 0.5, math.nan, 0.2)),
        ]

    def test_mean_skips_nan(self, results):
        mean = mean_metrics([r.metrics for r in results])
        assert mean.accuracy == pytest.approx(0.7)
        assert mean.auc == pytest.approx(0.9)

    def test_round_trip(self, tmp_path, results):
        path = tmp_path / "metrics.csv"
        write_metrics_csv(path, results)
        lines = path.read_text().splitlines()
        assert lines[0] == "repetition,seed,accuracy,f1,auc,mcc"
        assert lines[-1].startswith("mean,,0.700000")
        read = read_metrics_csv(path)
        assert read["accuracy"] == [0.8, 0.6]
        assert math.isnan(read["auc"][1])

    def test_missing_column(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text("repetition,seed,accuracy\n0,0,0.5\n")
        with pytest.raises(ReviewDataError, match="missing column"):
            read_metrics_csv(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_text("repetition,seed,accuracy,f1,auc,mcc\n0,0,high,0.5,0.5,0.1\n")
        with pytest.raises(RecordError, match="line 2"):
            read_metrics_csv(path)

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "metrics.csv"
        path.write_bytes(b"repetition,seed,accuracy,f1,auc,mcc\n0,0,0.5,0.5,0.5,\xff\n")
        with pytest.raises(RecordError, match="line 2"):
            read_metrics_csv(path)


class TestCompare:
    """Per-metric verdicts."""

    def test_identical_samples_tie(self):
        values = np.linspace(0.5, 0.9, 30)
        rows = compare_samples(samples(values), samples(values))
        assert {row.verdict.outcome for row in rows} == {Outcome.TIE}
        assert tally(rows) == "0/4/0"

    def test_clear_improvement_wins(self):
        theirs = np.linspace(0.5, 0.6, 30)
        ours = theirs + 0.2 + np.arange(30) * 0.001
        rows = compare_samples(samples(ours), samples(theirs))
        assert tally(rows) == "4/0/0"
        assert rows[0].ours_mean == pytest.approx(float(np.mean(ours)))

    def test_nan_pairs_are_dropped(self):
        theirs = list(np.linspace(0.5, 0.6, 30))
        ours = [value + 0.3 for value in theirs]
        ours[0] = math.nan
        rows = compare_samples(samples(ours), samples(theirs))
        assert rows[0].ours_mean == pytest.approx(float(np.mean(ours[1:])))

    def test_length_mismatch(self):
        with pytest.raises(ReviewDataError, match="differ in length"):
            compare_samples(samples([0.1] * 5), samples([0.1] * 6))

    def test_nothing_left_to_compare(self):
        with pytest.raises(ReviewDataError):
            compare_samples(samples([math.nan] * 5), samples([0.1] * 5))

    def test_table_and_csv(self, tmp_path):
        values = np.linspace(0.5, 0.9, 30)
        table = comparison_table(compare_samples(samples(values), samples(values)))
        assert [row["metric"] for row in table] == [*METRIC_NAMES, "W/T/L"]
        assert table[0]["p(delta)"] == "1(+Negligible)"
        assert table[-1]["verdict"] == "0/4/0"
        path = tmp_path / "compare.csv"
        write_comparison_csv(path, table)
        assert path.read_text().splitlines()[0] == "metric,ours,theirs,p(delta),verdict"
