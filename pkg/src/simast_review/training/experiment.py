"""Repeated train/evaluate runs and pairwise comparison of their metric samples."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

from simast_review.config import ModelConfig
from simast_review.errors import RecordError, ReviewDataError
from simast_review.evaluation.metrics import METRIC_NAMES, MetricRow
from simast_review.evaluation.stats import Outcome, Verdict, win_tie_loss
from simast_review.model.embedding import EmbeddingTable
from simast_review.training.dataset import PairLine, prepare_pairs, stratified_split
from simast_review.training.trainer import evaluate, format_float, train


logger = logging.getLogger(__name__)

METRICS_COLUMNS = ("repetition", "seed", *METRIC_NAMES)
MEAN_ROW = "mean"


@dataclass(frozen=True, slots=True)
class RepetitionResult:
    repetition: int
    seed: int
    metrics: MetricRow
    seconds: float = 0.0


def run_repetitions(
    config: ModelConfig,
    pairs: Sequence[PairLine],
    embeddings: EmbeddingTable,
    *,
    repetitions: int = 30,
    base_seed: int = 0,
    epochs: int = 10,
    batch_size: int = 128,
    train_fraction: float = 0.8,
    threads: int = 1,
) -> list[RepetitionResult]:
    """Repetition ``k`` uses seed ``base_seed + k`` for its split, initialization and shuffle."""
    if repetitions < 1:
        raise ReviewDataError(f"repetitions must be at least 1, got {repetitions}")
    results: list[RepetitionResult] = []
    for repetition in range(repetitions):
        seed = base_seed + repetition
        train_lines, test_lines = stratified_split(pairs, train_fraction, seed)
        train_pairs = prepare_pairs(train_lines, config.normalization)
        test_pairs = prepare_pairs(test_lines, config.normalization)
        outcome = train(
            config,
            train_pairs,
            test_pairs,
            embeddings,
            epochs=epochs,
            batch_size=batch_size,
            seed=seed,
            threads=threads,
        )
        metrics = evaluate(outcome.params, test_pairs, embeddings, config, threads).metrics
        results.append(RepetitionResult(repetition, seed, metrics, outcome.seconds))
        logger.info(
            "Repetition %d/%d (seed %d): accuracy %.4f, trained in %.2fs",
            repetition + 1,
            repetitions,
            seed,
            metrics.accuracy,
            outcome.seconds,
        )
    return results


def mean_metrics(rows: Sequence[MetricRow]) -> MetricRow:
    """Column means; NaN entries (undefined AUC) are skipped."""

    def column(name: str) -> float:
        values = [getattr(row, name) for row in rows if not math.isnan(getattr(row, name))]
        return math.fsum(values) / len(values) if values else math.nan

    return MetricRow(**{name: column(name) for name in METRIC_NAMES})


def write_metrics_csv(path: str | Path, results: Sequence[RepetitionResult]) -> None:
    """One row per repetition plus a trailing ``mean`` row; wall-clock time is not written."""
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(METRICS_COLUMNS)
        for result in results:
            values = result.metrics.as_dict()
            writer.writerow(
                [result.repetition, result.seed, *(format_float(values[n]) for n in METRIC_NAMES)]
            )
        mean = mean_metrics([result.metrics for result in results]).as_dict()
        writer.writerow([MEAN_ROW, "", *(format_float(mean[n]) for n in METRIC_NAMES)])


def read_metrics_csv(path: str | Path) -> dict[str, list[float]]:
    """Per-metric samples from a repetition CSV, ignoring the mean row."""
    samples: dict[str, list[float]] = {name: [] for name in METRIC_NAMES}
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise RecordError(raw.count(b"\n", 0, exc.start) + 1, f"invalid UTF-8 in {path}") from exc
    reader = csv.DictReader(io.StringIO(text, newline=""))
    missing = [name for name in METRICS_COLUMNS if name not in (reader.fieldnames or [])]
    if missing:
        raise ReviewDataError(f"{path}: missing column(s) {', '.join(missing)}")
    for number, row in enumerate(reader, start=2):
        if row["repetition"] == MEAN_ROW:
            continue
        try:
            for name in METRIC_NAMES:
                samples[name].append(float(row[name]))
        except (TypeError, ValueError) as exc:
            raise RecordError(number, f"non-numeric metric value in {path}") from exc
    return samples


@dataclass(frozen=True, slots=True)
class ComparisonRow:
    metric: str
    ours_mean: float
    theirs_mean: float
    verdict: Verdict


def compare_samples(
    ours: Mapping[str, Sequence[float]], theirs: Mapping[str, Sequence[float]]
) -> list[ComparisonRow]:
    rows: list[ComparisonRow] = []
    for name in METRIC_NAMES:
        left, right = list(ours[name]), list(theirs[name])
        if len(left) != len(right):
            raise ReviewDataError(
                f"{name}: paired samples differ in length ({len(left)} and {len(right)})"
            )
        keep = [i for i in range(len(left)) if not (math.isnan(left[i]) or math.isnan(right[i]))]
        left = [left[i] for i in keep]
        right = [right[i] for i in keep]
        if not left:
            raise ReviewDataError(f"{name}: no paired values to compare")
        rows.append(
            ComparisonRow(
                name,
                math.fsum(left) / len(left),
                math.fsum(right) / len(right),
                win_tie_loss(left, right),
            )
        )
    return rows


def tally(rows: Sequence[ComparisonRow]) -> str:
    """``W/T/L`` counts across metrics."""
    counts = {outcome: 0 for outcome in Outcome}
    for row in rows:
        counts[row.verdict.outcome] += 1
    return f"{counts[Outcome.WIN]}/{counts[Outcome.TIE]}/{counts[Outcome.LOSS]}"


def comparison_table(rows: Sequence[ComparisonRow]) -> list[dict[str, str]]:
    table = [
        {
            "metric": row.metric,
            "ours": format_float(row.ours_mean),
            "theirs": format_float(row.theirs_mean),
            "p(delta)": row.verdict.format_p_delta(),
            "verdict": row.verdict.outcome.value,
        }
        for row in rows
    ]
    table.append(
        {"metric": "W/T/L", "ours": "", "theirs": "", "p(delta)": "", "verdict": tally(rows)}
    )
    return table


def write_comparison_csv(path: str | Path, table: Sequence[dict[str, str]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=("metric", "ours", "theirs", "p(delta)", "verdict"), lineterminator="\n"
        )
        writer.writeheader()
        writer.writerows(table)
