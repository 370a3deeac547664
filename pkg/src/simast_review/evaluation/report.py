"""Simplification statistics: token counts before and after simplifying, per repository.

Rates are computed with :class:`fractions.Fraction` and only rounded when rendered.

* simplified rate = 1 - simplified average token / original average token
* code token rate = average code token / average token
* percentage increase = simplified code token rate - original code token rate
"""

from __future__ import annotations

import csv
import logging
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import TypeVar

from simast_review.errors import ReviewDataError, StatisticsError
from simast_review.syntax.tree import Ast, code_token_count, count_nodes


logger = logging.getLogger(__name__)

AVERAGE_ROW = "Average"
REPORT_COLUMNS = (
    "Repository",
    "Version",
    "Max token",
    "Average token",
    "Simplified rate",
    "Average code token",
    "Code token rate",
    "Percentage increase",
)

Number = TypeVar("Number", Fraction, float)


def simplified_rate(original_average: Number, simplified_average: Number) -> Number:
    return 1 - simplified_average / original_average


def code_token_rate(code_average: Number, average: Number) -> Number:
    return code_average / average


def percentage_increase(original_rate: Number, simplified_rate: Number) -> Number:
    return simplified_rate - original_rate


@dataclass(frozen=True, slots=True)
class FragmentCounts:
    """Node and code-token counts of one fragment before and after simplification."""

    repository: str
    original_nodes: int
    simplified_nodes: int
    code_tokens: int


def fragment_counts(original: Ast, simplified: Ast, repository: str = "all") -> FragmentCounts:
    code = code_token_count(original)
    if code_token_count(simplified) != code:
        raise ReviewDataError("simplification changed the number of code tokens")
    return FragmentCounts(repository, count_nodes(original), count_nodes(simplified), code)


@dataclass(frozen=True, slots=True)
class SideStats:
    max_token: Fraction
    average_token: Fraction
    average_code_token: Fraction

    @property
    def code_token_rate(self) -> Fraction:
        return code_token_rate(self.average_code_token, self.average_token)


@dataclass(frozen=True, slots=True)
class CorpusStats:
    repository: str
    original: SideStats
    simplified: SideStats

    @property
    def simplified_rate(self) -> Fraction:
        return simplified_rate(self.original.average_token, self.simplified.average_token)

    @property
    def percentage_increase(self) -> Fraction:
        return percentage_increase(self.original.code_token_rate, self.simplified.code_token_rate)


def corpus_stats(counts: Sequence[FragmentCounts], repository: str = "all") -> CorpusStats:
    if not counts:
        raise StatisticsError("token statistics need a non-empty corpus")
    size = len(counts)
    code_average = Fraction(sum(c.code_tokens for c in counts), size)
    original = SideStats(
        Fraction(max(c.original_nodes for c in counts)),
        Fraction(sum(c.original_nodes for c in counts), size),
        code_average,
    )
    simplified = SideStats(
        Fraction(max(c.simplified_nodes for c in counts)),
        Fraction(sum(c.simplified_nodes for c in counts), size),
        code_average,
    )
    return CorpusStats(repository, original, simplified)


def tree_stats(corpus: Iterable[tuple[Ast, Ast]], repository: str = "all") -> CorpusStats:
    """Statistics for ``(original, simplified)`` tree pairs forming one corpus."""
    return corpus_stats([fragment_counts(o, s, repository) for o, s in corpus], repository)


def _mean_side(sides: Sequence[SideStats]) -> SideStats:
    size = len(sides)
    return SideStats(
        sum((s.max_token for s in sides), Fraction(0)) / size,
        sum((s.average_token for s in sides), Fraction(0)) / size,
        sum((s.average_code_token for s in sides), Fraction(0)) / size,
    )


def repository_report(counts: Sequence[FragmentCounts]) -> list[CorpusStats]:
    """One entry per repository (sorted by name) followed by the average over repositories."""
    grouped: dict[str, list[FragmentCounts]] = defaultdict(list)
    for item in counts:
        grouped[item.repository].append(item)
    if not grouped:
        raise StatisticsError("token statistics need a non-empty corpus")
    rows = [corpus_stats(grouped[name], name) for name in sorted(grouped)]
    average = CorpusStats(
        AVERAGE_ROW,
        _mean_side([row.original for row in rows]),
        _mean_side([row.simplified for row in rows]),
    )
    logger.info("Token statistics over %d fragments in %d repositories", len(counts), len(rows))
    return [*rows, average]


def _decimal(value: Fraction) -> str:
    return f"{float(value):.2f}"


def _percent(value: Fraction) -> str:
    return f"{float(value * 100):.2f}%"


def report_rows(stats: Iterable[CorpusStats]) -> list[dict[str, str]]:
    rows: list[dict[str, str]] = []
    for entry in stats:
        for version, side in (("Original", entry.original), ("Simplified", entry.simplified)):
            simplified = version == "Simplified"
            rows.append(
                {
                    "Repository": entry.repository,
                    "Version": version,
                    "Max token": _decimal(side.max_token),
                    "Average token": _decimal(side.average_token),
                    "Simplified rate": _percent(entry.simplified_rate) if simplified else "-",
                    "Average code token": _decimal(side.average_code_token),
                    "Code token rate": _percent(side.code_token_rate),
                    "Percentage increase": (
                        _decimal(entry.percentage_increase * 100) if simplified else "-"
                    ),
                }
            )
    return rows


def write_report_csv(path: str | Path, rows: Sequence[dict[str, str]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=REPORT_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
