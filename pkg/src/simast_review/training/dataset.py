"""Review records, preprocessing into serialized fragment pairs, splitting and class weights."""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Iterable, Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Literal, Protocol, TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from simast_review.errors import RecordError, ReviewDataError
from simast_review.evaluation.report import FragmentCounts
from simast_review.syntax.graph import FragmentGraph, Normalization, build_graph, code_mask, serialize
from simast_review.syntax.interchange import ingest_node
from simast_review.syntax.parser import parse_subset
from simast_review.syntax.simplifier import KeepRule, simplify
from simast_review.syntax.tree import Ast, count_nodes


logger = logging.getLogger(__name__)

DEFAULT_REPOSITORY = "all"


class ReviewRecord(BaseModel):
    """One review: the original and revised method plus the decision (0 reject, 1 accept)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str = Field(min_length=1)
    original: str | dict[str, Any]
    revised: str | dict[str, Any]
    label: Literal[0, 1]
    format: Literal["source", "ast"] = "source"
    repository: str | None = None

    @model_validator(mode="after")
    def _fragments_match_format(self) -> ReviewRecord:
        for side in ("original", "revised"):
            value = getattr(self, side)
            if self.format == "source" and not (isinstance(value, str) and value.strip()):
                raise ValueError(f"{side} must be non-empty source text")
            if self.format == "ast" and not isinstance(value, dict):
                raise ValueError(f"{side} must be an interchange node object")
        return self


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(part) for part in error["loc"])
    return f"{where}: {error['msg']}" if where else str(error["msg"])


def read_lines(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (line number, text) for every non-blank line of a UTF-8 file."""
    with Path(path).open("rb") as handle:
        for number, raw in enumerate(handle, start=1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise RecordError(number, f"invalid UTF-8 at byte {exc.start}") from exc
            if line.strip():
                yield number, line


def load_jsonl(path: str | Path) -> list[ReviewRecord]:
    """Read one record per non-blank line, keeping file order."""
    records: list[ReviewRecord] = []
    for number, line in read_lines(path):
        try:
            records.append(ReviewRecord.model_validate_json(line))
        except ValidationError as exc:
            raise RecordError(number, _first_error(exc)) from exc
    logger.info("Loaded %d review records from %s", len(records), path)
    return records


def write_jsonl(path: str | Path, records: Iterable[BaseModel]) -> None:
    """Write one JSON object per line; unset optional fields are left out."""
    with Path(path).open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(record.model_dump_json(exclude_none=True))
            handle.write("\n")


# preprocessed pair file


class FragmentLine(BaseModel):
    """A serialized fragment: pre-order labels, parent indices and code-node mask."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    labels: list[str] = Field(min_length=1)
    parents: list[int | None]
    code_mask: list[Literal[0, 1]]
    source_nodes: int = Field(ge=1)

    @model_validator(mode="after")
    def _aligned(self) -> FragmentLine:
        if not len(self.labels) == len(self.parents) == len(self.code_mask):
            raise ValueError("labels, parents and code_mask differ in length")
        return self

    def graph(self, normalization: Normalization = "row") -> FragmentGraph:
        return build_graph(self.labels, self.parents, normalization)

    def counts(self, repository: str) -> FragmentCounts:
        return FragmentCounts(repository, self.source_nodes, len(self.labels), sum(self.code_mask))


class PairLine(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    id: str
    label: Literal[0, 1]
    repository: str = DEFAULT_REPOSITORY
    original: FragmentLine
    revised: FragmentLine


def fragment_tree(fragment: str | dict[str, Any], fmt: str) -> Ast:
    if fmt == "ast":
        return ingest_node(fragment)
    assert isinstance(fragment, str)
    return parse_subset(fragment)


def serialize_fragment(tree: Ast, rule: KeepRule | None) -> FragmentLine:
    """Serialize ``tree`` after simplification; ``rule=None`` keeps the full tree."""
    kept = simplify(tree, rule) if rule is not None else tree
    labels, parents = serialize(kept)
    return FragmentLine(
        labels=labels, parents=parents, code_mask=code_mask(kept), source_nodes=count_nodes(tree)
    )


def preprocess_record(record: ReviewRecord, rule: KeepRule | None = KeepRule()) -> PairLine:
    try:
        original = fragment_tree(record.original, record.format)
        revised = fragment_tree(record.revised, record.format)
    except ReviewDataError as exc:
        raise ReviewDataError(f"record {record.id}: {exc}") from exc
    return PairLine(
        id=record.id,
        label=record.label,
        repository=record.repository or DEFAULT_REPOSITORY,
        original=serialize_fragment(original, rule),
        revised=serialize_fragment(revised, rule),
    )


def preprocess_records(
    records: Sequence[ReviewRecord], rule: KeepRule | None = KeepRule(), threads: int = 1
) -> list[PairLine]:
    """Parse, simplify and serialize every record; output order matches input order."""
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            pairs = list(pool.map(lambda record: preprocess_record(record, rule), records))
    else:
        pairs = [preprocess_record(record, rule) for record in records]
    logger.info(
        "Preprocessed %d pairs (%s)", len(pairs), "simplified" if rule is not None else "full ASTs"
    )
    return pairs


def load_pairs(path: str | Path) -> list[PairLine]:
    """Read a preprocessed pair file written by ``write_jsonl``."""
    pairs: list[PairLine] = []
    for number, line in read_lines(path):
        try:
            pairs.append(PairLine.model_validate_json(line))
        except ValidationError as exc:
            raise RecordError(number, _first_error(exc)) from exc
    logger.info("Loaded %d preprocessed pairs from %s", len(pairs), path)
    return pairs


def label_corpus(pairs: Iterable[PairLine]) -> list[list[str]]:
    """Label sequences of both fragments of every pair, for vocabulary and skip-gram."""
    corpus: list[list[str]] = []
    for pair in pairs:
        corpus.append(list(pair.original.labels))
        corpus.append(list(pair.revised.labels))
    return corpus


def pair_fragment_counts(pairs: Iterable[PairLine]) -> list[FragmentCounts]:
    counts: list[FragmentCounts] = []
    for pair in pairs:
        counts.append(pair.original.counts(pair.repository))
        counts.append(pair.revised.counts(pair.repository))
    return counts


@dataclass(frozen=True, slots=True)
class PreparedPair:
    id: str
    original: FragmentGraph
    revised: FragmentGraph
    label: int


def prepare_pairs(
    pairs: Iterable[PairLine], normalization: Normalization = "row"
) -> list[PreparedPair]:
    """Build both fragment graphs of every pair."""
    return [
        PreparedPair(
            pair.id,
            pair.original.graph(normalization),
            pair.revised.graph(normalization),
            pair.label,
        )
        for pair in pairs
    ]


# splitting and weights


class Labeled(Protocol):
    @property
    def id(self) -> str: ...

    @property
    def label(self) -> int: ...


Item = TypeVar("Item", bound=Labeled)


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def stratified_split(
    records: Sequence[Item], train_fraction: float = 0.8, seed: int = 0
) -> tuple[list[Item], list[Item]]:
    """Per-class seeded split keyed on record id, so input order does not matter."""
    if not 0.0 <= train_fraction <= 1.0:
        raise ReviewDataError(f"train fraction must lie in [0, 1], got {train_fraction}")
    rng = np.random.default_rng(seed)
    train: list[Item] = []
    test: list[Item] = []
    for label in (0, 1):
        members = sorted((r for r in records if r.label == label), key=lambda r: r.id)
        if not members:
            continue
        order = rng.permutation(len(members))
        cut = _round_half_up(train_fraction * len(members))
        train.extend(members[i] for i in order[:cut])
        test.extend(members[i] for i in order[cut:])
    if not train or not test:
        raise ReviewDataError(
            f"split of {len(records)} records at {train_fraction} leaves an empty side"
        )
    return train, test


def exact_class_weights(labels: Iterable[int]) -> tuple[Fraction, Fraction]:
    """Balanced weights ``(S / 2 S0, S / 2 S1)`` as exact fractions."""
    values = list(labels)
    rejected = sum(1 for value in values if value == 0)
    accepted = len(values) - rejected
    if rejected == 0 or accepted == 0:
        raise ReviewDataError("class weights need both rejected and accepted samples")
    total = len(values)
    return Fraction(total, 2 * rejected), Fraction(total, 2 * accepted)


def class_weights(records: Iterable[Labeled]) -> tuple[float, float]:
    weight_original, weight_revised = exact_class_weights(record.label for record in records)
    return float(weight_original), float(weight_revised)
