"""Mini-batch training with per-sample gradients, evaluation passes and history files."""

from __future__ import annotations

import csv
import logging
import math
import time
from collections.abc import Callable, Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TypeVar

import numpy as np

from simast_review.config import ModelConfig
from simast_review.errors import ReviewDataError
from simast_review.evaluation.metrics import ConfusionCounts, MetricRow, summarize
from simast_review.model.embedding import EmbeddingTable
from simast_review.model.encoder import (
    ModelParams,
    init_params,
    l2_penalty,
    predict_pair,
    sample_loss,
)
from simast_review.nn.optim import AdamState, adam_step
from simast_review.nn.tensor import Array, gradients
from simast_review.training.dataset import PreparedPair, exact_class_weights


logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ("epoch", "loss", "accuracy", "f1", "auc", "mcc")

_In = TypeVar("_In")
_Out = TypeVar("_Out")


def _map_ordered(fn: Callable[[_In], _Out], items: Sequence[_In], threads: int) -> list[_Out]:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True, slots=True)
class EpochRecord:
    epoch: int
    loss: float
    metrics: MetricRow

    def as_row(self) -> dict[str, str]:
        return {"epoch": str(self.epoch), "loss": format_float(self.loss)} | {
            name: format_float(value) for name, value in self.metrics.as_dict().items()
        }


@dataclass
class TrainingResult:
    params: ModelParams
    history: list[EpochRecord] = field(default_factory=list)
    seconds: float = 0.0


@dataclass(frozen=True)
class Evaluation:
    counts: ConfusionCounts
    scores: list[float]
    labels: list[int]

    @property
    def metrics(self) -> MetricRow:
        return summarize(self.counts, self.scores, self.labels)


def format_float(value: float) -> str:
    return "nan" if math.isnan(value) else f"{value:.6f}"


def resolve_weights(config: ModelConfig, labels: Iterable[int]) -> tuple[float, float]:
    """Configured class weights, or balanced weights from the training labels."""
    if config.class_weights is not None:
        return config.class_weights
    try:
        weight_original, weight_revised = exact_class_weights(labels)
    except ReviewDataError:
        logger.warning("Training split holds a single class; using unit class weights")
        return 1.0, 1.0
    return float(weight_original), float(weight_revised)


def evaluate(
    params: ModelParams,
    pairs: Sequence[PreparedPair],
    embeddings: EmbeddingTable,
    config: ModelConfig,
    threads: int = 1,
) -> Evaluation:
    """Predict every pair: the class is the argmax, the score is P(accept)."""
    frozen = params.detached()

    def score(pair: PreparedPair) -> float:
        probabilities = predict_pair(pair.original, pair.revised, embeddings, frozen, config)
        return float(probabilities.data[0, 1])

    scores = _map_ordered(score, pairs, threads)
    labels = [pair.label for pair in pairs]
    predictions = [1 if s > 0.5 else 0 for s in scores]
    return Evaluation(ConfusionCounts.from_predictions(labels, predictions), scores, labels)


def _sample_gradients(
    pair: PreparedPair,
    embeddings: EmbeddingTable,
    params: ModelParams,
    config: ModelConfig,
    weights: tuple[float, float],
    order: Sequence[str],
) -> tuple[float, list[Array | None]]:
    probabilities = predict_pair(pair.original, pair.revised, embeddings, params, config)
    loss = sample_loss(probabilities, pair.label, weights)
    return loss.item(), gradients(loss, [params[name] for name in order])


def train(
    config: ModelConfig,
    train_pairs: Sequence[PreparedPair],
    eval_pairs: Sequence[PreparedPair],
    embeddings: EmbeddingTable,
    *,
    epochs: int = 10,
    batch_size: int = 128,
    seed: int = 0,
    threads: int = 1,
    weights: tuple[float, float] | None = None,
) -> TrainingResult:
    """Train from a seeded initialization; one Adam step per mini-batch.

    The batch loss is the sum of per-sample losses plus the L2 term once. Per-sample
    gradients may be computed on several threads; they are summed in sample order, so
    the result does not depend on ``threads``. History metrics are measured on
    ``eval_pairs`` (or on the training pairs when none are given).
    """
    if not train_pairs:
        raise ReviewDataError("cannot train on an empty training set")
    if batch_size < 1:
        raise ReviewDataError(f"batch size must be positive, got {batch_size}")
    params = init_params(config, seed)
    active = params.active()
    names = list(active)
    weights = weights or resolve_weights(config, (pair.label for pair in train_pairs))
    state = AdamState.for_params(
        active,
        learning_rate=config.learning_rate,
        beta1=config.adam_beta1,
        beta2=config.adam_beta2,
        epsilon=config.adam_epsilon,
    )
    rng = np.random.default_rng(seed)
    monitor = eval_pairs or train_pairs
    result = TrainingResult(params)
    logger.info(
        "Training %s model on %d pairs for %d epochs (batch %d, weights %.4f/%.4f)",
        config.variant,
        len(train_pairs),
        epochs,
        batch_size,
        *weights,
    )

    started = time.perf_counter()
    for epoch in range(1, epochs + 1):
        epoch_started = time.perf_counter()
        order = rng.permutation(len(train_pairs))
        total = 0.0
        for start in range(0, len(order), batch_size):
            batch = [train_pairs[i] for i in order[start : start + batch_size]]
            outcomes = _map_ordered(
                lambda pair: _sample_gradients(pair, embeddings, params, config, weights, names),
                batch,
                threads,
            )
            penalty = l2_penalty(params, config.l2_lambda)
            summed: list[Array | None] = gradients(penalty, [active[n] for n in names])
            total += penalty.item()
            for loss_value, grads in outcomes:
                total += loss_value
                for index, grad in enumerate(grads):
                    if grad is None:
                        continue
                    current = summed[index]
                    summed[index] = grad if current is None else current + grad
            for name, grad in zip(names, summed):
                active[name].grad = grad
            adam_step(active, state)

        evaluation = evaluate(params, monitor, embeddings, config, threads)
        record = EpochRecord(epoch, total / len(train_pairs), evaluation.metrics)
        result.history.append(record)
        logger.info(
            "Epoch %d/%d loss %.6f accuracy %.4f (%.2fs)",
            epoch,
            epochs,
            record.loss,
            record.metrics.accuracy,
            time.perf_counter() - epoch_started,
        )
    result.seconds = time.perf_counter() - started
    logger.info("Training finished in %.2fs", result.seconds)
    return result


def write_history(path: str | Path, history: Sequence[EpochRecord]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as handle:
        writer = csv.DictWriter(handle, fieldnames=HISTORY_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(record.as_row() for record in history)
