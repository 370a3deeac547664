"""CLI entry point for simast-review."""

from __future__ import annotations

import csv
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import click
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from simast_review import __version__
from simast_review.config import ModelConfig, load_model_config
from simast_review.errors import (
    ConfigError,
    NumericError,
    ReviewDataError,
    ShapeError,
    StatisticsError,
)
from simast_review.evaluation.metrics import METRIC_NAMES, MetricRow
from simast_review.evaluation.report import REPORT_COLUMNS, repository_report, report_rows, write_report_csv
from simast_review.model.embedding import build_vocab, load_embeddings, save_embeddings, train_skipgram
from simast_review.model.encoder import load_checkpoint, save_checkpoint
from simast_review.syntax.simplifier import KeepRule
from simast_review.training.dataset import (
    label_corpus,
    load_jsonl,
    load_pairs,
    pair_fragment_counts,
    prepare_pairs,
    preprocess_records,
    stratified_split,
    write_jsonl,
)
from simast_review.training.experiment import (
    compare_samples,
    comparison_table,
    read_metrics_csv,
    run_repetitions,
    write_comparison_csv,
    write_metrics_csv,
)
from simast_review.training.synthetic import generate_synthetic_records
from simast_review.training.trainer import evaluate, format_float, train, write_history


logger = logging.getLogger(__name__)

app = typer.Typer(
    name="simast-review",
    help="Automatic code review with simplified-AST graph networks.",
    add_completion=False,
    no_args_is_help=True,
)

console = Console()
err_console = Console(stderr=True)

USAGE_EXIT = 1
DATA_EXIT = 2
DATA_ERRORS = (ReviewDataError, StatisticsError, NumericError, ShapeError)


def setup_logging(level: str) -> None:
    """Route all records through a single RichHandler on stderr."""
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ConfigError(f"unknown log level {level!r}")
    root = logging.getLogger()
    for handler in list(root.handlers):
        if isinstance(handler, RichHandler):
            root.removeHandler(handler)
    root.addHandler(RichHandler(console=err_console, show_path=False, markup=False))
    root.setLevel(numeric)
    logging.getLogger("gensim").setLevel(max(numeric, logging.WARNING))


def version_callback(value: bool) -> None:
    if value:
        console.print(f"simast-review v{__version__}")
        raise typer.Exit()


@app.callback()
def configure(
    log_level: str = typer.Option("INFO", "--log-level", help="Logging level"),
    verbose: bool = typer.Option(False, "--verbose", help="Shortcut for --log-level DEBUG"),
    version: bool = typer.Option(  # noqa: ARG001
        False, "--version", callback=version_callback, is_eager=True, help="Show version and exit"
    ),
) -> None:
    """Automatic code review with simplified-AST graph networks."""
    setup_logging("DEBUG" if verbose else log_level)


def _metrics_table(title: str, rows: Sequence[tuple[str, MetricRow]]) -> Table:
    table = Table(title=title)
    table.add_column("Run", style="cyan")
    for name in METRIC_NAMES:
        table.add_column(name, justify="right")
    for label, metrics in rows:
        values = metrics.as_dict()
        table.add_row(label, *(format_float(values[name]) for name in METRIC_NAMES))
    return table


def _check_embeddings(config: ModelConfig, dim: int) -> None:
    if dim != config.embedding_dim:
        raise ShapeError(
            f"embeddings have dimension {dim} but the config expects {config.embedding_dim}"
        )


@app.command()
def preprocess(
    input_path: Path = typer.Option(
        ..., "--input", exists=True, dir_okay=False, help="Review records (JSONL)"
    ),
    output: Path = typer.Option(..., "--output", help="Preprocessed pair file (JSONL)"),
    no_simplify: bool = typer.Option(False, "--no-simplify", help="Keep the full AST"),
    keep_rule: str = typer.Option(
        "Declaration,Statement", "--keep-rule", help="Comma-separated label substrings to keep"
    ),
    threads: int = typer.Option(1, "--threads", min=1, help="Worker threads"),
) -> None:
    """Parse, simplify and serialize review records into graph pairs."""
    try:
        rule = None if no_simplify else KeepRule.parse(keep_rule)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    pairs = preprocess_records(load_jsonl(input_path), rule, threads)
    write_jsonl(output, pairs)
    console.print(f"Wrote {len(pairs)} pairs to {output}")


@app.command("train-embeddings")
def train_embeddings(
    input_path: Path = typer.Option(
        ..., "--input", exists=True, dir_okay=False, help="Preprocessed pair file"
    ),
    output: Path = typer.Option(..., "--output", help="Embedding file"),
    dim: int = typer.Option(300, "--dim"),
    window: int = typer.Option(5, "--window"),
    negatives: int = typer.Option(5, "--negatives"),
    epochs: int = typer.Option(5, "--epochs"),
    seed: int = typer.Option(0, "--seed"),
) -> None:
    """Train skip-gram node embeddings over original and revised fragments."""
    corpus = label_corpus(load_pairs(input_path))
    table = train_skipgram(
        corpus,
        dim=dim,
        window=window,
        negatives=negatives,
        epochs=epochs,
        seed=seed,
        vocab=build_vocab(corpus),
    )
    save_embeddings(output, table)
    console.print(f"Wrote {len(table.vocab)} x {table.dim} embeddings to {output}")


@app.command("train")
def train_command(
    pairs_path: Path = typer.Option(..., "--pairs", exists=True, dir_okay=False),
    embeddings_path: Path = typer.Option(..., "--embeddings", exists=True, dir_okay=False),
    config_path: Path | None = typer.Option(None, "--config", exists=True, dir_okay=False),
    seed: int = typer.Option(0, "--seed"),
    epochs: int = typer.Option(10, "--epochs", min=0),
    batch: int = typer.Option(128, "--batch", min=1),
    train_fraction: float = typer.Option(0.8, "--train-fraction", min=0.0, max=1.0),
    checkpoint: Path | None = typer.Option(None, "--checkpoint"),
    history: Path | None = typer.Option(None, "--history"),
    threads: int = typer.Option(1, "--threads", min=1),
) -> None:
    """Train on a seeded stratified split; history metrics are measured on the held-out part."""
    config = load_model_config(config_path)
    embeddings = load_embeddings(embeddings_path)
    _check_embeddings(config, embeddings.dim)
    train_lines, test_lines = stratified_split(load_pairs(pairs_path), train_fraction, seed)
    train_pairs = prepare_pairs(train_lines, config.normalization)
    test_pairs = prepare_pairs(test_lines, config.normalization)
    result = train(
        config,
        train_pairs,
        test_pairs,
        embeddings,
        epochs=epochs,
        batch_size=batch,
        seed=seed,
        threads=threads,
    )
    if checkpoint is not None:
        save_checkpoint(checkpoint, result.params, config)
    if history is not None:
        write_history(history, result.history)
    final = evaluate(result.params, test_pairs, embeddings, config, threads).metrics
    console.print(_metrics_table("Held-out metrics", [(f"seed {seed}", final)]))


@app.command("eval")
def eval_command(
    pairs_path: Path = typer.Option(..., "--pairs", exists=True, dir_okay=False),
    checkpoint: Path = typer.Option(..., "--checkpoint", exists=True, dir_okay=False),
    embeddings_path: Path = typer.Option(..., "--embeddings", exists=True, dir_okay=False),
    output: Path | None = typer.Option(None, "--output", help="Write the metrics row as CSV"),
    threads: int = typer.Option(1, "--threads", min=1),
) -> None:
    """Evaluate a checkpoint on every pair of a preprocessed file."""
    params, config = load_checkpoint(checkpoint)
    embeddings = load_embeddings(embeddings_path)
    _check_embeddings(config, embeddings.dim)
    pairs = prepare_pairs(load_pairs(pairs_path), config.normalization)
    metrics = evaluate(params, pairs, embeddings, config, threads).metrics
    console.print(_metrics_table("Evaluation", [(pairs_path.name, metrics)]))
    if output is not None:
        values = metrics.as_dict()
        with output.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(METRIC_NAMES)
            writer.writerow([format_float(values[name]) for name in METRIC_NAMES])


@app.command()
def repeat(
    pairs_path: Path = typer.Option(..., "--pairs", exists=True, dir_okay=False),
    embeddings_path: Path = typer.Option(..., "--embeddings", exists=True, dir_okay=False),
    output: Path = typer.Option(..., "--output", help="Per-repetition metrics CSV"),
    config_path: Path | None = typer.Option(None, "--config", exists=True, dir_okay=False),
    reps: int = typer.Option(30, "--reps", min=1),
    base_seed: int = typer.Option(0, "--base-seed"),
    epochs: int = typer.Option(10, "--epochs", min=0),
    batch: int = typer.Option(128, "--batch", min=1),
    train_fraction: float = typer.Option(0.8, "--train-fraction", min=0.0, max=1.0),
    threads: int = typer.Option(1, "--threads", min=1),
) -> None:
    """Repeat split/train/evaluate with seeds base, base+1, ..."""
    config = load_model_config(config_path)
    embeddings = load_embeddings(embeddings_path)
    _check_embeddings(config, embeddings.dim)
    results = run_repetitions(
        config,
        load_pairs(pairs_path),
        embeddings,
        repetitions=reps,
        base_seed=base_seed,
        epochs=epochs,
        batch_size=batch,
        train_fraction=train_fraction,
        threads=threads,
    )
    write_metrics_csv(output, results)
    console.print(
        _metrics_table(
            f"{reps} repetitions", [(f"seed {r.seed}", r.metrics) for r in results]
        )
    )


@app.command()
def compare(
    ours: Path = typer.Option(..., "--ours", exists=True, dir_okay=False),
    theirs: Path = typer.Option(..., "--theirs", exists=True, dir_okay=False),
    output: Path | None = typer.Option(None, "--output", help="Write the table as CSV"),
) -> None:
    """Wilcoxon p, Cliff's delta and Win/Tie/Loss per metric for two repetition CSVs."""
    table_rows = comparison_table(compare_samples(read_metrics_csv(ours), read_metrics_csv(theirs)))
    table = Table(title=f"{ours.name} vs {theirs.name}")
    for column in ("metric", "ours", "theirs", "p(delta)", "verdict"):
        table.add_column(column, style="cyan" if column == "metric" else None)
    for row in table_rows:
        table.add_row(row["metric"], row["ours"], row["theirs"], row["p(delta)"], row["verdict"])
    console.print(table)
    if output is not None:
        write_comparison_csv(output, table_rows)


@app.command()
def stats(
    input_path: Path = typer.Option(
        ..., "--input", exists=True, dir_okay=False, help="Preprocessed pair file"
    ),
    output: Path | None = typer.Option(None, "--output", help="Write the report as CSV"),
) -> None:
    """Token statistics of original versus simplified trees, per repository."""
    rows = report_rows(repository_report(pair_fragment_counts(load_pairs(input_path))))
    table = Table(title="Simplification statistics")
    for column in REPORT_COLUMNS:
        table.add_column(column, justify="left" if column in ("Repository", "Version") else "right")
    for row in rows:
        table.add_row(*(row[column] for column in REPORT_COLUMNS))
    console.print(table)
    if output is not None:
        write_report_csv(output, rows)


@app.command("generate-fixture")
def generate_fixture(
    output: Path = typer.Option(..., "--output", help="Review records (JSONL)"),
    pairs: int = typer.Option(400, "--pairs", min=2),
    seed: int = typer.Option(0, "--seed"),
) -> None:
    """Write a synthetic corpus where accepted revisions add a null guard."""
    records = generate_synthetic_records(pairs, seed)
    write_jsonl(output, records)
    console.print(f"Wrote {len(records)} synthetic records to {output}")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and map failures to exit codes: 1 for usage, 2 for bad data."""
    args = list(argv) if argv is not None else sys.argv[1:]
    try:
        result = app(args=args, prog_name="simast-review", standalone_mode=False)
    except click.ClickException as exc:
        exc.show(file=sys.stderr)
        return USAGE_EXIT
    except click.Abort:
        err_console.print("Aborted.")
        return USAGE_EXIT
    except ConfigError as exc:
        err_console.print(f"[red]Configuration error:[/red] {escape(str(exc))}")
        return USAGE_EXIT
    except FileNotFoundError as exc:
        err_console.print(f"[red]File not found:[/red] {exc.filename}")
        return USAGE_EXIT
    except DATA_ERRORS as exc:
        err_console.print(f"[red]Data error:[/red] {escape(str(exc))}")
        return DATA_EXIT
    return result if isinstance(result, int) else 0


def run() -> None:
    sys.exit(main())
