"""Tests for the simast-review command line."""

import csv
import json
from pathlib import Path

import pytest

from simast_review import __version__
from simast_review.cli import main


def read_csv(path: Path) -> list[dict[str, str]]:
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


@pytest.fixture(scope="module")
def workspace(tmp_path_factory) -> Path:
    """Synthetic records, preprocessed pairs, 8-dimensional embeddings and a small config."""
    root = tmp_path_factory.mktemp("cli")
    assert main(["generate-fixture", "--output", str(root / "records.jsonl"), "--pairs", "24", "--seed", "1"]) == 0
    assert main(["preprocess", "--input", str(root / "records.jsonl"), "--output", str(root / "pairs.jsonl")]) == 0
    assert (
        main(
            [
                "train-embeddings",
                "--input",
                str(root / "pairs.jsonl"),
                "--output",
                str(root / "emb.bin"),
                "--dim",
                "8",
                "--epochs",
                "1",
            ]
        )
        == 0
    )
    (root / "model.cfg").write_text("# small model\nembedding_dim = 8\nhidden_dim = 8\n")
    return root


def test_version(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


class TestUsageErrors:
    """Exit code 1 for bad flags, files and configs."""

    def test_unknown_flag(self):
        assert main(["--bogus"]) == 1

    def test_unknown_command(self):
        assert main(["summon"]) == 1

    def test_missing_input(self, tmp_path):
        assert main(["stats", "--input", str(tmp_path / "absent.jsonl")]) == 1

    def test_bad_log_level(self, workspace):
        assert main(["--log-level", "LOUD", "stats", "--input", str(workspace / "pairs.jsonl")]) == 1

    def test_bad_config(self, workspace, capsys):
        config = workspace / "bad.cfg"
        config.write_text("hiden_dim = 8\n")
        code = main(
            [
                "train",
                "--pairs",
                str(workspace / "pairs.jsonl"),
                "--embeddings",
                str(workspace / "emb.bin"),
                "--config",
                str(config),
            ]
        )
        assert code == 1
        assert "hiden_dim" in capsys.readouterr().err

    def test_empty_keep_rule(self, workspace, tmp_path):
        code = main(
            [
                "preprocess",
                "--input",
                str(workspace / "records.jsonl"),
                "--output",
                str(tmp_path / "pairs.jsonl"),
                "--keep-rule",
                " , ",
            ]
        )
        assert code == 1


class TestDataErrors:
    """Exit code 2 for inputs that cannot be processed."""

    def test_bad_record(self, tmp_path, capsys):
        records = tmp_path / "records.jsonl"
        records.write_text(json.dumps({"id": "a", "original": "void f() {}", "revised": "void f() {}", "label": 2}) + "\n")
        assert main(["preprocess", "--input", str(records), "--output", str(tmp_path / "out.jsonl")]) == 2
        assert "line 1" in capsys.readouterr().err

    def test_embedding_dimension_mismatch(self, workspace):
        code = main(["train", "--pairs", str(workspace / "pairs.jsonl"), "--embeddings", str(workspace / "emb.bin")])
        assert code == 2

    def test_records_that_are_not_utf8(self, tmp_path, capsys):
        records = tmp_path / "records.jsonl"
        good = json.dumps({"id": "a", "original": "void f() {}", "revised": "void f() {}", "label": 0})
        records.write_bytes(good.encode() + b"\n" + b'{"id": "b", "original": "\xff"}\n')
        assert main(["preprocess", "--input", str(records), "--output", str(tmp_path / "out.jsonl")]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_metrics_that_are_not_utf8(self, tmp_path):
        metrics = tmp_path / "metrics.csv"
        metrics.write_bytes(b"repetition,seed,accuracy,f1,auc,mcc\n0,0,\xff,0.5,0.5,0.1\n")
        assert main(["compare", "--ours", str(metrics), "--theirs", str(metrics)]) == 2


def test_deeply_nested_method_preprocesses(tmp_path, deep_chain_source):
    records = tmp_path / "records.jsonl"
    record = {"id": "deep", "original": deep_chain_source, "revised": "int f(){ return a; }", "label": 1}
    records.write_text(json.dumps(record) + "\n")
    output = tmp_path / "pairs.jsonl"
    assert main(["preprocess", "--input", str(records), "--output", str(output)]) == 0
    assert main(["stats", "--input", str(output)]) == 0


class TestStats:
    def test_simplified_corpus(self, workspace, tmp_path):
        output = tmp_path / "stats.csv"
        assert main(["stats", "--input", str(workspace / "pairs.jsonl"), "--output", str(output)]) == 0
        rows = read_csv(output)
        assert rows[-1]["Repository"] == "Average"
        assert rows[-1]["Simplified rate"].endswith("%")

    def test_unsimplified_corpus_has_zero_rate(self, workspace, tmp_path):
        pairs = tmp_path / "full.jsonl"
        output = tmp_path / "stats.csv"
        args = ["preprocess", "--input", str(workspace / "records.jsonl"), "--output", str(pairs), "--no-simplify"]
        assert main(args) == 0
        assert main(["stats", "--input", str(pairs), "--output", str(output)]) == 0
        simplified = [row for row in read_csv(output) if row["Version"] == "Simplified"]
        assert {row["Simplified rate"] for row in simplified} == {"0.00%"}
        assert {row["Percentage increase"] for row in simplified} == {"0.00"}


class TestTraining:
    """train, eval, repeat and compare on the synthetic workspace."""

    def common(self, workspace: Path) -> list[str]:
        return [
            "--pairs",
            str(workspace / "pairs.jsonl"),
            "--embeddings",
            str(workspace / "emb.bin"),
            "--config",
            str(workspace / "model.cfg"),
            "--epochs",
            "1",
            "--batch",
            "8",
        ]

    def test_train_then_eval(self, workspace, tmp_path):
        checkpoint = tmp_path / "model.ckpt"
        history = tmp_path / "history.csv"
        args = ["train", *self.common(workspace), "--checkpoint", str(checkpoint), "--history", str(history)]
        assert main(args) == 0
        assert [row["epoch"] for row in read_csv(history)] == ["1"]

        metrics = tmp_path / "eval.csv"
        code = main(
            [
                "eval",
                "--pairs",
                str(workspace / "pairs.jsonl"),
                "--checkpoint",
                str(checkpoint),
                "--embeddings",
                str(workspace / "emb.bin"),
                "--output",
                str(metrics),
            ]
        )
        assert code == 0
        assert list(read_csv(metrics)[0]) == ["accuracy", "f1", "auc", "mcc"]

    def test_repeat_is_reproducible_and_compares_as_ties(self, workspace, tmp_path):
        first, second = tmp_path / "first.csv", tmp_path / "second.csv"
        assert main(["repeat", *self.common(workspace), "--reps", "3", "--output", str(first)]) == 0
        assert main(["repeat", *self.common(workspace), "--reps", "3", "--output", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()
        assert [row["seed"] for row in read_csv(first)] == ["0", "1", "2", ""]

        # three samples are too few for the signed-rank test, so every metric ties
        table = tmp_path / "compare.csv"
        assert main(["compare", "--ours", str(first), "--theirs", str(second), "--output", str(table)]) == 0
        rows = read_csv(table)
        assert [row["verdict"] for row in rows[:-1]] == ["Tie"] * 4
        assert rows[-1]["verdict"] == "0/4/0"
