from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from newsdiff.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_full_cli_flow(runner, tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    db = str(tmp_path / "cli.sqlite")

    out = invoke(runner, "synth", "--out", str(corpus), "--articles", "8", "--seed", "3")
    assert out["articles"] == 8

    out = invoke(runner, "--db", db, "ingest", str(corpus))
    assert out["accepted"] > 0 and out["errors"] == []

    out = invoke(runner, "--db", db, "diff", "--sim", "unigram", "--threshold", "0.5")
    assert out["pairs_processed"] > 0 and out["failures"] == []

    out = invoke(runner, "--db", db, "stats")
    assert out["actions"]["total_sentences"] > 0

    dataset = tmp_path / "task1.jsonl"
    out = invoke(runner, "--db", db, "taskgen", "--task", "1", "--out", str(dataset))
    assert out["examples"] > 0

    out = invoke(
        runner,
        "eval",
        "--dataset",
        str(dataset),
        "--baseline",
        "random",
        "--resamples",
        "10",
        "--seed",
        "2",
    )
    assert out["predictor"] == "random"
    assert "update" in out["subtasks"]

    exported = tmp_path / "refactors.csv"
    out = invoke(runner, "--db", db, "export", "refactors", str(exported))
    assert exported.exists()


def test_cli_calibrate_bundled_fixture(runner):
    out = invoke(runner, "calibrate")
    assert out["threshold"] == 0.5
    assert out["holdout_f1"] == 1.0


def test_cli_calibrate_custom_grid(runner):
    out = invoke(runner, "calibrate", "--grid", "0.5,0.9")
    assert out["threshold"] == 0.5


def test_cli_error_reporting(runner, tmp_path):
    result = runner.invoke(main, ["--db", str(tmp_path / "x.sqlite"), "diff", "--sim", "bogus"])
    assert result.exit_code != 0
    assert "bogus" in result.output


def test_cli_requires_db_for_store_commands(runner):
    result = runner.invoke(main, ["stats"])
    assert result.exit_code != 0
    assert "database" in result.output
