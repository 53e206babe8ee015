from __future__ import annotations

import hashlib
import json

import pytest

from newsdiff.pipeline import DiffConfig, diff_corpus
from newsdiff.similarity import SimConfig
from newsdiff.store import DiffStore
from newsdiff.synth import generate_corpus_jsonl


def record(source="bbc", a_id="a1", version_id=0, **overrides):
    base = {
        "source": source,
        "a_id": a_id,
        "version_id": version_id,
        "title": "Title",
        "url": "https://example.org/a1",
        "text": "Alpha beta gamma.",
        "created": "2021-03-01T12:00:00Z",
        "archive_url": None,
    }
    base.update(overrides)
    return base


def write_jsonl(path, records):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write((r if isinstance(r, str) else json.dumps(r)) + "\n")
    return str(path)


def test_ingest_empty_file(tmp_path):
    path = write_jsonl(tmp_path / "in.jsonl", [])
    with DiffStore(tmp_path / "db.sqlite") as store:
        report = store.ingest_jsonl(path)
    assert report.accepted == 0 and not report.errors


def test_ingest_two_valid_records(tmp_path):
    path = write_jsonl(tmp_path / "in.jsonl", [record(), record(version_id=1)])
    with DiffStore(tmp_path / "db.sqlite") as store:
        report = store.ingest_jsonl(path)
        assert report.accepted == 2
        versions = store.versions_of("bbc", "a1")
    assert [v["VERSION_ID"] for v in versions] == [0, 1]
    assert all(v["NUM_VERSIONS"] == 2 for v in versions)


def test_ingest_reports_malformed_lines(tmp_path):
    bad = record()
    del bad["a_id"]
    path = write_jsonl(tmp_path / "in.jsonl", [bad, "not json", record()])
    with DiffStore(tmp_path / "db.sqlite") as store:
        report = store.ingest_jsonl(path)
    assert report.accepted == 1
    assert [line for line, _ in report.errors] == [1, 2]
    assert "a_id" in report.errors[0][1]


@pytest.mark.parametrize(
    "overrides",
    [
        {"version_id": -1},
        {"version_id": "0"},
        {"created": "yesterday"},
        {"text": None},
    ],
)
def test_ingest_validation_rules(tmp_path, overrides):
    path = write_jsonl(tmp_path / "in.jsonl", [record(**overrides)])
    with DiffStore(tmp_path / "db.sqlite") as store:
        report = store.ingest_jsonl(path)
    assert report.accepted == 0 and len(report.errors) == 1


def test_ingest_duplicate_is_last_write_wins(tmp_path):
    path = write_jsonl(
        tmp_path / "in.jsonl",
        [record(title="First"), record(title="Second")],
    )
    with DiffStore(tmp_path / "db.sqlite") as store:
        report = store.ingest_jsonl(path)
        row = store.get_version("bbc", "a1", 0)
    assert report.accepted == 2 and report.duplicates == 1
    assert row["TITLE"] == "Second"
    assert row["NUM_VERSIONS"] == 1


def _diffed_store(tmp_path, n_articles=8, seed=5):
    corpus = tmp_path / "corpus.jsonl"
    generate_corpus_jsonl(str(corpus), n_articles=n_articles, seed=seed)
    store = DiffStore(tmp_path / "db.sqlite")
    store.ingest_jsonl(str(corpus))
    diff_corpus(store, DiffConfig(sim=SimConfig.parse("unigram"), threshold=0.5))
    return store


def test_sentence_diff_row_count_invariant(tmp_path):
    store = _diffed_store(tmp_path)
    for pair_key in store.diffed_pairs():
        summary = store.pair_summary(pair_key)
        rows = store.sentence_rows(pair_key)
        n_old, n_new = summary["NUM_SENTS_OLD"], summary["NUM_SENTS_NEW"]
        assert len(rows) == max(n_old, n_new)
        for row in rows:
            idx = row["SENTENCE_ID"]
            assert bool(row["SENT_OLD"]) == (idx <= n_old)
            assert bool(row["TAG_OLD"]) == (idx <= n_old)
            assert bool(row["SENT_NEW"]) == (idx <= n_new)
            assert bool(row["TAG_NEW"]) == (idx <= n_new)
    store.close()


def test_rerunning_diff_is_byte_idempotent(tmp_path):
    store = _diffed_store(tmp_path)
    store.close()
    db_path = tmp_path / "db.sqlite"
    before = hashlib.sha256(db_path.read_bytes()).hexdigest()
    with DiffStore(db_path) as store:
        report = diff_corpus(store, DiffConfig(sim=SimConfig.parse("unigram"), threshold=0.5))
    assert report.pairs_written == 0
    assert hashlib.sha256(db_path.read_bytes()).hexdigest() == before


def test_export_csv_every_relation(tmp_path):
    store = _diffed_store(tmp_path)
    for table in ("articles", "sentence_diffs", "word_diffs", "refactors", "pair_summaries"):
        out = tmp_path / f"{table}.csv"
        rows = store.export_csv(table, out)
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == rows + 1  # header
    header = (tmp_path / "sentence_diffs.csv").read_text(encoding="utf-8").splitlines()[0]
    assert header == "SOURCE,A_ID,V_OLD_ID,V_NEW_ID,SENTENCE_ID,SENT_OLD,SENT_NEW,TAG_OLD,TAG_NEW"
    store.close()


def test_export_rejects_unknown_table(tmp_path):
    with DiffStore(tmp_path / "db.sqlite") as store:
        with pytest.raises(ValueError):
            store.export_csv("nope", tmp_path / "x.csv")
