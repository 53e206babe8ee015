from __future__ import annotations

import json

from newsdiff.pipeline import DiffConfig, diff_corpus, diff_pair
from newsdiff.similarity import SimConfig
from newsdiff.store import DiffStore

UNIGRAM = SimConfig.parse("unigram")


def article(a_id, texts, source="bbc"):
    return [
        {
            "source": source,
            "a_id": a_id,
            "version_id": v,
            "title": a_id,
            "url": f"https://example.org/{a_id}",
            "text": text,
            "created": f"2021-03-01T{10 + v:02d}:00:00Z",
            "archive_url": None,
        }
        for v, text in enumerate(texts)
    ]


def load(tmp_path, records):
    path = tmp_path / "in.jsonl"
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r) + "\n")
    store = DiffStore(tmp_path / "db.sqlite")
    store.ingest_jsonl(str(path))
    return store


DOC = "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lam mu."


def test_three_versions_make_two_pairs(tmp_path):
    store = load(tmp_path, article("a1", [DOC, DOC, DOC]))
    report = diff_corpus(store, DiffConfig(sim=UNIGRAM))
    assert report.pairs_processed == 2
    assert store.diffed_pairs() == [("bbc", "a1", 0, 1), ("bbc", "a1", 1, 2)]
    store.close()


def test_single_version_articles_make_no_pairs(tmp_path):
    store = load(tmp_path, article("a1", [DOC]) + article("a2", [DOC]))
    report = diff_corpus(store, DiffConfig(sim=UNIGRAM))
    assert report.pairs_processed == 0
    store.close()


def test_deleting_sentence_three_yields_r_at_row_three(tmp_path):
    old = "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lam mu. Nu xi omi pi."
    new = "Alpha beta gamma delta. Epsilon zeta eta theta. Nu xi omi pi."
    store = load(tmp_path, article("a1", [old, new]))
    diff_corpus(store, DiffConfig(sim=UNIGRAM))
    rows = store.sentence_rows(("bbc", "a1", 0, 1))
    tags_old = [r["TAG_OLD"] for r in rows]
    assert tags_old == ["M 1 U", "M 2 U", "R", "M 3 U"]
    assert [r["TAG_NEW"] for r in rows if r["TAG_NEW"]] == ["M 1 U", "M 2 U", "M 4 U"]
    store.close()


def test_word_diffs_written_only_for_changed_pairs(tmp_path):
    old = "Alpha beta gamma delta. Epsilon zeta eta theta."
    new = "Alpha beta XXX delta. Epsilon zeta eta theta."
    store = load(tmp_path, article("a1", [old, new]))
    diff_corpus(store, DiffConfig(sim=UNIGRAM))
    rows = store.conn.execute("SELECT * FROM word_diffs").fetchall()
    assert len(rows) == 1
    row = rows[0]
    assert (row["OLD_SENTENCE_ID"], row["NEW_SENTENCE_ID"], row["KIND"]) == (1, 1, "replace")
    assert row["OLD_TOKENS"] == "gamma" and row["NEW_TOKENS"] == "XXX"
    store.close()


def test_refactor_rows_record_direction_and_rank(tmp_path):
    old = "Alpha beta gamma delta. Epsilon zeta eta theta. Iota kappa lam mu."
    new = "Iota kappa lam mu. Alpha beta gamma delta. Epsilon zeta eta theta."
    store = load(tmp_path, article("a1", [old, new]))
    diff_corpus(store, DiffConfig(sim=UNIGRAM))
    rows = store.refactor_rows(("bbc", "a1", 0, 1))
    assert [(r["OLD_IDX"], r["NEW_IDX"], r["DIRECTION"], r["REMOVAL_RANK"]) for r in rows] == [
        (3, 1, "up", 1)
    ]
    store.close()


def test_pair_failures_are_isolated(tmp_path):
    # one-word sentences cannot produce trigrams: that pair fails, others run
    bad = "Alpha. Beta."
    store = load(tmp_path, article("a1", [bad, bad]) + article("a2", [DOC, DOC]))
    report = diff_corpus(store, DiffConfig(sim=SimConfig.parse("ngram:3")))
    assert report.pairs_processed == 1
    assert len(report.failures) == 1
    assert "a1" in report.failures[0][0]
    store.close()


def test_worker_pool_matches_serial_run(tmp_path):
    from newsdiff.synth import generate_corpus_jsonl

    corpus = tmp_path / "corpus.jsonl"
    generate_corpus_jsonl(str(corpus), n_articles=6, seed=9)
    serial_store = DiffStore(tmp_path / "serial.sqlite")
    serial_store.ingest_jsonl(str(corpus))
    diff_corpus(serial_store, DiffConfig(sim=UNIGRAM, workers=1))
    pooled_store = DiffStore(tmp_path / "pooled.sqlite")
    pooled_store.ingest_jsonl(str(corpus))
    diff_corpus(pooled_store, DiffConfig(sim=UNIGRAM, workers=3))
    for pair_key in serial_store.diffed_pairs():
        a = [tuple(r) for r in serial_store.sentence_rows(pair_key)]
        b = [tuple(r) for r in pooled_store.sentence_rows(pair_key)]
        assert a == b
    assert serial_store.diffed_pairs() == pooled_store.diffed_pairs()
    serial_store.close()
    pooled_store.close()


def test_diff_pair_counts_match_summary(tmp_path):
    old = "Alpha beta gamma delta. Epsilon zeta eta theta."
    new = "Alpha beta gamma delta. Epsilon zeta eta theta. Rho sig tau ups."
    store = load(tmp_path, article("a1", [old, new]))
    diff_corpus(store, DiffConfig(sim=UNIGRAM))
    summary = store.pair_summary(("bbc", "a1", 0, 1))
    assert summary["NUM_SENTS_OLD"] == 2 and summary["NUM_SENTS_NEW"] == 3
    assert summary["NUM_SENTENCES_ADDED"] == 1
    assert summary["NUM_SENTENCES_REMOVED"] == 0
    assert summary["NUM_SENTENCES_EDITED"] == 0
    assert summary["NUM_SENTENCES_UNCHANGED"] == 2
    assert summary["NUM_REFACTORS"] == 0
    store.close()


def test_diff_pair_pure_function_structure():
    diff = diff_pair("Alpha beta gamma.", "Alpha beta gamma.", UNIGRAM, 0.5)
    assert diff.old_sentences == diff.new_sentences == ["Alpha beta gamma."]
    assert [t.serialize() for t in diff.tags_old] == ["M 1 U"]
    assert diff.word_edits == [] and diff.refactors == []
    assert len(diff.edges) == 1 and diff.edges[0].provenance == "both"
