from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from newsdiff.align import (
    AnnotatedPair,
    CalibrationError,
    MatchGraph,
    SentenceTag,
    apply_edits,
    build_match_graph,
    calibrate_threshold,
    classify_change,
    derive_tags,
    load_annotated_pairs,
    match_directional,
    match_f1,
    parse_tag,
    predicted_edges,
    split_fixtures,
    word_diff,
)
from newsdiff.pipeline import diff_pair
from newsdiff.segment import tokenize
from newsdiff.similarity import SimConfig, build_sentence_sim
from newsdiff.synth import generate_pair

UNIGRAM = build_sentence_sim(SimConfig.parse("unigram"))


def test_match_directional_basic():
    result = match_directional(["A b.", "C d."], ["A b.", "E f."], UNIGRAM, 0.5)
    assert result.matched == {1: 1, 2: None}
    assert result.scores[1] == 1.0


def test_match_directional_identity_below_one():
    doc = ["Alpha beta gamma.", "Delta epsilon zeta."]
    result = match_directional(doc, doc, UNIGRAM, 0.99)
    assert result.matched == {1: 1, 2: 2}


def test_match_threshold_is_strict():
    doc = ["Alpha beta gamma."]
    result = match_directional(doc, doc, UNIGRAM, 1.0)
    assert result.matched == {1: None}


def test_match_empty_source():
    assert match_directional([], ["A b."], UNIGRAM, 0.5).matched == {}


def test_argmax_tie_breaks_to_smallest_index():
    result = match_directional(["a b."], ["a b c.", "a b d."], UNIGRAM, 0.5)
    assert result.matched == {1: 1}


def test_build_match_graph_union_and_provenance():
    fwd = match_directional(["a b.", "a c."], ["a b c."], UNIGRAM, 0.5)
    bwd = match_directional(["a b c."], ["a b.", "a c."], UNIGRAM, 0.5)
    graph = build_match_graph(fwd, bwd)
    pairs = {(e.old_idx, e.new_idx): e.provenance for e in graph.edges}
    assert (1, 1) in pairs and (2, 1) in pairs  # merge: two edges share new index


def test_build_match_graph_empty():
    fwd = match_directional(["a b."], ["x y."], UNIGRAM, 0.5)
    bwd = match_directional(["x y."], ["a b."], UNIGRAM, 0.5)
    assert build_match_graph(fwd, bwd).edges == ()


def test_classify_change():
    assert classify_change("Same text.", "Same text.") == "U"
    assert classify_change("He said x.", "He said y.") == "C"
    assert classify_change("Spaced   text.", "Spaced text.") == "U"


def test_tag_serialization_grammar():
    assert SentenceTag("A").serialize() == "A"
    assert SentenceTag("R").serialize() == "R"
    assert SentenceTag("M", (1, 2), "C").serialize() == "M 1 2 C"
    assert SentenceTag("M", (3,), "U").serialize() == "M 3 U"


def test_parse_tag_accepts_missing_change_component():
    tag = parse_tag("M 1")
    assert tag.op == "M" and tag.matched == (1,) and tag.changed is None
    assert parse_tag("M 1 2 C").matched == (1, 2)
    assert parse_tag("A") == SentenceTag("A")


@pytest.mark.parametrize("bad", ["", "X", "M", "M C", "M 2 1 C", "M 0 C", "A 1", "R 2"])
def test_parse_tag_rejects_bad_grammar(bad):
    with pytest.raises(ValueError):
        parse_tag(bad)


def _tags(old, new, threshold=0.5):
    diff = diff_pair(" ".join(old), " ".join(new), SimConfig.parse("unigram"), threshold)
    return (
        [t.serialize() for t in diff.tags_old],
        [t.serialize() for t in diff.tags_new],
    )


def test_derive_tags_identity():
    old = ["Alpha beta gamma."]
    tags_old, tags_new = _tags(old, old)
    assert tags_old == ["M 1 U"] and tags_new == ["M 1 U"]


def test_derive_tags_addition_and_deletion():
    old = ["Alpha beta gamma delta.", "Epsilon zeta eta theta."]
    new = ["Alpha beta gamma delta.", "Iota kappa lam mu."]
    tags_old, tags_new = _tags(old, new)
    assert tags_old == ["M 1 U", "R"]
    assert tags_new == ["M 1 U", "A"]


def test_derive_tags_split():
    old = ["Alpha beta gamma delta epsilon zeta."]
    new = ["Alpha beta gamma.", "Delta epsilon zeta."]
    tags_old, tags_new = _tags(old, new)
    assert tags_old == ["M 1 2 C"]
    assert tags_new == ["M 1 C", "M 1 C"]


def test_word_diff_traces():
    assert word_diff(tokenize("a b c"), tokenize("a b c")) == []
    edits = word_diff(tokenize("a b c"), tokenize("a d c"))
    assert len(edits) == 1
    edit = edits[0]
    assert edit.kind == "replace"
    assert (edit.old_start, edit.old_end, edit.new_start, edit.new_end) == (2, 2, 2, 2)
    assert edit.old_tokens == ("b",) and edit.new_tokens == ("d",)


def test_word_diff_insert_delete_kinds():
    inserts = word_diff(tokenize("a c"), tokenize("a b c"))
    assert [e.kind for e in inserts] == ["insert"]
    deletes = word_diff(tokenize("a b c"), tokenize("a c"))
    assert [e.kind for e in deletes] == ["delete"]


token_lists = st.lists(st.sampled_from("abcdef"), max_size=10)


@given(token_lists, token_lists)
def test_word_diff_round_trip(old_words, new_words):
    old = tokenize(" ".join(old_words))
    new = tokenize(" ".join(new_words))
    edits = word_diff(old, new)
    assert apply_edits(old.tokens, edits) == list(new.tokens)
    if list(old.tokens) == list(new.tokens):
        assert edits == []
    else:
        assert edits


def test_match_f1_cases():
    assert match_f1({("p", 1, 1)}, {("p", 1, 1)}) == (1.0, 1.0, 1.0)
    p, r, f1 = match_f1({("p", 1, 1)}, {("p", 1, 1), ("p", 2, 2)})
    assert (p, r) == (1.0, 0.5) and f1 == pytest.approx(2 / 3)
    assert match_f1(set(), {("p", 1, 1)}) == (0.0, 0.0, 0.0)
    assert match_f1(set(), set()) == (1.0, 1.0, 1.0)


def _word_pair(article_id, shared, old_only, new_only):
    old = " ".join(shared + old_only).capitalize() + "."
    new = " ".join(shared + new_only).capitalize() + "."
    return AnnotatedPair(article_id, (old,), (new,), frozenset({(1, 1)}))


def test_calibrate_prefers_threshold_matching_gold():
    # similarity 0.75 at (1,1): predicted at T=0.5 but not at T=0.9
    fixtures = [
        _word_pair(f"art-{i}", [f"s{i}{k}" for k in range(6)], [f"o{i}", f"o{i}x"], [f"n{i}", f"n{i}x"])
        for i in range(8)
    ]
    result = calibrate_threshold(fixtures, UNIGRAM, [0.5, 0.9])
    assert result.threshold == 0.5
    assert result.holdout_f1 == 1.0
    assert result.per_threshold[0.9] < 1.0


def test_calibrate_single_value_grid():
    fixtures = [_word_pair("a", ["x", "y"], [], [])]
    result = calibrate_threshold(fixtures, UNIGRAM, [0.3])
    assert result.threshold == 0.3


def test_calibrate_errors_without_gold_edges():
    empty = AnnotatedPair("a", ("Alpha beta.",), ("Gamma delta.",), frozenset())
    with pytest.raises(CalibrationError):
        calibrate_threshold([empty, empty], UNIGRAM, [0.5])


def test_split_fixtures_is_deterministic_and_even():
    fixtures = [_word_pair(f"id-{i}", [f"w{i}"], [], []) for i in range(10)]
    tune_a, held_a = split_fixtures(fixtures)
    tune_b, held_b = split_fixtures(list(reversed(fixtures)))
    assert [p.article_id for p in tune_a] == [p.article_id for p in tune_b]
    assert len(tune_a) == len(held_a) == 5
    assert not {p.article_id for p in tune_a} & {p.article_id for p in held_a}


def test_load_annotated_pairs_round_trip(tmp_path):
    path = tmp_path / "fixture.jsonl"
    path.write_text(
        '{"a_id": "x", "old": ["Alpha beta."], "new": ["Alpha beta."], "gold": [[1, 1]]}\n',
        encoding="utf-8",
    )
    pairs = load_annotated_pairs(str(path))
    assert pairs[0].gold == frozenset({(1, 1)})
    assert predicted_edges(pairs[0], UNIGRAM, 0.5) == {(1, 1)}


def test_load_annotated_pairs_rejects_bad_record(tmp_path):
    path = tmp_path / "fixture.jsonl"
    path.write_text('{"a_id": "x", "old": []}\n', encoding="utf-8")
    with pytest.raises(ValueError, match=":1"):
        load_annotated_pairs(str(path))


# -- structural invariants over random mutated documents ----------------------


def test_tag_partition_and_mutual_consistency(rng: random.Random):
    for _ in range(60):
        pair = generate_pair(rng)
        diff = diff_pair(" ".join(pair.old), " ".join(pair.new), SimConfig.parse("unigram"), 0.5)
        assert len(diff.tags_old) == len(diff.old_sentences)
        assert len(diff.tags_new) == len(diff.new_sentences)
        assert all(t.op in ("M", "R") for t in diff.tags_old)
        assert all(t.op in ("M", "A") for t in diff.tags_new)
        for i, tag in enumerate(diff.tags_old, start=1):
            for j in tag.matched:
                assert i in diff.tags_new[j - 1].matched
        for j, tag in enumerate(diff.tags_new, start=1):
            for i in tag.matched:
                assert j in diff.tags_old[i - 1].matched


def test_threshold_extremes(rng: random.Random):
    pair = generate_pair(rng)
    diff = diff_pair(" ".join(pair.old), " ".join(pair.new), SimConfig.parse("unigram"), 1.0)
    assert all(t.op == "R" for t in diff.tags_old)
    assert all(t.op == "A" for t in diff.tags_new)


def test_threshold_zero_matches_any_positive_score():
    # every sentence shares the token "shared": no sentence stays unmatched at T=0
    old = "Shared alpha beta. Shared gamma delta."
    new = "Shared epsilon zeta. Shared eta theta."
    diff = diff_pair(old, new, SimConfig.parse("unigram"), 0.0)
    assert all(t.op == "M" for t in diff.tags_old)
    assert all(t.op == "M" for t in diff.tags_new)


def test_self_diff_all_matched_unchanged(rng: random.Random):
    pair = generate_pair(rng)
    text = " ".join(pair.old)
    diff = diff_pair(text, text, SimConfig.parse("unigram"), 0.5)
    n = len(diff.old_sentences)
    assert [t.serialize() for t in diff.tags_old] == [f"M {i} U" for i in range(1, n + 1)]
    assert [t.serialize() for t in diff.tags_new] == [f"M {i} U" for i in range(1, n + 1)]
    assert diff.refactors == []


def test_graph_pairs_sorted():
    fwd = match_directional(["a b.", "c d."], ["c d.", "a b."], UNIGRAM, 0.5)
    bwd = match_directional(["c d.", "a b."], ["a b.", "c d."], UNIGRAM, 0.5)
    graph = build_match_graph(fwd, bwd)
    assert isinstance(graph, MatchGraph)
    assert graph.pairs() == sorted(graph.pairs())
