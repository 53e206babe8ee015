"""Per-pair diff computation and corpus-scale orchestration.

``diff_pair`` is pure: two raw texts in, tags/edges/word edits/refactors
out. ``diff_corpus`` walks every adjacent version pair of every article,
optionally fanning pair computation out to a process pool; all store
writes stay in the calling process behind compare-before-write.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .align import (
    CHANGED,
    MATCHED,
    AtomicEdit,
    MatchEdge,
    SentenceTag,
    _match_seqs,
    build_match_graph,
    derive_tags,
    word_diff,
)
from .refactor import RemovedEdge, identify_refactors
from .segment import normalize_text, split_sentences, tokenize
from .similarity import SimConfig, build_sentence_sim
from .store import DiffStore

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiffConfig:
    sim: SimConfig = SimConfig()
    threshold: float = 0.5
    workers: int = 1


@dataclass
class PairDiff:
    old_sentences: list[str]
    new_sentences: list[str]
    tags_old: list[SentenceTag]
    tags_new: list[SentenceTag]
    edges: list[MatchEdge]
    word_edits: list[tuple[int, int, list[AtomicEdit]]]
    refactors: list[RemovedEdge]


def diff_pair(old_text: str, new_text: str, sim_config: SimConfig, threshold: float) -> PairDiff:
    """Run the full extraction pipeline on one version pair."""
    sim = _sentence_sim(sim_config)
    old_sentences = split_sentences(normalize_text(old_text))
    new_sentences = split_sentences(normalize_text(new_text))
    old_seqs = [tokenize(s) for s in old_sentences]
    new_seqs = [tokenize(s) for s in new_sentences]
    fwd = _match_seqs(old_seqs, new_seqs, sim, threshold)
    bwd = _match_seqs(new_seqs, old_seqs, sim, threshold)
    graph = build_match_graph(fwd, bwd)
    tags_old, tags_new = derive_tags(old_sentences, new_sentences, graph)
    word_edits: list[tuple[int, int, list[AtomicEdit]]] = []
    for edge in graph.edges:
        old_seq = old_seqs[edge.old_idx - 1]
        new_seq = new_seqs[edge.new_idx - 1]
        edits = word_diff(old_seq, new_seq)
        if edits:
            word_edits.append((edge.old_idx, edge.new_idx, edits))
    refactors = identify_refactors(graph.pairs())
    return PairDiff(
        old_sentences=old_sentences,
        new_sentences=new_sentences,
        tags_old=tags_old,
        tags_new=tags_new,
        edges=list(graph.edges),
        word_edits=word_edits,
        refactors=refactors,
    )


_SIM_CACHE: dict[SimConfig, object] = {}


def _sentence_sim(config: SimConfig):
    sim = _SIM_CACHE.get(config)
    if sim is None:
        sim = build_sentence_sim(config)
        _SIM_CACHE[config] = sim
    return sim


@dataclass
class DiffReport:
    pairs_processed: int = 0
    pairs_written: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)


def rows_for_pair(pair_key: tuple[str, str, int, int], diff: PairDiff):
    """Flatten a PairDiff into store rows (sentence/word/refactor/summary)."""
    source, a_id, v_old, v_new = pair_key
    n_old, n_new = len(diff.old_sentences), len(diff.new_sentences)
    sentence_rows = []
    for idx in range(1, max(n_old, n_new) + 1):
        sent_old = diff.old_sentences[idx - 1] if idx <= n_old else ""
        sent_new = diff.new_sentences[idx - 1] if idx <= n_new else ""
        tag_old = diff.tags_old[idx - 1].serialize() if idx <= n_old else ""
        tag_new = diff.tags_new[idx - 1].serialize() if idx <= n_new else ""
        sentence_rows.append(
            (source, a_id, v_old, v_new, idx, sent_old, sent_new, tag_old, tag_new)
        )
    word_rows = []
    for old_idx, new_idx, edits in diff.word_edits:
        for edit_id, edit in enumerate(edits, start=1):
            word_rows.append(
                (
                    source, a_id, v_old, v_new,
                    old_idx, new_idx, edit_id, edit.kind,
                    edit.old_start, edit.old_end, edit.new_start, edit.new_end,
                    " ".join(edit.old_tokens), " ".join(edit.new_tokens),
                )
            )
    refactor_rows = [
        (source, a_id, v_old, v_new, r.old_idx, r.new_idx, r.direction, r.rank)
        for r in diff.refactors
    ]
    tags_old = diff.tags_old
    summary_row = (
        source, a_id, v_old, v_new, n_old, n_new,
        sum(1 for t in diff.tags_new if t.op == "A"),
        sum(1 for t in tags_old if t.op == "R"),
        sum(1 for t in tags_old if t.op == MATCHED and t.changed == CHANGED),
        sum(1 for t in tags_old if t.op == MATCHED and t.changed != CHANGED),
        len(diff.refactors),
    )
    version_rows = [
        (source, a_id, v_old, n_old),
        (source, a_id, v_new, n_new),
    ]
    return sentence_rows, word_rows, refactor_rows, summary_row, version_rows


def _pair_task(args):
    pair_key, old_text, new_text, sim_config, threshold = args
    diff = diff_pair(old_text, new_text, sim_config, threshold)
    return pair_key, rows_for_pair(pair_key, diff)


def adjacent_pairs(store: DiffStore):
    """All (pair_key, old_text, new_text) for consecutive stored versions."""
    out = []
    for source, a_id in store.iter_articles():
        versions = store.versions_of(source, a_id)
        for older, newer in zip(versions, versions[1:]):
            pair_key = (source, a_id, older["VERSION_ID"], newer["VERSION_ID"])
            out.append((pair_key, older["TEXT"], newer["TEXT"]))
    return out


def diff_corpus(store: DiffStore, config: DiffConfig) -> DiffReport:
    """Diff every adjacent version pair of every article in the store.

    Per-pair failures are isolated: they are logged and reported while the
    run continues. Re-running on an unchanged store writes nothing.
    """
    report = DiffReport()
    pairs = adjacent_pairs(store)
    tasks = [
        (pair_key, old_text, new_text, config.sim, config.threshold)
        for pair_key, old_text, new_text in pairs
    ]
    if config.workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = pool.map(_pair_task_safe, tasks, chunksize=chunk)
            for pair_key, rows, error in results:
                _record(store, report, pair_key, rows, error)
    else:
        for task in tasks:
            pair_key, rows, error = _pair_task_safe(task)
            _record(store, report, pair_key, rows, error)
    return report


def _pair_task_safe(args):
    pair_key = args[0]
    try:
        _, rows = _pair_task(args)
        return pair_key, rows, None
    except Exception as exc:  # noqa: BLE001 - per-pair isolation is the contract
        return pair_key, None, f"{type(exc).__name__}: {exc}"


def _record(store: DiffStore, report: DiffReport, pair_key, rows, error) -> None:
    if error is not None:
        logger.warning("diff failed for %s: %s", pair_key, error)
        report.failures.append((":".join(map(str, pair_key)), error))
        return
    report.pairs_processed += 1
    if store.replace_pair_rows(pair_key, *rows):
        report.pairs_written += 1
