"""Bidirectional sentence matching, tag derivation and word-level diffs.

Matching runs the asymmetric similarity in both directions between two
version's sentence lists; each source sentence maps to its best-scoring
target iff that score is strictly above the threshold. The union of both
directional maps forms the bipartite match graph, which is what lets a
split or merge attach one sentence to several counterparts.

Tags follow the grammar ``"A" | "R" | "M" idx {idx} ("C"|"U")``, 1-based
ascending indices. The serializer always emits the C/U component; the
parser tolerates its absence.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .segment import TokenSeq, normalize_text, tokenize

SentenceSim = Callable[[TokenSeq, TokenSeq], float]

FWD = "fwd"
BWD = "bwd"
BOTH = "both"

ADDED = "A"
REMOVED = "R"
MATCHED = "M"
CHANGED = "C"
UNCHANGED = "U"

DEFAULT_THRESHOLD = 0.5
DEFAULT_GRID = tuple(round(0.05 * i, 2) for i in range(1, 20))


@dataclass
class DirectionalMap:
    """Best-match target per source index (or None), with the best score."""

    matched: dict[int, int | None]
    scores: dict[int, float]


@dataclass(frozen=True)
class MatchEdge:
    old_idx: int
    new_idx: int
    score: float
    provenance: str  # fwd | bwd | both


@dataclass(frozen=True)
class MatchGraph:
    edges: tuple[MatchEdge, ...]

    def pairs(self) -> list[tuple[int, int]]:
        return [(e.old_idx, e.new_idx) for e in self.edges]


@dataclass(frozen=True)
class SentenceTag:
    op: str  # M | A | R
    matched: tuple[int, ...] = ()
    changed: str | None = None  # C | U, only for M

    def serialize(self) -> str:
        if self.op != MATCHED:
            return self.op
        parts = [MATCHED, *map(str, self.matched)]
        parts.append(self.changed or CHANGED)
        return " ".join(parts)


def parse_tag(text: str) -> SentenceTag:
    """Parse a serialized tag; the trailing C/U may be absent."""
    parts = text.split()
    if not parts:
        raise ValueError("empty tag")
    op = parts[0]
    if op in (ADDED, REMOVED):
        if len(parts) != 1:
            raise ValueError(f"{op} tag carries no components: {text!r}")
        return SentenceTag(op=op)
    if op != MATCHED:
        raise ValueError(f"unknown tag operation {op!r}")
    changed: str | None = None
    index_parts = parts[1:]
    if index_parts and index_parts[-1] in (CHANGED, UNCHANGED):
        changed = index_parts[-1]
        index_parts = index_parts[:-1]
    if not index_parts:
        raise ValueError(f"M tag needs at least one index: {text!r}")
    indices = tuple(int(p) for p in index_parts)
    if any(i < 1 for i in indices) or list(indices) != sorted(indices):
        raise ValueError(f"M indices must be ascending and 1-based: {text!r}")
    return SentenceTag(op=MATCHED, matched=indices, changed=changed)


def _match_seqs(
    source: Sequence[TokenSeq],
    target: Sequence[TokenSeq],
    sim: SentenceSim,
    threshold: float,
) -> DirectionalMap:
    matched: dict[int, int | None] = {}
    scores: dict[int, float] = {}
    for i, src in enumerate(source, start=1):
        best_score = -math.inf
        best_j = None
        for j, tgt in enumerate(target, start=1):
            score = sim(src, tgt)
            if score > best_score:
                best_score = score
                best_j = j
        if best_j is None:
            best_score = 0.0
        matched[i] = best_j if best_score > threshold else None
        scores[i] = max(best_score, 0.0)
    return DirectionalMap(matched=matched, scores=scores)


def match_directional(
    source: Sequence[str],
    target: Sequence[str],
    sim: SentenceSim,
    threshold: float,
) -> DirectionalMap:
    """Map each source sentence to its best target sentence above threshold.

    Ties in the argmax break to the smallest target index; the match test
    is strict (score > threshold), so a threshold of 1.0 matches nothing.
    """
    return _match_seqs([tokenize(s) for s in source], [tokenize(s) for s in target], sim, threshold)


def build_match_graph(fwd: DirectionalMap, bwd: DirectionalMap) -> MatchGraph:
    """Union of the two directional maps over one version pair.

    fwd maps old index -> new index, bwd maps new index -> old index. An
    edge contributed by both directions keeps the larger score. Unioning is
    what produces the multi-index M tags for merges and splits.
    """
    edges: dict[tuple[int, int], tuple[float, str]] = {}
    for i, j in fwd.matched.items():
        if j is not None:
            edges[(i, j)] = (fwd.scores[i], FWD)
    for j, i in bwd.matched.items():
        if i is None:
            continue
        if (i, j) in edges:
            score, _ = edges[(i, j)]
            edges[(i, j)] = (max(score, bwd.scores[j]), BOTH)
        else:
            edges[(i, j)] = (bwd.scores[j], BWD)
    ordered = sorted(edges)
    return MatchGraph(
        edges=tuple(
            MatchEdge(i, j, edges[(i, j)][0], edges[(i, j)][1]) for i, j in ordered
        )
    )


def classify_change(s_old: str, s_new: str) -> str:
    """U iff the two sentences are identical after normalization."""
    return UNCHANGED if normalize_text(s_old) == normalize_text(s_new) else CHANGED


def _classify_counterparts(sentence: str, counterparts: Sequence[str]) -> str:
    if len(counterparts) == 1:
        return classify_change(sentence, counterparts[0])
    # A merge/split is changed unless the concatenation is identical.
    return classify_change(sentence, " ".join(counterparts))


def derive_tags(
    v_old: Sequence[str],
    v_new: Sequence[str],
    graph: MatchGraph,
) -> tuple[list[SentenceTag], list[SentenceTag]]:
    """Per-sentence tags for both sides of a version pair."""
    by_old: dict[int, list[int]] = {}
    by_new: dict[int, list[int]] = {}
    for edge in graph.edges:
        by_old.setdefault(edge.old_idx, []).append(edge.new_idx)
        by_new.setdefault(edge.new_idx, []).append(edge.old_idx)
    tags_old: list[SentenceTag] = []
    for i, sentence in enumerate(v_old, start=1):
        counterparts = sorted(by_old.get(i, ()))
        if not counterparts:
            tags_old.append(SentenceTag(op=REMOVED))
            continue
        changed = _classify_counterparts(sentence, [v_new[j - 1] for j in counterparts])
        tags_old.append(SentenceTag(op=MATCHED, matched=tuple(counterparts), changed=changed))
    tags_new: list[SentenceTag] = []
    for j, sentence in enumerate(v_new, start=1):
        counterparts = sorted(by_new.get(j, ()))
        if not counterparts:
            tags_new.append(SentenceTag(op=ADDED))
            continue
        changed = _classify_counterparts(sentence, [v_old[i - 1] for i in counterparts])
        tags_new.append(SentenceTag(op=MATCHED, matched=tuple(counterparts), changed=changed))
    return tags_old, tags_new


@dataclass(frozen=True)
class AtomicEdit:
    """One word-level edit; spans are 1-based inclusive token ranges.

    An insert has an empty old span (old_end == old_start - 1) and a delete
    an empty new span, positioned where the tokens would go.
    """

    kind: str  # insert | delete | replace
    old_start: int
    old_end: int
    new_start: int
    new_end: int
    old_tokens: tuple[str, ...]
    new_tokens: tuple[str, ...]


def word_diff(s_old: TokenSeq, s_new: TokenSeq) -> list[AtomicEdit]:
    """Atomic edits from an LCS alignment over raw tokens.

    Maximal runs of non-common tokens between common anchors become one
    insert/delete/replace each; applying the edits to the old tokens
    reconstructs the new tokens exactly.
    """
    old, new = s_old.tokens, s_new.tokens
    m, n = len(old), len(new)
    # lcs[i][j] = LCS length of old[i:], new[j:]
    lcs = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        row, nxt = lcs[i], lcs[i + 1]
        for j in range(n - 1, -1, -1):
            if old[i] == new[j]:
                row[j] = nxt[j + 1] + 1
            else:
                row[j] = nxt[j] if nxt[j] >= row[j + 1] else row[j + 1]
    edits: list[AtomicEdit] = []
    i = j = 0
    run_old_start = run_new_start = 0

    def flush(next_i: int, next_j: int) -> None:
        if next_i == run_old_start and next_j == run_new_start:
            return
        removed = old[run_old_start:next_i]
        added = new[run_new_start:next_j]
        kind = "replace" if removed and added else ("delete" if removed else "insert")
        edits.append(
            AtomicEdit(
                kind=kind,
                old_start=run_old_start + 1,
                old_end=next_i,
                new_start=run_new_start + 1,
                new_end=next_j,
                old_tokens=tuple(removed),
                new_tokens=tuple(added),
            )
        )

    while i < m and j < n:
        if old[i] == new[j]:
            flush(i, j)
            i += 1
            j += 1
            run_old_start, run_new_start = i, j
        elif lcs[i + 1][j] >= lcs[i][j + 1]:
            i += 1
        else:
            j += 1
    flush(m, n)
    return edits


def apply_edits(old_tokens: Sequence[str], edits: Sequence[AtomicEdit]) -> list[str]:
    """Reconstruct the new token sequence (round-trip check helper)."""
    out: list[str] = []
    cursor = 0
    for edit in edits:
        out.extend(old_tokens[cursor : edit.old_start - 1])
        out.extend(edit.new_tokens)
        cursor = edit.old_end
    out.extend(old_tokens[cursor:])
    return out


def match_f1(
    predicted: set[tuple], gold: set[tuple]
) -> tuple[float, float, float]:
    """Set precision/recall/F1; empty vs empty is perfect by convention."""
    if not predicted and not gold:
        return 1.0, 1.0, 1.0
    tp = len(predicted & gold)
    precision = tp / len(predicted) if predicted else 0.0
    recall = tp / len(gold) if gold else 0.0
    if precision + recall == 0.0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class AnnotatedPair:
    """One human-annotated version pair with gold match edges."""

    article_id: str
    old: tuple[str, ...]
    new: tuple[str, ...]
    gold: frozenset[tuple[int, int]]


def load_annotated_pairs(path: str) -> list[AnnotatedPair]:
    """Read annotation fixtures: one JSON record per line."""
    pairs: list[AnnotatedPair] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                pairs.append(
                    AnnotatedPair(
                        article_id=str(record["a_id"]),
                        old=tuple(record["old"]),
                        new=tuple(record["new"]),
                        gold=frozenset((int(i), int(j)) for i, j in record["gold"]),
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad fixture record: {exc}") from exc
    return pairs


def predicted_edges(
    pair: AnnotatedPair, sim: SentenceSim, threshold: float
) -> set[tuple[int, int]]:
    old_seqs = [tokenize(s) for s in pair.old]
    new_seqs = [tokenize(s) for s in pair.new]
    fwd = _match_seqs(old_seqs, new_seqs, sim, threshold)
    bwd = _match_seqs(new_seqs, old_seqs, sim, threshold)
    return set(build_match_graph(fwd, bwd).pairs())


def split_fixtures(
    pairs: Sequence[AnnotatedPair],
) -> tuple[list[AnnotatedPair], list[AnnotatedPair]]:
    """Deterministic 50/50 split by stable hash of the article id."""
    ranked = sorted(
        pairs, key=lambda p: (hashlib.sha1(p.article_id.encode("utf-8")).hexdigest(), p.article_id)
    )
    half = (len(ranked) + 1) // 2
    return ranked[:half], ranked[half:]


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationResult:
    threshold: float
    tuning_f1: float
    holdout_f1: float
    per_threshold: dict[float, float] = field(default_factory=dict)


def _edge_sets(
    pairs: Sequence[AnnotatedPair], sim: SentenceSim, threshold: float
) -> set[tuple]:
    edges: set[tuple] = set()
    for pair in pairs:
        for i, j in predicted_edges(pair, sim, threshold):
            edges.add((pair.article_id, i, j))
    return edges


def _gold_set(pairs: Sequence[AnnotatedPair]) -> set[tuple]:
    return {(pair.article_id, i, j) for pair in pairs for i, j in pair.gold}


def calibrate_threshold(
    fixtures: Sequence[AnnotatedPair],
    sim: SentenceSim,
    grid: Sequence[float] = DEFAULT_GRID,
) -> CalibrationResult:
    """Grid-search the match threshold on half the fixtures, report on the rest.

    The split is per-article so no version pair leaks between halves; ties
    on tuning F1 resolve to the smallest threshold.
    """
    if not fixtures:
        raise CalibrationError("no annotation fixtures")
    if not grid:
        raise CalibrationError("empty threshold grid")
    tuning, heldout = split_fixtures(fixtures)
    tuning_gold = _gold_set(tuning)
    if not tuning_gold:
        raise CalibrationError("tuning half has no gold edges")
    curve: dict[float, float] = {}
    best_t = None
    best_f1 = -1.0
    for t in sorted(grid):
        _, _, f1 = match_f1(_edge_sets(tuning, sim, t), tuning_gold)
        curve[t] = f1
        if f1 > best_f1:
            best_f1 = f1
            best_t = t
    _, _, holdout_f1 = match_f1(_edge_sets(heldout, sim, best_t), _gold_set(heldout))
    return CalibrationResult(
        threshold=best_t, tuning_f1=best_f1, holdout_f1=holdout_f1, per_threshold=curve
    )
