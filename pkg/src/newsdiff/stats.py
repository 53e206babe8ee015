"""Corpus analytics over a diffed store.

Percentage base for the action summary is the total number of sentences
across all version snapshots that participate in at least one diffed pair,
each version counted once. The released data never states its denominator,
so this choice is documented here and in the README rather than hidden.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from datetime import datetime

from .align import parse_tag
from .store import DiffStore

CORRECTION_LEXICON = (
    "was corrected",
    "revised",
    "clarification",
    "earlier error",
    "version",
    "article",
)
CONTRIBUTOR_LEXICON = (
    "reporting by",
    "additional reporting",
    "contributed reporting",
    "editing by",
)


@dataclass(frozen=True)
class ActionStats:
    edits: int
    additions: int
    deletions: int
    refactors: int
    total_sentences: int

    def pct(self, count: int) -> float:
        return 100.0 * count / self.total_sentences if self.total_sentences else 0.0

    def as_dict(self) -> dict:
        return {
            "edits": self.edits,
            "additions": self.additions,
            "deletions": self.deletions,
            "refactors": self.refactors,
            "total_sentences": self.total_sentences,
            "edits_pct": self.pct(self.edits),
            "additions_pct": self.pct(self.additions),
            "deletions_pct": self.pct(self.deletions),
            "refactors_pct": self.pct(self.refactors),
        }


def summarize_actions(store: DiffStore) -> ActionStats:
    """Action totals from the cached per-pair summaries.

    Edits are old-side matched-changed sentences, additions new-side A
    tags, deletions old-side R tags, refactors removed edges.
    """
    row = store.conn.execute(
        "SELECT COALESCE(SUM(NUM_SENTENCES_EDITED),0) AS e, "
        "COALESCE(SUM(NUM_SENTENCES_ADDED),0) AS a, "
        "COALESCE(SUM(NUM_SENTENCES_REMOVED),0) AS d, "
        "COALESCE(SUM(NUM_REFACTORS),0) AS r FROM pair_summaries"
    ).fetchone()
    total = store.conn.execute(
        "SELECT COALESCE(SUM(NUM_SENTS),0) AS n FROM version_sentences"
    ).fetchone()["n"]
    return ActionStats(
        edits=row["e"],
        additions=row["a"],
        deletions=row["d"],
        refactors=row["r"],
        total_sentences=total,
    )


def version_dynamics(store: DiffStore) -> list[dict]:
    """Per old-version-index action fractions (additions over new length)."""
    per_version: dict[int, dict[str, int]] = {}
    for pair_key in store.diffed_pairs():
        k = pair_key[2]
        bucket = per_version.setdefault(
            k, {"edited": 0, "deleted": 0, "added": 0, "old_sents": 0, "new_sents": 0}
        )
        summary = store.pair_summary(pair_key)
        bucket["edited"] += summary["NUM_SENTENCES_EDITED"]
        bucket["deleted"] += summary["NUM_SENTENCES_REMOVED"]
        bucket["added"] += summary["NUM_SENTENCES_ADDED"]
        bucket["old_sents"] += summary["NUM_SENTS_OLD"]
        bucket["new_sents"] += summary["NUM_SENTS_NEW"]
    rows = []
    for k in sorted(per_version):
        bucket = per_version[k]
        old_n, new_n = bucket["old_sents"], bucket["new_sents"]
        rows.append(
            {
                "version": k,
                "pairs_old_sentences": old_n,
                "pairs_new_sentences": new_n,
                "edited_frac": bucket["edited"] / old_n if old_n else 0.0,
                "deleted_frac": bucket["deleted"] / old_n if old_n else 0.0,
                "added_frac": bucket["added"] / new_n if new_n else 0.0,
            }
        )
    return rows


def _decile(idx: int, length: int) -> int:
    return min(9, (10 * (idx - 1)) // length)


def position_distribution(store: DiffStore) -> dict[str, list[float]]:
    """Per-action distribution over sentence-position deciles (rows sum to 100)."""
    counts = {
        "edits": [0] * 10,
        "additions": [0] * 10,
        "deletions": [0] * 10,
        "refactors": [0] * 10,
    }
    for pair_key in store.diffed_pairs():
        summary = store.pair_summary(pair_key)
        n_old, n_new = summary["NUM_SENTS_OLD"], summary["NUM_SENTS_NEW"]
        for row in store.sentence_rows(pair_key):
            idx = row["SENTENCE_ID"]
            if row["TAG_OLD"]:
                tag = parse_tag(row["TAG_OLD"])
                if tag.op == "R":
                    counts["deletions"][_decile(idx, n_old)] += 1
                elif tag.op == "M" and tag.changed == "C":
                    counts["edits"][_decile(idx, n_old)] += 1
            if row["TAG_NEW"] and row["TAG_NEW"] == "A":
                counts["additions"][_decile(idx, n_new)] += 1
        for row in store.refactor_rows(pair_key):
            counts["refactors"][_decile(row["OLD_IDX"], n_old)] += 1
    out: dict[str, list[float]] = {}
    for action, deciles in counts.items():
        total = sum(deciles)
        if total:
            out[action] = [100.0 * c / total for c in deciles]
    return out


@dataclass
class UpdateTimeStats:
    per_source: dict[str, dict] = field(default_factory=dict)
    warnings: int = 0


def update_time_stats(store: DiffStore) -> UpdateTimeStats:
    """Per-source hours between adjacent versions (median and quartiles).

    Single-version articles are excluded; non-monotonic timestamps skip the
    offending gap and count as a warning.
    """
    gaps: dict[str, list[float]] = {}
    result = UpdateTimeStats()
    for source, a_id in store.iter_articles():
        versions = store.versions_of(source, a_id)
        if len(versions) < 2:
            continue
        for older, newer in zip(versions, versions[1:]):
            t0 = _parse_created(older["CREATED"])
            t1 = _parse_created(newer["CREATED"])
            hours = (t1 - t0).total_seconds() / 3600.0
            if hours < 0:
                result.warnings += 1
                continue
            gaps.setdefault(source, []).append(hours)
    for source, values in sorted(gaps.items()):
        med = statistics.median(values)
        if len(values) >= 2:
            q1, _, q3 = statistics.quantiles(values, n=4)
        else:
            q1 = q3 = med
        result.per_source[source] = {
            "pairs": len(values),
            "median_hours": med,
            "q1_hours": q1,
            "q3_hours": q3,
        }
    return result


def _parse_created(created: str) -> datetime:
    return datetime.fromisoformat(created.replace("Z", "+00:00"))


@dataclass(frozen=True)
class SpecialFlags:
    correction: bool
    contributor: bool


def flag_special_sentences(sentence: str, single_hit: bool = False) -> SpecialFlags:
    """Lexicon flags for correction notices and contributor lines.

    The correction lexicon carries high-noise entries ("version",
    "article"), so the default requires two distinct lexicon hits or the
    literal "CORRECTION" prefix; ``single_hit=True`` restores raw matching.
    """
    lowered = sentence.lower()
    hits = sum(1 for entry in CORRECTION_LEXICON if entry in lowered)
    needed = 1 if single_hit else 2
    correction = hits >= needed or sentence.lstrip().startswith("CORRECTION")
    contributor = any(entry in lowered for entry in CONTRIBUTOR_LEXICON)
    return SpecialFlags(correction=correction, contributor=contributor)


def special_additions(store: DiffStore, single_hit: bool = False) -> dict[str, int]:
    """Counts of correction/contributor sentences among added sentences."""
    corrections = contributors = 0
    rows = store.conn.execute(
        "SELECT SENT_NEW FROM sentence_diffs WHERE TAG_NEW = 'A'"
    ).fetchall()
    for row in rows:
        flags = flag_special_sentences(row["SENT_NEW"], single_hit=single_hit)
        corrections += flags.correction
        contributors += flags.contributor
    return {"added_sentences": len(rows), "corrections": corrections, "contributors": contributors}
