"""Seeded synthetic corpora with known ground-truth edit operations.

Sentences are built from a deterministic pseudo-word vocabulary, so two
unrelated sentences share almost no tokens and similarity-based matching
is unambiguous unless a mutation deliberately makes it hard. Generated
texts round-trip exactly through the segmenter: every sentence starts with
a capitalized word and ends with a period.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from itertools import product

_CONSONANTS = "bdfgklmnprstvz"
_VOWELS = "aeiou"
_SYLLABLES = [c + v for c, v in product(_CONSONANTS, _VOWELS)]
VOCAB = tuple("".join(p) for p in product(_SYLLABLES, repeat=2))

DEFAULT_SOURCES = (
    "nytimes",
    "ap",
    "washingtonpost",
    "bbc",
    "independent",
    "guardian",
    "reuters",
    "cnn",
    "fox",
)

# Fraction of tokens rewritten by a normal edit keeps the pair comfortably
# above a 0.5 match threshold; heavy edits intentionally fall below it.
NORMAL_EDIT_RANGE = (0.20, 0.45)
HEAVY_EDIT_RANGE = (0.55, 0.70)
HEAVY_EDIT_PROB = 0.08


def make_sentence(rng: random.Random, n_words: int | None = None) -> str:
    """One synthetic sentence: capitalized first word, terminal period."""
    n = n_words if n_words is not None else rng.randint(8, 14)
    words = [rng.choice(VOCAB) for _ in range(n)]
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def make_document(rng: random.Random, n_sentences: int | None = None) -> list[str]:
    n = n_sentences if n_sentences is not None else rng.randint(8, 16)
    return [make_sentence(rng) for _ in range(n)]


@dataclass
class MutatedPair:
    """A version pair plus the ground-truth operations that produced it."""

    old: list[str]
    new: list[str]
    deleted_old: set[int] = field(default_factory=set)
    edited_old: set[int] = field(default_factory=set)
    added_new: set[int] = field(default_factory=set)
    moved_old: set[int] = field(default_factory=set)
    heavy_edited_old: set[int] = field(default_factory=set)


def _edit_sentence(rng: random.Random, sentence: str, fraction: float) -> str:
    words = sentence[:-1].split()
    n_replace = max(1, int(round(fraction * len(words))))
    positions = rng.sample(range(len(words)), min(n_replace, len(words)))
    for pos in positions:
        replacement = rng.choice(VOCAB)
        words[pos] = replacement.capitalize() if pos == 0 else replacement
    return " ".join(words) + "."


def mutate_document(
    rng: random.Random,
    sentences: list[str],
    max_edits: int = 3,
    max_deletes: int = 2,
    max_adds: int = 2,
    move_prob: float = 0.3,
    heavy_edit_prob: float = HEAVY_EDIT_PROB,
) -> MutatedPair:
    """Apply random delete/edit/add/move operations, tracking ground truth."""
    n = len(sentences)
    pair = MutatedPair(old=list(sentences), new=[])
    indices = list(range(1, n + 1))

    deletable = indices[:]
    rng.shuffle(deletable)
    n_del = min(rng.randint(0, max_deletes), max(0, n - 3))
    pair.deleted_old = set(deletable[:n_del])

    editable = [i for i in indices if i not in pair.deleted_old]
    rng.shuffle(editable)
    n_edit = min(rng.randint(0, max_edits), len(editable))
    pair.edited_old = set(editable[:n_edit])

    survivors: list[tuple[int, str]] = []
    for i in indices:
        if i in pair.deleted_old:
            continue
        text = sentences[i - 1]
        if i in pair.edited_old:
            if rng.random() < heavy_edit_prob:
                fraction = rng.uniform(*HEAVY_EDIT_RANGE)
                pair.heavy_edited_old.add(i)
            else:
                fraction = rng.uniform(*NORMAL_EDIT_RANGE)
            text = _edit_sentence(rng, text, fraction)
        survivors.append((i, text))

    if survivors and rng.random() < move_prob:
        src = rng.randrange(len(survivors))
        moved = survivors.pop(src)
        dst = rng.randrange(len(survivors) + 1)
        while len(survivors) > 1 and dst == src:
            dst = rng.randrange(len(survivors) + 1)
        survivors.insert(dst, moved)
        if dst != src:
            pair.moved_old.add(moved[0])

    new_sentences = [text for _, text in survivors]
    n_add = rng.randint(0, max_adds)
    for _ in range(n_add):
        pos = rng.randint(0, len(new_sentences))
        new_sentences.insert(pos, make_sentence(rng))
    # Recover which new indices hold the injected sentences.
    survivor_texts = [text for _, text in survivors]
    cursor = 0
    added: set[int] = set()
    for j, text in enumerate(new_sentences, start=1):
        if cursor < len(survivor_texts) and text is survivor_texts[cursor]:
            cursor += 1
        else:
            added.add(j)
    pair.added_new = added
    pair.new = new_sentences
    return pair


def generate_pair(rng: random.Random, **kwargs) -> MutatedPair:
    return mutate_document(rng, make_document(rng), **kwargs)


def generate_corpus_jsonl(
    path: str,
    n_articles: int = 50,
    seed: int = 0,
    sources: tuple[str, ...] = DEFAULT_SOURCES,
    min_versions: int = 1,
    max_versions: int = 4,
    min_sentences: int = 8,
    max_sentences: int = 16,
) -> dict[str, int]:
    """Write a synthetic article corpus as ingestion-ready JSONL."""
    rng = random.Random(seed)
    base_time = datetime(2021, 3, 1, 6, 0, 0, tzinfo=timezone.utc)
    n_versions_total = 0
    with open(path, "w", encoding="utf-8") as handle:
        for a in range(n_articles):
            source = sources[a % len(sources)]
            a_id = f"{source}-{seed}-{a:04d}"
            n_versions = rng.randint(min_versions, max_versions)
            sentences = make_document(rng, rng.randint(min_sentences, max_sentences))
            created = base_time + timedelta(hours=rng.uniform(0, 24 * 30))
            for v in range(n_versions):
                record = {
                    "source": source,
                    "a_id": a_id,
                    "version_id": v,
                    "title": f"Synthetic article {a_id}",
                    "url": f"https://example.org/{source}/{a_id}",
                    "text": " ".join(sentences),
                    "created": created.isoformat().replace("+00:00", "Z"),
                    "archive_url": None,
                }
                handle.write(json.dumps(record) + "\n")
                n_versions_total += 1
                if v + 1 < n_versions:
                    sentences = mutate_document(rng, sentences).new
                    created = created + timedelta(hours=rng.uniform(0.2, 48.0))
    return {"articles": n_articles, "versions": n_versions_total}
