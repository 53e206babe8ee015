"""Text normalization, sentence segmentation, tokenization and ngrams.

Everything here is rule-based and deterministic: no models, no language
detection. All downstream similarity scores depend on these functions, so
any behavior change shifts corpus-level counts.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

# Closing punctuation that stays attached to the sentence it terminates.
_CLOSERS = "\"'”’»)\\]"
# Characters that may open the next sentence (straight/curly quotes, guillemets).
_OPENERS = "\"'“‘«("

# Fixed exception list: a terminal "." preceded by one of these never splits.
ABBREVIATIONS = frozenset({"Mr.", "Mrs.", "Dr.", "U.S.", "U.K.", "St.", "No.", "vs."})

# Terminal punctuation run (+ attached closers), whitespace, then the start of
# a plausible new sentence: an opener or an uppercase letter (Latin-1 range
# included so French text splits under the same rule).
_BOUNDARY = re.compile(
    "([.!?]+[" + _CLOSERS + "]*)(\\s+)(?=[" + _OPENERS + "]|[A-ZÀ-Þ])"
)

_PUNCT_STRIP = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~“”‘’«»–—…"

_LINE_WS = re.compile(r"[^\S\n]+")


def normalize_text(raw: str) -> str:
    """Canonicalize a raw document: NFC, LF newlines, collapsed spaces."""
    text = unicodedata.normalize("NFC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = "".join(
        ch for ch in text if ch == "\n" or ch == "\t" or unicodedata.category(ch) != "Cc"
    )
    text = text.replace("\t", " ")
    lines = [_LINE_WS.sub(" ", line).strip() for line in text.split("\n")]
    return "\n".join(lines)


def _is_abbreviation(line: str, dot_pos: int) -> bool:
    # Token of non-space characters ending right before the terminal dot.
    j = dot_pos
    while j > 0 and not line[j - 1].isspace():
        j -= 1
    return (line[j:dot_pos] + ".") in ABBREVIATIONS


def split_sentences(text: str) -> list[str]:
    """Split normalized text into sentences, 1-based indexing downstream.

    Splits only at [.!?] (+ closing quotes) followed by whitespace and an
    uppercase letter or opening quote, with the abbreviation exceptions.
    Newlines count as ordinary whitespace so that re-splitting the output
    joined by spaces is a fixed point.
    """
    sentences: list[str] = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        punct = m.group(1)
        if punct[0] == "." and _is_abbreviation(text, m.start(1)):
            continue
        piece = " ".join(text[start : m.end(1)].split())
        if piece:
            sentences.append(piece)
        start = m.end()
    tail = " ".join(text[start:].split())
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class TokenSeq:
    """Whitespace tokens of one sentence plus their normalized match keys.

    Tokens keep their punctuation; keys are lowercased with boundary
    punctuation stripped. Fields whose key would be empty (pure punctuation)
    are dropped from both lists, so ``len(tokens) == len(keys)`` and no key
    is empty.
    """

    tokens: tuple[str, ...]
    keys: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(sentence: str) -> TokenSeq:
    """Split a sentence on whitespace into a TokenSeq."""
    tokens: list[str] = []
    keys: list[str] = []
    for field in sentence.split():
        key = field.strip(_PUNCT_STRIP).lower()
        if key:
            tokens.append(field)
            keys.append(key)
    return TokenSeq(tuple(tokens), tuple(keys))


def lemma_key(token: str, lemma_map: dict[str, str] | None = None) -> str:
    """Light lemma approximation: lowercase, strip boundary punctuation and
    a trailing possessive. An external token->lemma map takes precedence."""
    key = token.strip(_PUNCT_STRIP).lower()
    if lemma_map is not None:
        mapped = lemma_map.get(key)
        if mapped is not None:
            return mapped
    for suffix in ("'s", "’s"):
        if key.endswith(suffix) and len(key) > len(suffix):
            return key[: -len(suffix)]
    return key


def load_lemma_map(path: str) -> dict[str, str]:
    """Read a lemma map file: one ``token<TAB>lemma`` per line, UTF-8."""
    lemma_map: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise ValueError(f"{path}:{lineno}: expected 'token<TAB>lemma', got {line!r}")
            lemma_map[parts[0].lower()] = parts[1].lower()
    return lemma_map


def ngrams(seq: TokenSeq, n: int) -> list[str]:
    """All contiguous n-length key windows, in order; empty if too short."""
    if n < 1:
        raise ValueError(f"ngram order must be >= 1, got {n}")
    keys = seq.keys
    return [" ".join(keys[i : i + n]) for i in range(len(keys) - n + 1)]
