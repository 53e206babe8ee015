"""Word- and sentence-similarity functions used for sentence matching.

The workhorse is the asymmetric maximum-alignment score: the average over
words of sentence x of their best match in sentence y. It is deliberately
not symmetric, which is what lets merged/split sentences score high from
the short side. One-to-one (assignment) matching and sentence BLEU are
provided for comparison, plus ngram and embedding-table word similarities.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .segment import TokenSeq, lemma_key, ngrams


class SimilarityError(ValueError):
    pass


class EmptySourceError(SimilarityError):
    """The 1/|x| factor is undefined for an empty source sentence."""


class NgramLengthError(SimilarityError):
    """Source sentence is shorter than the ngram order."""


class EmbeddingError(ValueError):
    pass


def phi_lexical(key_x: str, key_y: str) -> float:
    """Exact-match word similarity on normalized keys."""
    return 1.0 if key_x == key_y else 0.0


def phi_embedding(x: np.ndarray, y: np.ndarray) -> float:
    """Dot product of unit vectors, clamped into [0, 1]."""
    if x.shape != y.shape:
        raise EmbeddingError(f"dimension mismatch: {x.shape} vs {y.shape}")
    return float(min(1.0, max(0.0, float(np.dot(x, y)))))


@dataclass(frozen=True)
class EmbeddingTable:
    """Token -> unit-normalized dense vector, fixed dimension."""

    dim: int
    vectors: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.vectors)

    def matrix_for(self, keys: tuple[str, ...]) -> np.ndarray:
        """Rows for each key; out-of-vocabulary keys become zero rows."""
        out = np.zeros((len(keys), self.dim))
        for i, key in enumerate(keys):
            vec = self.vectors.get(key)
            if vec is not None:
                out[i] = vec
        return out


def load_embeddings(path: str) -> EmbeddingTable:
    """Parse a text vector file: one ``token v1 v2 ... vd`` per line.

    Every vector is L2-normalized on load; inconsistent dimensions or
    unparseable values raise with the offending line number.
    """
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            if not values:
                raise EmbeddingError(f"{path}:{lineno}: no vector components")
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise EmbeddingError(
                    f"{path}:{lineno}: expected {dim} dims, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values])
            except ValueError as exc:
                raise EmbeddingError(f"{path}:{lineno}: {exc}") from exc
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise EmbeddingError(f"{path}:{lineno}: zero-norm vector")
            vectors[token] = vec / norm
    return EmbeddingTable(dim=dim if dim is not None else 0, vectors=vectors)


class LexicalWordSim:
    """Unigram exact-match word similarity on (approximately) lemmatized keys."""

    def __init__(self, lemma_map: dict[str, str] | None = None):
        self.lemma_map = lemma_map

    def match_keys(self, seq: TokenSeq) -> list[str]:
        return [lemma_key(k, self.lemma_map) for k in seq.keys]

    def score_matrix(self, x: TokenSeq, y: TokenSeq) -> np.ndarray:
        xs, ys = self.match_keys(x), self.match_keys(y)
        return np.array([[phi_lexical(a, b) for b in ys] for a in xs])

    def row_maxima(self, x: TokenSeq, y: TokenSeq) -> list[float]:
        yset = set(self.match_keys(y))
        return [1.0 if k in yset else 0.0 for k in self.match_keys(x)]


class EmbeddingWordSim:
    """Word similarity by dot product of stored unit vectors; OOV scores 0."""

    def __init__(self, table: EmbeddingTable):
        self.table = table

    def score_matrix(self, x: TokenSeq, y: TokenSeq) -> np.ndarray:
        xm = self.table.matrix_for(x.keys)
        ym = self.table.matrix_for(y.keys)
        return np.clip(xm @ ym.T, 0.0, 1.0)

    def row_maxima(self, x: TokenSeq, y: TokenSeq) -> list[float]:
        return self.score_matrix(x, y).max(axis=1).tolist()


WordSimFn = LexicalWordSim | EmbeddingWordSim


def sim_asym_max(x: TokenSeq, y: TokenSeq, phi: WordSimFn) -> float:
    """Average over words of x of their best match in y (many-to-many)."""
    if len(x) == 0:
        raise EmptySourceError("source sentence has no tokens")
    if len(y) == 0:
        return 0.0
    maxima = phi.row_maxima(x, y)
    return float(sum(maxima) / len(maxima))


def sim_asym_ngram(x: TokenSeq, y: TokenSeq, n: int) -> float:
    """Asymmetric alignment over exact ngram units.

    Each y-ngram may be consumed at most once; x-ngrams claim matches
    greedily left to right. Returns matched x-ngrams / total x-ngrams.
    """
    x_ngrams = ngrams(x, n)
    if not x_ngrams:
        raise NgramLengthError(f"source sentence shorter than ngram order {n}")
    available = Counter(ngrams(y, n))
    matched = 0
    for gram in x_ngrams:
        if available[gram] > 0:
            available[gram] -= 1
            matched += 1
    return matched / len(x_ngrams)


def sim_hungarian(x: TokenSeq, y: TokenSeq, phi: WordSimFn) -> float:
    """Maximum-weight one-to-one word assignment, normalized by |x|."""
    if len(x) == 0:
        raise EmptySourceError("source sentence has no tokens")
    if len(y) == 0:
        return 0.0
    matrix = phi.score_matrix(x, y)
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return float(matrix[rows, cols].sum() / len(x))


def sim_bleu(x: TokenSeq, y: TokenSeq, weights: list[float]) -> float:
    """Sentence BLEU of x against single reference y.

    Modified precisions of order >= 2 get add-one smoothing, otherwise
    short sentences would score 0 almost everywhere. Weight vector is
    indexed by ngram order: BLEU-2 is [0, 1], BLEU-1,2 is [0.5, 0.5].
    """
    if not weights:
        raise ValueError("weights must be non-empty")
    if not math.isclose(sum(weights), 1.0, abs_tol=1e-9):
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")
    if len(x) == 0:
        return 0.0
    log_sum = 0.0
    for order, weight in enumerate(weights, start=1):
        if weight == 0.0:
            continue
        hyp = Counter(ngrams(x, order))
        ref = Counter(ngrams(y, order))
        clipped = sum(min(count, ref[gram]) for gram, count in hyp.items())
        total = sum(hyp.values())
        if order >= 2:
            precision = (clipped + 1) / (total + 1)
        else:
            precision = clipped / total if total else 0.0
        if precision == 0.0:
            return 0.0
        log_sum += weight * math.log(precision)
    if len(x) >= len(y):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(y) / len(x))
    return float(brevity * math.exp(log_sum))


@dataclass(frozen=True)
class SimConfig:
    """Parsed form of the ``--sim`` option.

    Accepted specs: ``unigram``, ``ngram:N``, ``embed:PATH``, ``hungarian``,
    ``bleu:W`` where W lists the ngram orders weighted uniformly (``bleu:2``
    puts all weight on bigrams, ``bleu:1,2`` halves it between both).
    """

    method: str = "unigram"
    n: int = 2
    orders: tuple[int, ...] = ()
    embeddings_path: str | None = None
    lemma_map_path: str | None = None

    @classmethod
    def parse(cls, spec: str, lemma_map_path: str | None = None) -> "SimConfig":
        name, _, arg = spec.partition(":")
        name = name.strip().lower()
        if name == "unigram":
            return cls(method="unigram", lemma_map_path=lemma_map_path)
        if name == "hungarian":
            return cls(method="hungarian", lemma_map_path=lemma_map_path)
        if name == "ngram":
            n = int(arg) if arg else 2
            if n < 1:
                raise ValueError(f"ngram order must be >= 1, got {n}")
            return cls(method="ngram", n=n, lemma_map_path=lemma_map_path)
        if name == "embed":
            if not arg:
                raise ValueError("embed requires a vector file path: embed:PATH")
            return cls(method="embed", embeddings_path=arg, lemma_map_path=lemma_map_path)
        if name == "bleu":
            orders = tuple(int(p) for p in arg.split(",")) if arg else (1,)
            if any(o < 1 for o in orders):
                raise ValueError(f"BLEU orders must be >= 1, got {orders}")
            return cls(method="bleu", orders=orders, lemma_map_path=lemma_map_path)
        raise ValueError(f"unknown similarity method {spec!r}")

    def label(self) -> str:
        if self.method == "ngram":
            return f"ngram:{self.n}"
        if self.method == "embed":
            return f"embed:{self.embeddings_path}"
        if self.method == "bleu":
            return "bleu:" + ",".join(str(o) for o in self.orders)
        return self.method

    def bleu_weights(self) -> list[float]:
        top = max(self.orders)
        share = 1.0 / len(self.orders)
        return [share if order in self.orders else 0.0 for order in range(1, top + 1)]


def build_sentence_sim(config: SimConfig):
    """Return a sentence-similarity callable (TokenSeq, TokenSeq) -> float."""
    from .segment import load_lemma_map

    lemma_map = load_lemma_map(config.lemma_map_path) if config.lemma_map_path else None
    if config.method == "unigram":
        phi = LexicalWordSim(lemma_map)
        return lambda x, y: sim_asym_max(x, y, phi)
    if config.method == "hungarian":
        phi = LexicalWordSim(lemma_map)
        return lambda x, y: sim_hungarian(x, y, phi)
    if config.method == "ngram":
        n = config.n
        return lambda x, y: sim_asym_ngram(x, y, n)
    if config.method == "embed":
        phi = EmbeddingWordSim(load_embeddings(config.embeddings_path))
        return lambda x, y: sim_asym_max(x, y, phi)
    if config.method == "bleu":
        weights = config.bleu_weights()
        return lambda x, y: sim_bleu(x, y, weights)
    raise ValueError(f"unknown similarity method {config.method!r}")
