"""Pydantic request/response models for the service endpoints."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class SegmentRequest(BaseModel):
    text: str


class SegmentResponse(BaseModel):
    sentences: list[str]


class SimilarityRequest(BaseModel):
    x: str
    y: str
    sim: str = "unigram"


class SimilarityResponse(BaseModel):
    score: float
    sim: str


class PairDiffRequest(BaseModel):
    old_text: str
    new_text: str
    sim: str = "unigram"
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)


class EdgeModel(BaseModel):
    old_idx: int
    new_idx: int
    score: float
    provenance: str


class WordEditModel(BaseModel):
    kind: str
    old_start: int
    old_end: int
    new_start: int
    new_end: int
    old_tokens: list[str]
    new_tokens: list[str]


class SentenceWordEdits(BaseModel):
    old_idx: int
    new_idx: int
    edits: list[WordEditModel]


class RefactorModel(BaseModel):
    old_idx: int
    new_idx: int
    direction: str
    rank: int


class PairDiffResponse(BaseModel):
    old_sentences: list[str]
    new_sentences: list[str]
    tags_old: list[str]
    tags_new: list[str]
    edges: list[EdgeModel]
    word_edits: list[SentenceWordEdits]
    refactors: list[RefactorModel]


class IngestRequest(BaseModel):
    path: str
    db: str | None = None


class IngestResponse(BaseModel):
    accepted: int
    duplicates: int
    errors: list[tuple[int, str]]


class DiffCorpusRequest(BaseModel):
    db: str | None = None
    sim: str = "unigram"
    threshold: float = Field(default=0.5, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    lemma_map: str | None = None  # token<TAB>lemma file for exact lemma replication


class DiffCorpusResponse(BaseModel):
    pairs_processed: int
    pairs_written: int
    failures: list[tuple[str, str]]


class StatsRequest(BaseModel):
    db: str | None = None
    single_hit: bool = False


class StatsResponse(BaseModel):
    actions: dict
    version_dynamics: list[dict]
    position_distribution: dict[str, list[float]]
    update_times: dict
    special_additions: dict


class ExportRequest(BaseModel):
    table: str
    out: str
    db: str | None = None


class ExportResponse(BaseModel):
    table: str
    out: str
    rows: int


class FlagRequest(BaseModel):
    sentence: str
    single_hit: bool = False


class FlagResponse(BaseModel):
    correction: bool
    contributor: bool


class TaskGenRequest(BaseModel):
    task: int = Field(ge=1, le=3)
    out: str
    db: str | None = None
    min_sents: int = 5
    max_sents: int = 15
    max_version: int = 20
    sources: list[str] | None = None
    balance: bool = False
    seed: int = 0
    min_added: int = 1


class TaskGenResponse(BaseModel):
    task: int
    examples: int
    skipped: int
    out: str


class EvalRequest(BaseModel):
    dataset: str
    predictions: str | None = None
    baseline: str | None = None
    train: str | None = None
    seed: int = 0
    resamples: int = 1000


class CalibrateRequest(BaseModel):
    fixtures: str | None = None  # default: bundled annotation fixture
    sim: str = "unigram"
    grid: list[float] | None = None


class CalibrateResponse(BaseModel):
    threshold: float
    tuning_f1: float
    holdout_f1: float
    per_threshold: dict[str, float]


class SynthCorpusRequest(BaseModel):
    out: str
    articles: int = 50
    seed: int = 0


class SynthCorpusResponse(BaseModel):
    out: str
    articles: int
    versions: int
