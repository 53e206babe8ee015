"""FastAPI application exposing the diff engine.

The service owns a default database path (constructor argument or the
NEWSDIFF_DB environment variable); requests may override it per call,
which keeps the CLI thin-client able to point at arbitrary local stores.
"""

from __future__ import annotations

import os
from importlib import resources

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..align import DEFAULT_GRID, calibrate_threshold, load_annotated_pairs
from ..pipeline import DiffConfig, diff_corpus, diff_pair
from ..segment import normalize_text, split_sentences, tokenize
from ..similarity import SimConfig, build_sentence_sim
from ..stats import (
    flag_special_sentences,
    position_distribution,
    special_additions,
    summarize_actions,
    update_time_stats,
    version_dynamics,
)
from ..store import DiffStore
from ..synth import generate_corpus_jsonl
from ..tasks import (
    build_task1,
    build_task2,
    build_task3,
    evaluate,
    filter_breaking,
    load_predictions,
    read_jsonl,
    write_jsonl,
)
from . import models


def bundled_fixture_path() -> str:
    return str(resources.files("newsdiff").joinpath("data/calibration_fixture.jsonl"))


def create_app(default_db: str | None = None) -> FastAPI:
    app = FastAPI(title="newsdiff", version=__version__)
    app.state.default_db = default_db or os.environ.get("NEWSDIFF_DB")

    def resolve_db(requested: str | None) -> str:
        db = requested or app.state.default_db
        if not db:
            raise HTTPException(status_code=400, detail="no database path configured")
        return db

    def guard(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ValueError, OSError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/segment", response_model=models.SegmentResponse)
    def segment(request: models.SegmentRequest) -> models.SegmentResponse:
        return models.SegmentResponse(sentences=split_sentences(normalize_text(request.text)))

    @app.post("/similarity", response_model=models.SimilarityResponse)
    def similarity(request: models.SimilarityRequest) -> models.SimilarityResponse:
        config = guard(SimConfig.parse, request.sim)
        sim = guard(build_sentence_sim, config)
        score = guard(sim, tokenize(request.x), tokenize(request.y))
        return models.SimilarityResponse(score=score, sim=config.label())

    @app.post("/diff/pair", response_model=models.PairDiffResponse)
    def diff_one_pair(request: models.PairDiffRequest) -> models.PairDiffResponse:
        config = guard(SimConfig.parse, request.sim)
        diff = guard(diff_pair, request.old_text, request.new_text, config, request.threshold)
        return models.PairDiffResponse(
            old_sentences=diff.old_sentences,
            new_sentences=diff.new_sentences,
            tags_old=[t.serialize() for t in diff.tags_old],
            tags_new=[t.serialize() for t in diff.tags_new],
            edges=[
                models.EdgeModel(
                    old_idx=e.old_idx, new_idx=e.new_idx, score=e.score, provenance=e.provenance
                )
                for e in diff.edges
            ],
            word_edits=[
                models.SentenceWordEdits(
                    old_idx=old_idx,
                    new_idx=new_idx,
                    edits=[
                        models.WordEditModel(
                            kind=e.kind,
                            old_start=e.old_start,
                            old_end=e.old_end,
                            new_start=e.new_start,
                            new_end=e.new_end,
                            old_tokens=list(e.old_tokens),
                            new_tokens=list(e.new_tokens),
                        )
                        for e in edits
                    ],
                )
                for old_idx, new_idx, edits in diff.word_edits
            ],
            refactors=[
                models.RefactorModel(
                    old_idx=r.old_idx, new_idx=r.new_idx, direction=r.direction, rank=r.rank
                )
                for r in diff.refactors
            ],
        )

    @app.post("/corpus/ingest", response_model=models.IngestResponse)
    def ingest(request: models.IngestRequest) -> models.IngestResponse:
        with DiffStore(resolve_db(request.db)) as store:
            report = guard(store.ingest_jsonl, request.path)
        return models.IngestResponse(
            accepted=report.accepted, duplicates=report.duplicates, errors=report.errors
        )

    @app.post("/corpus/diff", response_model=models.DiffCorpusResponse)
    def diff_whole_corpus(request: models.DiffCorpusRequest) -> models.DiffCorpusResponse:
        sim_config = guard(SimConfig.parse, request.sim, lemma_map_path=request.lemma_map)
        config = DiffConfig(sim=sim_config, threshold=request.threshold, workers=request.workers)
        with DiffStore(resolve_db(request.db)) as store:
            report = guard(diff_corpus, store, config)
        return models.DiffCorpusResponse(
            pairs_processed=report.pairs_processed,
            pairs_written=report.pairs_written,
            failures=report.failures,
        )

    @app.post("/corpus/stats", response_model=models.StatsResponse)
    def stats(request: models.StatsRequest) -> models.StatsResponse:
        with DiffStore(resolve_db(request.db)) as store:
            actions = summarize_actions(store)
            dynamics = version_dynamics(store)
            positions = position_distribution(store)
            updates = update_time_stats(store)
            special = special_additions(store, single_hit=request.single_hit)
        return models.StatsResponse(
            actions=actions.as_dict(),
            version_dynamics=dynamics,
            position_distribution=positions,
            update_times={"per_source": updates.per_source, "warnings": updates.warnings},
            special_additions=special,
        )

    @app.post("/corpus/export", response_model=models.ExportResponse)
    def export(request: models.ExportRequest) -> models.ExportResponse:
        with DiffStore(resolve_db(request.db)) as store:
            rows = guard(store.export_csv, request.table, request.out)
        return models.ExportResponse(table=request.table, out=request.out, rows=rows)

    @app.post("/flags", response_model=models.FlagResponse)
    def flags(request: models.FlagRequest) -> models.FlagResponse:
        result = flag_special_sentences(request.sentence, single_hit=request.single_hit)
        return models.FlagResponse(correction=result.correction, contributor=result.contributor)

    @app.post("/tasks/generate", response_model=models.TaskGenResponse)
    def taskgen(request: models.TaskGenRequest) -> models.TaskGenResponse:
        with DiffStore(resolve_db(request.db)) as store:
            filters = {
                "min_sents": request.min_sents,
                "max_sents": request.max_sents,
                "max_version": request.max_version,
            }
            if request.sources is not None:
                # explicit allowlist; the library default is the breaking-news outlets
                filters["sources"] = tuple(request.sources) or None
            keys = filter_breaking(store, **filters)
            skipped = 0
            if request.task == 1:
                rows = build_task1(store, keys, balance=request.balance, seed=request.seed)
            elif request.task == 2:
                report = build_task2(store, keys)
                rows, skipped = report.rows, report.skipped
            else:
                report = build_task3(store, keys, min_added=request.min_added)
                rows, skipped = report.rows, report.skipped
        count = guard(write_jsonl, rows, request.out)
        return models.TaskGenResponse(task=request.task, examples=count, skipped=skipped, out=request.out)

    @app.post("/eval")
    def eval_predictions(request: models.EvalRequest) -> dict:
        rows = guard(read_jsonl, request.dataset)
        if not rows:
            raise HTTPException(status_code=400, detail="empty dataset")
        task = rows[0].get("task")
        if task not in ("task1", "task2", "task3"):
            raise HTTPException(status_code=400, detail=f"dataset has unknown task {task!r}")
        predictions = None
        if request.predictions is not None:
            predictions = guard(load_predictions, request.predictions)
        train_rows = guard(read_jsonl, request.train) if request.train else None
        report = guard(
            evaluate,
            task,
            rows,
            predictions=predictions,
            baseline=request.baseline,
            train_rows=train_rows,
            n_resamples=request.resamples,
            seed=request.seed,
        )
        return report.as_dict()

    @app.post("/calibrate", response_model=models.CalibrateResponse)
    def calibrate(request: models.CalibrateRequest) -> models.CalibrateResponse:
        fixtures_path = request.fixtures or bundled_fixture_path()
        pairs = guard(load_annotated_pairs, fixtures_path)
        sim = guard(build_sentence_sim, guard(SimConfig.parse, request.sim))
        grid = tuple(request.grid) if request.grid else DEFAULT_GRID
        result = guard(calibrate_threshold, pairs, sim, grid)
        return models.CalibrateResponse(
            threshold=result.threshold,
            tuning_f1=result.tuning_f1,
            holdout_f1=result.holdout_f1,
            per_threshold={str(t): f for t, f in sorted(result.per_threshold.items())},
        )

    @app.post("/synth/corpus", response_model=models.SynthCorpusResponse)
    def synth_corpus(request: models.SynthCorpusRequest) -> models.SynthCorpusResponse:
        counts = guard(
            generate_corpus_jsonl, request.out, n_articles=request.articles, seed=request.seed
        )
        return models.SynthCorpusResponse(
            out=request.out, articles=counts["articles"], versions=counts["versions"]
        )

    return app
