"""Command-line interface: a thin client over the HTTP service.

Without ``--base-url`` the commands talk to an in-process instance of the
service app, so no server needs to run for local work; with it they target
a remote server (paths in requests are then server-local).
"""

from __future__ import annotations

import json
import sys

import click

from .service.app import create_app


class ServiceClient:
    def __init__(self, base_url: str | None, db: str | None):
        self.db = db
        if base_url:
            import httpx

            self._client = httpx.Client(base_url=base_url, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            self._client = TestClient(create_app(default_db=db))

    def post(self, path: str, payload: dict) -> dict:
        payload = {k: v for k, v in payload.items() if v is not None}
        response = self._client.post(path, json=payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except ValueError:
                detail = response.text
            raise click.ClickException(f"{path}: {detail}")
        return response.json()


def _echo(result: dict) -> None:
    click.echo(json.dumps(result, indent=2, sort_keys=True))


@click.group()
@click.option("--base-url", default=None, help="Remote service URL (default: in-process).")
@click.option("--db", default=None, help="Database file path.")
@click.pass_context
def main(ctx: click.Context, base_url: str | None, db: str | None) -> None:
    """Sentence-level diff engine for article revision histories."""
    ctx.obj = ServiceClient(base_url, db)


@main.command()
@click.argument("path")
@click.pass_obj
def ingest(client: ServiceClient, path: str) -> None:
    """Ingest article versions from a JSONL file."""
    _echo(client.post("/corpus/ingest", {"path": path, "db": client.db}))


@main.command()
@click.option("--sim", default="unigram", help="unigram | ngram:N | embed:PATH | hungarian | bleu:W")
@click.option("--threshold", "-t", default=0.5, type=float, help="Match threshold T.")
@click.option("--workers", default=1, type=int, help="Diff worker processes.")
@click.option("--lemma-map", default=None, help="Optional token<TAB>lemma file.")
@click.pass_obj
def diff(client: ServiceClient, sim: str, threshold: float, workers: int, lemma_map: str | None) -> None:
    """Diff every adjacent version pair in the store."""
    _echo(
        client.post(
            "/corpus/diff",
            {
                "db": client.db,
                "sim": sim,
                "threshold": threshold,
                "workers": workers,
                "lemma_map": lemma_map,
            },
        )
    )


@main.command()
@click.option("--single-hit", is_flag=True, help="Raw single-hit correction lexicon matching.")
@click.pass_obj
def stats(client: ServiceClient, single_hit: bool) -> None:
    """Corpus analytics: action summary, dynamics, positions, update times."""
    _echo(client.post("/corpus/stats", {"db": client.db, "single_hit": single_hit}))


@main.command()
@click.argument("table")
@click.argument("out")
@click.pass_obj
def export(client: ServiceClient, table: str, out: str) -> None:
    """Export one relation to CSV."""
    _echo(client.post("/corpus/export", {"db": client.db, "table": table, "out": out}))


@main.command()
@click.option("--task", type=click.IntRange(1, 3), required=True)
@click.option("--out", required=True, help="Output JSONL path.")
@click.option("--min-sents", default=5, type=int)
@click.option("--max-sents", default=15, type=int)
@click.option("--max-version", default=20, type=int)
@click.option("--sources", default=None, help="Comma-separated source allowlist.")
@click.option("--balance", is_flag=True, help="Class-balance task 1 labels.")
@click.option("--seed", "-s", default=0, type=int)
@click.option("--min-added", default=1, type=int, help="Additions needed for above/below labels.")
@click.pass_obj
def taskgen(
    client: ServiceClient,
    task: int,
    out: str,
    min_sents: int,
    max_sents: int,
    max_version: int,
    sources: str | None,
    balance: bool,
    seed: int,
    min_added: int,
) -> None:
    """Build a prediction-task dataset from the diff store."""
    _echo(
        client.post(
            "/tasks/generate",
            {
                "db": client.db,
                "task": task,
                "out": out,
                "min_sents": min_sents,
                "max_sents": max_sents,
                "max_version": max_version,
                "sources": sources.split(",") if sources else None,
                "balance": balance,
                "seed": seed,
                "min_added": min_added,
            },
        )
    )


@main.command(name="eval")
@click.option("--dataset", required=True, help="Task dataset JSONL.")
@click.option("--predictions", default=None, help="Predictions JSONL file.")
@click.option("--baseline", default=None, type=click.Choice(["most_popular", "random"]))
@click.option("--train", default=None, help="Training dataset for most_popular.")
@click.option("--seed", "-s", default=0, type=int)
@click.option("--resamples", default=1000, type=int, help="Bootstrap resample count.")
@click.pass_obj
def eval_cmd(
    client: ServiceClient,
    dataset: str,
    predictions: str | None,
    baseline: str | None,
    train: str | None,
    seed: int,
    resamples: int,
) -> None:
    """Evaluate predictions or a baseline with bootstrap F1."""
    _echo(
        client.post(
            "/eval",
            {
                "dataset": dataset,
                "predictions": predictions,
                "baseline": baseline,
                "train": train,
                "seed": seed,
                "resamples": resamples,
            },
        )
    )


@main.command()
@click.option("--fixtures", default=None, help="Annotation fixture JSONL (default: bundled).")
@click.option("--sim", default="unigram")
@click.option("--grid", default=None, help="Comma-separated threshold grid.")
@click.pass_obj
def calibrate(client: ServiceClient, fixtures: str | None, sim: str, grid: str | None) -> None:
    """Calibrate the match threshold against annotated version pairs."""
    _echo(
        client.post(
            "/calibrate",
            {
                "fixtures": fixtures,
                "sim": sim,
                "grid": [float(g) for g in grid.split(",")] if grid else None,
            },
        )
    )


@main.command()
@click.option("--out", required=True, help="Output JSONL path.")
@click.option("--articles", default=50, type=int)
@click.option("--seed", "-s", default=0, type=int)
@click.pass_obj
def synth(client: ServiceClient, out: str, articles: int, seed: int) -> None:
    """Generate a seeded synthetic corpus for demos and benchmarks."""
    _echo(client.post("/synth/corpus", {"out": out, "articles": articles, "seed": seed}))


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8120, type=int)
@click.pass_context
def serve(ctx: click.Context, host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(create_app(default_db=ctx.parent.params.get("db")), host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
