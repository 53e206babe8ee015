"""Embedded relational store for articles and extracted diffs.

Single SQLite file with the relations ``articles``, ``sentence_diffs``,
``word_diffs``, ``refactors`` plus cached per-pair summary counts and
per-version sentence counts. Column names of the articles and
sentence_diffs tables mirror the released-dataset layout bit-exactly.

Writes for a version pair are compare-before-write: re-diffing an
unchanged pair touches no bytes on disk, which is what makes a repeated
run byte-idempotent.
"""

from __future__ import annotations

import csv
import json
import sqlite3
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

TABLES = ("articles", "sentence_diffs", "word_diffs", "refactors", "pair_summaries", "version_sentences")

_SCHEMA = """
CREATE TABLE IF NOT EXISTS articles (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    VERSION_ID INTEGER NOT NULL,
    TITLE TEXT NOT NULL,
    URL TEXT NOT NULL,
    TEXT TEXT NOT NULL,
    CREATED TEXT NOT NULL,
    ARCHIVE_URL TEXT,
    NUM_VERSIONS INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (SOURCE, A_ID, VERSION_ID)
);
CREATE TABLE IF NOT EXISTS sentence_diffs (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    V_OLD_ID INTEGER NOT NULL,
    V_NEW_ID INTEGER NOT NULL,
    SENTENCE_ID INTEGER NOT NULL,
    SENT_OLD TEXT NOT NULL DEFAULT '',
    SENT_NEW TEXT NOT NULL DEFAULT '',
    TAG_OLD TEXT NOT NULL DEFAULT '',
    TAG_NEW TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (SOURCE, A_ID, V_OLD_ID, V_NEW_ID, SENTENCE_ID)
);
CREATE TABLE IF NOT EXISTS word_diffs (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    V_OLD_ID INTEGER NOT NULL,
    V_NEW_ID INTEGER NOT NULL,
    OLD_SENTENCE_ID INTEGER NOT NULL,
    NEW_SENTENCE_ID INTEGER NOT NULL,
    EDIT_ID INTEGER NOT NULL,
    KIND TEXT NOT NULL,
    OLD_START INTEGER NOT NULL,
    OLD_END INTEGER NOT NULL,
    NEW_START INTEGER NOT NULL,
    NEW_END INTEGER NOT NULL,
    OLD_TOKENS TEXT NOT NULL DEFAULT '',
    NEW_TOKENS TEXT NOT NULL DEFAULT '',
    PRIMARY KEY (SOURCE, A_ID, V_OLD_ID, V_NEW_ID, OLD_SENTENCE_ID, NEW_SENTENCE_ID, EDIT_ID)
);
CREATE TABLE IF NOT EXISTS refactors (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    V_OLD_ID INTEGER NOT NULL,
    V_NEW_ID INTEGER NOT NULL,
    OLD_IDX INTEGER NOT NULL,
    NEW_IDX INTEGER NOT NULL,
    DIRECTION TEXT NOT NULL,
    REMOVAL_RANK INTEGER NOT NULL,
    PRIMARY KEY (SOURCE, A_ID, V_OLD_ID, V_NEW_ID, OLD_IDX, NEW_IDX)
);
CREATE TABLE IF NOT EXISTS pair_summaries (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    V_OLD_ID INTEGER NOT NULL,
    V_NEW_ID INTEGER NOT NULL,
    NUM_SENTS_OLD INTEGER NOT NULL,
    NUM_SENTS_NEW INTEGER NOT NULL,
    NUM_SENTENCES_ADDED INTEGER NOT NULL,
    NUM_SENTENCES_REMOVED INTEGER NOT NULL,
    NUM_SENTENCES_EDITED INTEGER NOT NULL,
    NUM_SENTENCES_UNCHANGED INTEGER NOT NULL,
    NUM_REFACTORS INTEGER NOT NULL,
    PRIMARY KEY (SOURCE, A_ID, V_OLD_ID, V_NEW_ID)
);
CREATE TABLE IF NOT EXISTS version_sentences (
    SOURCE TEXT NOT NULL,
    A_ID TEXT NOT NULL,
    VERSION_ID INTEGER NOT NULL,
    NUM_SENTS INTEGER NOT NULL,
    PRIMARY KEY (SOURCE, A_ID, VERSION_ID)
);
"""

REQUIRED_FIELDS = ("source", "a_id", "version_id", "title", "url", "text", "created")


@dataclass
class IngestReport:
    accepted: int = 0
    duplicates: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)


def _validate_record(record: dict) -> dict:
    if not isinstance(record, dict):
        raise ValueError("record is not a JSON object")
    for name in REQUIRED_FIELDS:
        if name not in record or record[name] is None:
            raise ValueError(f"missing field {name!r}")
    version_id = record["version_id"]
    if not isinstance(version_id, int) or isinstance(version_id, bool) or version_id < 0:
        raise ValueError(f"version_id must be a non-negative integer, got {version_id!r}")
    created = str(record["created"])
    try:
        datetime.fromisoformat(created.replace("Z", "+00:00"))
    except ValueError as exc:
        raise ValueError(f"created is not an RFC 3339 timestamp: {exc}") from exc
    return {
        "source": str(record["source"]),
        "a_id": str(record["a_id"]),
        "version_id": version_id,
        "title": str(record["title"]),
        "url": str(record["url"]),
        "text": str(record["text"]),
        "created": created,
        "archive_url": record.get("archive_url"),
    }


class DiffStore:
    """SQLite-backed store; one instance per file, not thread-shared."""

    def __init__(self, path: str | Path):
        self.path = str(path)
        self.conn = sqlite3.connect(self.path)
        self.conn.row_factory = sqlite3.Row
        self.conn.executescript(_SCHEMA)
        self.conn.commit()

    def close(self) -> None:
        self.conn.close()

    def __enter__(self) -> "DiffStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- ingestion ---------------------------------------------------------

    def ingest_jsonl(self, path: str | Path) -> IngestReport:
        """Upsert article versions from newline-delimited JSON.

        Malformed lines are reported with their line number and skipped;
        duplicate (source, a_id, version_id) keys are last-write-wins and
        counted as warnings.
        """
        report = IngestReport()
        touched: set[tuple[str, str]] = set()
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                try:
                    record = _validate_record(json.loads(line))
                except (json.JSONDecodeError, ValueError) as exc:
                    report.errors.append((lineno, str(exc)))
                    continue
                key = (record["source"], record["a_id"], record["version_id"])
                existing = self.conn.execute(
                    "SELECT 1 FROM articles WHERE SOURCE=? AND A_ID=? AND VERSION_ID=?",
                    key,
                ).fetchone()
                if existing:
                    report.duplicates += 1
                self.conn.execute(
                    "INSERT OR REPLACE INTO articles "
                    "(SOURCE, A_ID, VERSION_ID, TITLE, URL, TEXT, CREATED, ARCHIVE_URL, NUM_VERSIONS) "
                    "VALUES (?, ?, ?, ?, ?, ?, ?, ?, 0)",
                    (
                        record["source"],
                        record["a_id"],
                        record["version_id"],
                        record["title"],
                        record["url"],
                        record["text"],
                        record["created"],
                        record["archive_url"],
                    ),
                )
                touched.add((record["source"], record["a_id"]))
                report.accepted += 1
        for source, a_id in touched:
            self.conn.execute(
                "UPDATE articles SET NUM_VERSIONS = "
                "(SELECT COUNT(*) FROM articles b WHERE b.SOURCE=? AND b.A_ID=?) "
                "WHERE SOURCE=? AND A_ID=?",
                (source, a_id, source, a_id),
            )
        self.conn.commit()
        return report

    # -- article queries ----------------------------------------------------

    def iter_articles(self) -> list[tuple[str, str]]:
        rows = self.conn.execute(
            "SELECT DISTINCT SOURCE, A_ID FROM articles ORDER BY SOURCE, A_ID"
        ).fetchall()
        return [(r["SOURCE"], r["A_ID"]) for r in rows]

    def versions_of(self, source: str, a_id: str) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT * FROM articles WHERE SOURCE=? AND A_ID=? ORDER BY VERSION_ID",
            (source, a_id),
        ).fetchall()

    def get_version(self, source: str, a_id: str, version_id: int) -> sqlite3.Row | None:
        return self.conn.execute(
            "SELECT * FROM articles WHERE SOURCE=? AND A_ID=? AND VERSION_ID=?",
            (source, a_id, version_id),
        ).fetchone()

    # -- diff persistence ----------------------------------------------------

    def replace_pair_rows(
        self,
        pair_key: tuple[str, str, int, int],
        sentence_rows: list[tuple],
        word_rows: list[tuple],
        refactor_rows: list[tuple],
        summary_row: tuple,
        version_rows: list[tuple],
    ) -> bool:
        """Write all relations for one version pair; skip if nothing changed.

        Returns True when bytes were written. Rows passed in must already
        include the pair key columns in table column order.
        """
        source, a_id, v_old, v_new = pair_key
        where = "SOURCE=? AND A_ID=? AND V_OLD_ID=? AND V_NEW_ID=?"
        current = (
            self._fetch_plain(f"SELECT * FROM sentence_diffs WHERE {where} ORDER BY SENTENCE_ID", pair_key),
            self._fetch_plain(
                f"SELECT * FROM word_diffs WHERE {where} ORDER BY OLD_SENTENCE_ID, NEW_SENTENCE_ID, EDIT_ID",
                pair_key,
            ),
            self._fetch_plain(f"SELECT * FROM refactors WHERE {where} ORDER BY REMOVAL_RANK", pair_key),
            self._fetch_plain(f"SELECT * FROM pair_summaries WHERE {where}", pair_key),
            self._fetch_plain(
                "SELECT * FROM version_sentences WHERE SOURCE=? AND A_ID=? AND VERSION_ID IN (?, ?) "
                "ORDER BY VERSION_ID",
                (source, a_id, v_old, v_new),
            ),
        )
        desired = (
            [tuple(r) for r in sentence_rows],
            [tuple(r) for r in word_rows],
            [tuple(r) for r in refactor_rows],
            [tuple(summary_row)],
            sorted(tuple(r) for r in version_rows),
        )
        if current == desired:
            return False
        with self.conn:
            self.conn.execute(f"DELETE FROM sentence_diffs WHERE {where}", pair_key)
            self.conn.execute(f"DELETE FROM word_diffs WHERE {where}", pair_key)
            self.conn.execute(f"DELETE FROM refactors WHERE {where}", pair_key)
            self.conn.execute(f"DELETE FROM pair_summaries WHERE {where}", pair_key)
            self.conn.executemany(
                "INSERT INTO sentence_diffs VALUES (?,?,?,?,?,?,?,?,?)", sentence_rows
            )
            self.conn.executemany(
                "INSERT INTO word_diffs VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?,?)", word_rows
            )
            self.conn.executemany("INSERT INTO refactors VALUES (?,?,?,?,?,?,?,?)", refactor_rows)
            self.conn.execute("INSERT INTO pair_summaries VALUES (?,?,?,?,?,?,?,?,?,?,?)", summary_row)
            self.conn.executemany(
                "INSERT OR REPLACE INTO version_sentences VALUES (?,?,?,?)", version_rows
            )
        return True

    def _fetch_plain(self, sql: str, params: tuple) -> list[tuple]:
        return [tuple(row) for row in self.conn.execute(sql, params).fetchall()]

    def diffed_pairs(self) -> list[tuple[str, str, int, int]]:
        rows = self.conn.execute(
            "SELECT SOURCE, A_ID, V_OLD_ID, V_NEW_ID FROM pair_summaries "
            "ORDER BY SOURCE, A_ID, V_OLD_ID"
        ).fetchall()
        return [tuple(r) for r in rows]

    def sentence_rows(self, pair_key: tuple[str, str, int, int]) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT * FROM sentence_diffs WHERE SOURCE=? AND A_ID=? AND V_OLD_ID=? AND V_NEW_ID=? "
            "ORDER BY SENTENCE_ID",
            pair_key,
        ).fetchall()

    def refactor_rows(self, pair_key: tuple[str, str, int, int]) -> list[sqlite3.Row]:
        return self.conn.execute(
            "SELECT * FROM refactors WHERE SOURCE=? AND A_ID=? AND V_OLD_ID=? AND V_NEW_ID=? "
            "ORDER BY REMOVAL_RANK",
            pair_key,
        ).fetchall()

    def pair_summary(self, pair_key: tuple[str, str, int, int]) -> sqlite3.Row | None:
        return self.conn.execute(
            "SELECT * FROM pair_summaries WHERE SOURCE=? AND A_ID=? AND V_OLD_ID=? AND V_NEW_ID=?",
            pair_key,
        ).fetchone()

    # -- export --------------------------------------------------------------

    def export_csv(self, table: str, path: str | Path) -> int:
        """Dump one relation to CSV with a header row; returns row count."""
        if table not in TABLES:
            raise ValueError(f"unknown table {table!r}")
        cursor = self.conn.execute(f"SELECT * FROM {table}")
        names = [d[0] for d in cursor.description]
        count = 0
        with open(path, "w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(names)
            for row in cursor:
                writer.writerow(tuple(row))
                count += 1
        return count
