"""Edit-prediction task datasets and the evaluation harness.

Three tasks over breaking-news-filtered versions: (1) will the article
update, (2) how many additions/deletions/edits/refactors will the next
version bring (binned low/medium/high), (3) per-sentence operation,
refactor direction, and addition-above/below labels. Evaluation reports
macro/micro F1 plus medians over seeded bootstrap resamples.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .align import parse_tag
from .segment import normalize_text, split_sentences
from .store import DiffStore

DEFAULT_BREAKING_SOURCES = (
    "nytimes",
    "ap",
    "washingtonpost",
    "bbc",
    "independent",
    "guardian",
    "reuters",
)

LOW, MEDIUM, HIGH = "low", "medium", "high"
BINS = (LOW, MEDIUM, HIGH)
OPERATION_CLASSES = ("deletion", "edit", "unchanged")
REFACTOR_CLASSES = ("up", "down", "unchanged")
BOOL_CLASSES = (False, True)
COUNT_SUBTASKS = ("additions", "deletions", "edits", "refactors")

SUBTASK_CLASSES: dict[str, dict[str, tuple]] = {
    "task1": {"update": (0, 1)},
    "task2": {name: BINS for name in COUNT_SUBTASKS},
    "task3": {
        "operation": OPERATION_CLASSES,
        "refactor": REFACTOR_CLASSES,
        "addition_above": BOOL_CLASSES,
        "addition_below": BOOL_CLASSES,
    },
}


def bin_count(k: int) -> str:
    """Bin a non-negative count: 0 low, 1-2 medium, >=3 high."""
    if k < 0:
        raise ValueError(f"count must be non-negative, got {k}")
    if k == 0:
        return LOW
    if k < 3:
        return MEDIUM
    return HIGH


def filter_breaking(
    store: DiffStore,
    min_sents: int = 5,
    max_sents: int = 15,
    max_version: int = 20,
    sources: tuple[str, ...] | None = DEFAULT_BREAKING_SOURCES,
) -> list[tuple[str, str, int]]:
    """Version keys with sentence count in [min, max] and low version number."""
    keys = []
    for source, a_id in store.iter_articles():
        if sources is not None and source not in sources:
            continue
        for row in store.versions_of(source, a_id):
            if row["VERSION_ID"] >= max_version:
                continue
            n = len(split_sentences(normalize_text(row["TEXT"])))
            if min_sents <= n <= max_sents:
                keys.append((source, a_id, row["VERSION_ID"]))
    return keys


def build_task1(
    store: DiffStore,
    keys: list[tuple[str, str, int]],
    balance: bool = False,
    seed: int = 0,
) -> list[dict]:
    """Binary will-this-version-update examples."""
    rows = []
    for source, a_id, version_id in keys:
        article = store.get_version(source, a_id, version_id)
        has_next = store.get_version(source, a_id, version_id + 1) is not None
        rows.append(
            {
                "example_id": f"{source}:{a_id}:{version_id}",
                "task": "task1",
                "source": source,
                "a_id": a_id,
                "version_id": version_id,
                "text": article["TEXT"],
                "y": 1 if has_next else 0,
            }
        )
    if balance and rows:
        by_class: dict[int, list[dict]] = {0: [], 1: []}
        for row in rows:
            by_class[row["y"]].append(row)
        cap = min(len(v) for v in by_class.values())
        rng = random.Random(seed)
        kept = []
        for label in (0, 1):
            kept.extend(rng.sample(by_class[label], cap))
        order = {id(row): i for i, row in enumerate(rows)}
        rows = sorted(kept, key=lambda r: order[id(r)])
    return rows


@dataclass
class BuildReport:
    rows: list[dict] = field(default_factory=list)
    skipped: int = 0


def _successor_pair(store: DiffStore, source: str, a_id: str, version_id: int):
    row = store.conn.execute(
        "SELECT * FROM pair_summaries WHERE SOURCE=? AND A_ID=? AND V_OLD_ID=? "
        "ORDER BY V_NEW_ID LIMIT 1",
        (source, a_id, version_id),
    ).fetchone()
    return row


def build_task2(store: DiffStore, keys: list[tuple[str, str, int]]) -> BuildReport:
    """Binned next-version action counts per document."""
    report = BuildReport()
    for source, a_id, version_id in keys:
        summary = _successor_pair(store, source, a_id, version_id)
        if summary is None:
            report.skipped += 1
            continue
        article = store.get_version(source, a_id, version_id)
        counts = {
            "additions": summary["NUM_SENTENCES_ADDED"],
            "deletions": summary["NUM_SENTENCES_REMOVED"],
            "edits": summary["NUM_SENTENCES_EDITED"],
            "refactors": summary["NUM_REFACTORS"],
        }
        report.rows.append(
            {
                "example_id": f"{source}:{a_id}:{version_id}",
                "task": "task2",
                "source": source,
                "a_id": a_id,
                "version_id": version_id,
                "text": article["TEXT"],
                "counts": counts,
                "labels": {name: bin_count(c) for name, c in counts.items()},
            }
        )
    return report


def build_task3(
    store: DiffStore,
    keys: list[tuple[str, str, int]],
    min_added: int = 1,
) -> BuildReport:
    """Per-sentence operation/refactor/addition labels for each old sentence.

    Addition-above/below is true iff at least ``min_added`` added sentences
    fall strictly between this sentence's anchor (its smallest matched new
    index) and the anchor of its nearest matched neighbor on that side.
    Deleted sentences have no anchor: their addition labels are null and
    they are excluded from the addition subtasks.
    """
    report = BuildReport()
    for source, a_id, version_id in keys:
        summary = _successor_pair(store, source, a_id, version_id)
        if summary is None:
            report.skipped += 1
            continue
        pair_key = (source, a_id, version_id, summary["V_NEW_ID"])
        sent_rows = store.sentence_rows(pair_key)
        n_old, n_new = summary["NUM_SENTS_OLD"], summary["NUM_SENTS_NEW"]
        tags_old = [parse_tag(r["TAG_OLD"]) for r in sent_rows if r["SENTENCE_ID"] <= n_old]
        added_positions = sorted(
            r["SENTENCE_ID"] for r in sent_rows if r["SENTENCE_ID"] <= n_new and r["TAG_NEW"] == "A"
        )
        directions = {
            r["OLD_IDX"]: r["DIRECTION"] for r in store.refactor_rows(pair_key)
        }
        anchors = {
            i: tag.matched[0]
            for i, tag in enumerate(tags_old, start=1)
            if tag.op == "M"
        }
        matched_indices = sorted(anchors)
        for i, tag in enumerate(tags_old, start=1):
            if tag.op == "R":
                operation = "deletion"
            elif tag.changed == "C":
                operation = "edit"
            else:
                operation = "unchanged"
            refactor = directions.get(i, "unchanged")
            if tag.op == "R":
                above = below = None
            else:
                anchor = anchors[i]
                prev_anchor = 0
                next_anchor = n_new + 1
                for j in matched_indices:
                    if j < i:
                        prev_anchor = anchors[j]
                    elif j > i:
                        next_anchor = anchors[j]
                        break
                above = sum(1 for p in added_positions if prev_anchor < p < anchor) >= min_added
                below = sum(1 for p in added_positions if anchor < p < next_anchor) >= min_added
            sentence = sent_rows[i - 1]["SENT_OLD"]
            report.rows.append(
                {
                    "example_id": f"{source}:{a_id}:{version_id}:{i}",
                    "task": "task3",
                    "source": source,
                    "a_id": a_id,
                    "version_id": version_id,
                    "sentence_id": i,
                    "sentence": sentence,
                    "operation": operation,
                    "refactor": refactor,
                    "addition_above": above,
                    "addition_below": below,
                }
            )
    return report


def write_jsonl(rows: list[dict], path: str) -> int:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, sort_keys=True) + "\n")
    return len(rows)


def read_jsonl(path: str) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                rows.append(json.loads(line))
    return rows


# -- predictors ---------------------------------------------------------------


def baseline_most_popular(train_labels: list, classes: tuple):
    """Constant predictor of the modal class; ties break to class order."""
    if not train_labels:
        raise ValueError("most-popular baseline needs non-empty training labels")
    counts = Counter(train_labels)
    rank = {label: i for i, label in enumerate(classes)}
    modal = max(counts, key=lambda label: (counts[label], -rank.get(label, len(classes))))
    return lambda n: [modal] * n


def baseline_random(classes: tuple, seed: int = 0):
    """Uniform i.i.d. class draws from a seeded deterministic generator."""
    if not classes:
        raise ValueError("random baseline needs a non-empty class list")

    def predict(n: int) -> list:
        rng = random.Random(seed)
        return [classes[rng.randrange(len(classes))] for _ in range(n)]

    return predict


# -- metrics ------------------------------------------------------------------


def macro_micro_f1(preds: list, golds: list, classes: tuple) -> tuple[float, float]:
    """Per-class F1 averaged over the declared class list, plus micro F1.

    Scores are on a 0-100 scale. Classes absent from both predictions and
    gold contribute 0 to the macro mean; micro F1 equals accuracy for
    single-label problems.
    """
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    tp: Counter = Counter()
    fp: Counter = Counter()
    fn: Counter = Counter()
    for pred, gold in zip(preds, golds):
        if pred == gold:
            tp[gold] += 1
        else:
            fp[pred] += 1
            fn[gold] += 1
    per_class = []
    for label in classes:
        denom = 2 * tp[label] + fp[label] + fn[label]
        per_class.append(2 * tp[label] / denom if denom else 0.0)
    macro = 100.0 * sum(per_class) / len(classes) if classes else 0.0
    total_tp = sum(tp.values())
    micro_denom = total_tp + 0.5 * (sum(fp.values()) + sum(fn.values()))
    micro = 100.0 * total_tp / micro_denom if micro_denom else 0.0
    return macro, micro


def bootstrap_median(
    preds: list,
    golds: list,
    classes: tuple,
    n_resamples: int = 1000,
    seed: int = 0,
) -> tuple[float, float]:
    """Median macro/micro F1 over with-replacement resamples of examples."""
    if not preds or not golds:
        raise ValueError("bootstrap needs non-empty inputs")
    if len(preds) != len(golds):
        raise ValueError("length mismatch")
    rng = np.random.default_rng(seed)
    n = len(preds)
    macros = np.empty(n_resamples)
    micros = np.empty(n_resamples)
    for r in range(n_resamples):
        idx = rng.integers(0, n, n)
        macro, micro = macro_micro_f1([preds[i] for i in idx], [golds[i] for i in idx], classes)
        macros[r] = macro
        micros[r] = micro
    return float(np.median(macros)), float(np.median(micros))


# -- evaluation harness ---------------------------------------------------------


def gold_by_subtask(task: str, rows: list[dict]) -> dict[str, list[tuple[str, object]]]:
    """(example_id, gold_label) pairs per subtask; null labels are excluded."""
    subtasks = SUBTASK_CLASSES[task]
    out: dict[str, list[tuple[str, object]]] = {name: [] for name in subtasks}
    for row in rows:
        if task == "task1":
            out["update"].append((row["example_id"], row["y"]))
        elif task == "task2":
            for name in COUNT_SUBTASKS:
                out[name].append((row["example_id"], row["labels"][name]))
        else:
            out["operation"].append((row["example_id"], row["operation"]))
            out["refactor"].append((row["example_id"], row["refactor"]))
            for name in ("addition_above", "addition_below"):
                if row[name] is not None:
                    out[name].append((row["example_id"], row[name]))
    return out


@dataclass(frozen=True)
class EvalReport:
    task: str
    predictor: str
    seed: int
    n_resamples: int
    subtasks: dict[str, dict]

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "predictor": self.predictor,
            "seed": self.seed,
            "n_resamples": self.n_resamples,
            "subtasks": self.subtasks,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


def evaluate(
    task: str,
    rows: list[dict],
    predictions: dict[tuple[str, str], object] | None = None,
    baseline: str | None = None,
    train_rows: list[dict] | None = None,
    n_resamples: int = 1000,
    seed: int = 0,
) -> EvalReport:
    """Score a predictions file or a named baseline against gold labels.

    ``predictions`` maps (example_id, subtask) to the predicted label.
    Baselines: ``most_popular`` fits on ``train_rows`` (default: the
    evaluation rows), ``random`` draws uniformly with the given seed.
    """
    if (predictions is None) == (baseline is None):
        raise ValueError("provide exactly one of predictions or baseline")
    golds = gold_by_subtask(task, rows)
    train_golds = gold_by_subtask(task, train_rows) if train_rows is not None else golds
    subtask_reports: dict[str, dict] = {}
    for name, pairs in golds.items():
        classes = SUBTASK_CLASSES[task][name]
        gold_labels = [label for _, label in pairs]
        if not gold_labels:
            continue
        if baseline == "most_popular":
            predict = baseline_most_popular([label for _, label in train_golds[name]], classes)
            preds = predict(len(gold_labels))
        elif baseline == "random":
            preds = baseline_random(classes, seed=seed)(len(gold_labels))
        elif baseline is not None:
            raise ValueError(f"unknown baseline {baseline!r}")
        else:
            try:
                preds = [predictions[(example_id, name)] for example_id, _ in pairs]
            except KeyError as exc:
                raise ValueError(f"missing prediction for {exc.args[0]!r}") from exc
        macro, micro = macro_micro_f1(preds, gold_labels, classes)
        boot_macro, boot_micro = bootstrap_median(
            preds, gold_labels, classes, n_resamples=n_resamples, seed=seed
        )
        subtask_reports[name] = {
            "n_examples": len(gold_labels),
            "macro_f1": macro,
            "micro_f1": micro,
            "macro_f1_bootstrap_median": boot_macro,
            "micro_f1_bootstrap_median": boot_micro,
        }
    return EvalReport(
        task=task,
        predictor=baseline or "predictions",
        seed=seed,
        n_resamples=n_resamples,
        subtasks=subtask_reports,
    )


def load_predictions(path: str) -> dict[tuple[str, str], object]:
    """Read a predictions file: JSONL of example_id/subtask/predicted_label."""
    predictions: dict[tuple[str, str], object] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                key = (str(record["example_id"]), str(record["subtask"]))
                predictions[key] = record["predicted_label"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad prediction record: {exc}") from exc
    return predictions
