"""Evaluation harness: EM / F1 / retrieval metrics over line-JSON datasets.

Answer normalization (documented in every report header): lowercase,
trim, collapse whitespace runs, strip terminal ./!/? punctuation. F1 is
multiset token overlap, SQuAD-style. The factuality judge runs only when
explicitly enabled (it needs a real generator backend to mean anything);
under mocks it is omitted from aggregates.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .pipeline import Pipeline
from .post_retrieval import parse_score
from .text import normalize_answer, token_f1, tokenize

logger = logging.getLogger(__name__)

NORMALIZATION_NOTE = (
    "answer normalization: lowercase, strip, collapse whitespace, "
    "remove terminal . ! ?"
)


@dataclass(frozen=True)
class EvalSample:
    id: str
    query: str
    gold_answer: str
    gold_chunk_ids: tuple[str, ...] = ()
    sample_type: str = ""

    def __post_init__(self) -> None:
        if not self.query:
            raise ValueError("sample query must be non-empty")
        if not self.gold_answer:
            raise ValueError("sample gold_answer must be non-empty")


@dataclass
class EvalRow:
    sample_id: str
    em: int
    f1: float
    recall: float
    precision: float
    latency_ms: float
    cache_hit: bool
    route: str | None = None
    verdict: str | None = None
    answer: str = ""
    factuality: float | None = None

    def as_record(self) -> dict:
        record = {
            "sample_id": self.sample_id,
            "em": self.em,
            "f1": self.f1,
            "recall": self.recall,
            "precision": self.precision,
            "latency_ms": self.latency_ms,
            "cache_hit": self.cache_hit,
            "route": self.route,
            "verdict": self.verdict,
            "answer": self.answer,
        }
        if self.factuality is not None:
            record["factuality"] = self.factuality
        return record


@dataclass
class EvalReport:
    rows: list[EvalRow]
    aggregates: dict[str, float]
    skipped: int = 0
    normalization_note: str = NORMALIZATION_NOTE
    warnings: list[str] = field(default_factory=list)


# ----------------------------------------------------------------------
# metrics
# ----------------------------------------------------------------------


def exact_match(pred: str, gold: str) -> int:
    return int(normalize_answer(pred) == normalize_answer(gold))


def f1_score(pred: str, gold: str) -> float:
    return token_f1(tokenize(pred), tokenize(gold))


def retrieval_metrics(
    retrieved_ids: list[str], gold_ids: list[str]
) -> tuple[float, float]:
    """(recall, precision) over id sets.

    Empty gold -> recall 1.0 (vacuous). Empty retrieved with non-empty
    gold -> precision 0.0; both empty -> precision 1.0.
    """
    retrieved = set(retrieved_ids)
    gold = set(gold_ids)
    common = len(retrieved & gold)
    recall = 1.0 if not gold else common / len(gold)
    if not retrieved:
        precision = 1.0 if not gold else 0.0
    else:
        precision = common / len(retrieved)
    return recall, precision


# ----------------------------------------------------------------------
# dataset
# ----------------------------------------------------------------------


def load_dataset(path: str | Path) -> tuple[list[EvalSample], int]:
    """Parse a line-delimited JSON dataset.

    Invalid lines are skipped with a counted warning; if at least half
    of the non-blank lines are invalid the dataset is rejected.
    """
    lines = [
        line
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
    samples: list[EvalSample] = []
    skipped = 0
    for i, line in enumerate(lines, start=1):
        try:
            raw = json.loads(line)
            samples.append(
                EvalSample(
                    id=str(raw.get("id", f"sample-{i}")),
                    query=raw["query"],
                    gold_answer=raw["gold_answer"],
                    gold_chunk_ids=tuple(raw.get("gold_chunk_ids", ())),
                    sample_type=str(raw.get("sample_type", "")),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            skipped += 1
            logger.warning("skipping invalid sample on line %d: %s", i, exc)
    if lines and skipped * 2 >= len(lines):
        raise DatasetError(
            f"{path}: {skipped}/{len(lines)} lines invalid; refusing to evaluate"
        )
    if not samples:
        raise DatasetError(f"{path}: dataset contains no samples")
    return samples, skipped


# ----------------------------------------------------------------------
# runner
# ----------------------------------------------------------------------


def run_eval(
    dataset_path: str | Path,
    pipeline: Pipeline,
    no_cache: bool = False,
    parallelism: int = 1,
    factuality: bool = False,
) -> EvalReport:
    """Evaluate every sample through pipeline.chat.

    ``no_cache`` maps to ``use_cache=False`` per request (the ablation
    contract). Samples may run concurrently; report rows keep dataset
    order either way.
    """
    samples, skipped = load_dataset(dataset_path)

    def evaluate(sample: EvalSample) -> EvalRow:
        t0 = time.perf_counter()
        result = pipeline.chat(sample.query, use_cache=False if no_cache else None)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        recall, precision = retrieval_metrics(
            [sid for sid, _ in result.sources], list(sample.gold_chunk_ids)
        )
        row = EvalRow(
            sample_id=sample.id,
            em=exact_match(result.answer, sample.gold_answer),
            f1=f1_score(result.answer, sample.gold_answer),
            recall=recall,
            precision=precision,
            latency_ms=latency_ms,
            cache_hit=result.cache_hit,
            route=result.route.value if result.route else None,
            verdict=result.verdict.value if result.verdict else None,
            answer=result.answer,
        )
        if factuality:
            row.factuality = _judge_factuality(pipeline, result.answer, result.contexts)
        return row

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(evaluate, samples))
    else:
        rows = [evaluate(sample) for sample in samples]

    return EvalReport(rows=rows, aggregates=compute_aggregates(rows), skipped=skipped)


def _judge_factuality(pipeline: Pipeline, answer: str, contexts: tuple[str, ...]) -> float:
    system, user = pipeline.catalog.render(
        "judge", answer=answer or "(empty)", contexts="\n".join(contexts) or "(none)"
    )
    return parse_score(pipeline.gateway.generator.complete(user, system))


def compute_aggregates(rows: list[EvalRow]) -> dict[str, float]:
    if not rows:
        return {}
    latencies = np.array([row.latency_ms for row in rows])
    aggregates = {
        "samples": float(len(rows)),
        "mean_em": float(np.mean([row.em for row in rows])),
        "mean_f1": float(np.mean([row.f1 for row in rows])),
        "mean_recall": float(np.mean([row.recall for row in rows])),
        "mean_precision": float(np.mean([row.precision for row in rows])),
        "latency_p50_ms": float(np.percentile(latencies, 50)),
        "latency_p95_ms": float(np.percentile(latencies, 95)),
        "cache_hit_rate": float(np.mean([row.cache_hit for row in rows])),
    }
    judged = [row.factuality for row in rows if row.factuality is not None]
    if judged:
        aggregates["mean_factuality"] = float(np.mean(judged))
    return aggregates


# ----------------------------------------------------------------------
# report output
# ----------------------------------------------------------------------


def write_report(report: EvalReport, output_prefix: str | Path) -> tuple[Path, Path]:
    """Write machine-readable rows (.jsonl) and a summary table (.txt)."""
    prefix = Path(output_prefix)
    rows_path = prefix.with_suffix(".jsonl")
    summary_path = prefix.with_suffix(".txt")
    rows_path.write_text(
        "".join(json.dumps(row.as_record(), sort_keys=True) + "\n" for row in report.rows),
        encoding="utf-8",
    )
    summary_path.write_text(format_summary(report), encoding="utf-8")
    return rows_path, summary_path


def format_summary(report: EvalReport) -> str:
    lines = [
        "evaluation report",
        f"# {report.normalization_note}",
        f"samples={len(report.rows)} skipped={report.skipped}",
        "",
        f"{'metric':<20}{'value':>12}",
    ]
    for key, value in sorted(report.aggregates.items()):
        lines.append(f"{key:<20}{value:>12.4f}")
    lines.append("")
    lines.append(
        f"{'sample':<24}{'em':>4}{'f1':>8}{'recall':>8}{'prec':>8}"
        f"{'ms':>10}{'hit':>5}"
    )
    for row in report.rows:
        lines.append(
            f"{row.sample_id:<24}{row.em:>4}{row.f1:>8.3f}{row.recall:>8.3f}"
            f"{row.precision:>8.3f}{row.latency_ms:>10.2f}"
            f"{'y' if row.cache_hit else 'n':>5}"
        )
    return "\n".join(lines) + "\n"
