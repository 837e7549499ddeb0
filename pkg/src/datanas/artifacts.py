"""Readers and writers for run artifacts.

A search run produces five files in its output directory:

* ``history.jsonl``: one JSON object per evaluation, in evaluation order
* ``pareto.json``: the non-dominated set, with full records
* ``summary.json``: effective configuration, counters, best candidate
* ``fitness_evolution.csv``: trailing-window mean fitness series
* ``cumulative_pareto.csv``: fraction of the final front found over time

All writers go through one record serialization, so re-reading a history
and recomputing the front reproduces ``pareto.json`` byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from .evolution import EvaluatedCandidate
from .fitness import EvalMetrics
from .resources import ResourceEstimate
from .search_space import candidate_from_record, candidate_record

HISTORY_NAME = "history.jsonl"
PARETO_NAME = "pareto.json"
SUMMARY_NAME = "summary.json"
FITNESS_SERIES_NAME = "fitness_evolution.csv"
PARETO_SERIES_NAME = "cumulative_pareto.csv"
FRONTIER_NAME = "frontier.csv"


class ArtifactError(RuntimeError):
    """A run artifact is missing, unreadable, or malformed."""


def record_to_dict(record: EvaluatedCandidate) -> dict:
    """Flat JSON-ready view of one evaluation.

    Wall time is deliberately not serialized: histories must be
    byte-identical across repeat runs with the same seed.
    """
    metrics = record.metrics
    return {
        "eval_index": record.eval_index,
        **candidate_record(record.candidate),
        "accuracy": None if metrics is None else metrics.accuracy,
        "precision": None if metrics is None else metrics.precision,
        "recall": None if metrics is None else metrics.recall,
        "ram_bytes": record.estimate.ram_bytes,
        "flash_bytes": record.estimate.flash_bytes,
        "fitness": record.fitness_value,
        "error": record.error,
    }


def record_from_dict(row: dict) -> EvaluatedCandidate:
    metrics = None
    if row.get("accuracy") is not None:
        metrics = EvalMetrics(
            accuracy=float(row["accuracy"]),
            precision=float(row["precision"]),
            recall=float(row["recall"]),
        )
    fitness_value = row.get("fitness")
    return EvaluatedCandidate(
        candidate=candidate_from_record(row),
        metrics=metrics,
        estimate=ResourceEstimate(
            flash_bytes=int(row["flash_bytes"]),
            ram_bytes=int(row["ram_bytes"]),
        ),
        fitness_value=None if fitness_value is None else float(fitness_value),
        eval_index=int(row["eval_index"]),
        wall_time=0.0,
        error=row.get("error"),
    )


class HistoryWriter:
    """Streams history lines to disk as evaluations complete.

    Each line is flushed immediately, so an interrupted run still leaves
    a readable prefix of the history behind.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._fh = self.path.open("w", encoding="utf-8")

    def append(self, record: EvaluatedCandidate) -> None:
        self._fh.write(json.dumps(record_to_dict(record)) + "\n")
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "HistoryWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


def write_history(path: str | Path, records: Sequence[EvaluatedCandidate]) -> None:
    with HistoryWriter(path) as writer:
        for record in records:
            writer.append(record)


def load_history(path: str | Path) -> list[EvaluatedCandidate]:
    """Parse a history file; raises :class:`ArtifactError` naming the file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"{path}: cannot read history: {exc}") from exc
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(record_from_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ArtifactError(f"{path}:{lineno}: malformed history line: {exc}") from exc
    if not records:
        raise ArtifactError(f"{path}: empty history")
    return records


def write_json(path: str | Path, payload: dict) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def write_pareto(path: str | Path, front: Sequence[EvaluatedCandidate]) -> None:
    write_json(path, {"front": [record_to_dict(record) for record in front]})


def write_series_csv(
    path: str | Path,
    header: tuple[str, str],
    series: Sequence[tuple[int, float]],
) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(series)


def write_frontier_csv(path: str | Path, front: Sequence[EvaluatedCandidate]) -> None:
    """Plot-ready table of the front, ordered by increasing accuracy."""
    ordered = sorted(
        front,
        key=lambda r: (r.metrics.accuracy, r.estimate.ram_bytes, r.estimate.flash_bytes),
    )
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["accuracy", "ram_bytes", "flash_bytes", "resolution", "color",
             "b3", "b4", "b5", "b6", "b7", "alpha", "fitness"]
        )
        for record in ordered:
            genome = candidate_record(record.candidate)
            writer.writerow(
                [record.metrics.accuracy, record.estimate.ram_bytes,
                 record.estimate.flash_bytes, genome["resolution"], genome["color"],
                 genome["b3"], genome["b4"], genome["b5"], genome["b6"], genome["b7"],
                 genome["alpha"], record.fitness_value]
            )
