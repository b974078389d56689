"""Structured trajectory records and their JSONL/CSV serialization."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields


@dataclass
class MetricsRecord:
    """One trajectory point of an optimization or training run."""

    run_id: str
    mode: str
    instance_label: str
    iteration: int
    energy: float
    best_energy: float
    error_vs_exact: float | None
    cumulative_evaluations: int
    loss: float | None
    wall_ms: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def write_jsonl(path, records: list[MetricsRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")


def read_jsonl(path) -> list[MetricsRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(MetricsRecord(**json.loads(line)))
    return records


def write_csv(path, records: list[MetricsRecord]) -> None:
    names = [f.name for f in fields(MetricsRecord)]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=names)
        writer.writeheader()
        for rec in records:
            writer.writerow(asdict(rec))
