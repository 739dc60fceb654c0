"""Benchmark task definitions, loading, and difficulty classification.

A task file is JSON: {"id", "statement", "snapshots": [{"file", "url"}],
"criteria": {"multi_page", "transform_ops_gt_5", "needs_viz"},
"driver_script": [...]}. Snapshot html files live next to the manifest;
each main body must hold 10-40 records, validated at load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..dom import Dom
from ..errors import BenchmarkError

CRITERIA = ("multi_page", "transform_ops_gt_5", "needs_viz")
MIN_RECORDS = 10
MAX_RECORDS = 40


@dataclass
class BenchmarkTask:
    id: str
    statement: str
    snapshots: list[dict]            # {"file": str, "url": str}
    criteria: dict
    driver_script: list[dict] = field(default_factory=list)
    fixtures: str | None = None      # scripted-provider fixture file
    base_dir: Path = Path(".")

    def snapshot_paths(self) -> list[Path]:
        return [self.base_dir / s["file"] for s in self.snapshots]

    def fixtures_path(self) -> Path | None:
        return self.base_dir / self.fixtures if self.fixtures else None

    def to_json(self) -> dict:
        out = {"id": self.id, "statement": self.statement,
               "snapshots": self.snapshots, "criteria": self.criteria,
               "driver_script": self.driver_script}
        if self.fixtures:
            out["fixtures"] = self.fixtures
        return out


def classify_difficulty(criteria: dict) -> str:
    """0 criteria -> Easy; 1-2 -> Medium; 3 -> Hard."""
    count = sum(1 for name in CRITERIA if bool(criteria.get(name)))
    if count == 0:
        return "Easy"
    if count <= 2:
        return "Medium"
    return "Hard"


def count_main_records(html: str) -> int:
    """Record count of the page's main body: the largest run of same-tag,
    same-class element children under one parent."""
    dom = Dom.parse(html)
    best = 0

    def walk(node):
        nonlocal best
        groups: dict[tuple, int] = {}
        for child in node.element_children():
            key = (child.tag, tuple(sorted(child.classes)))
            groups[key] = groups.get(key, 0) + 1
            walk(child)
        if groups:
            best = max(best, max(groups.values()))

    walk(dom.root)
    return best


def load_task(path: str | Path) -> BenchmarkTask:
    path = Path(path)
    try:
        record = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BenchmarkError(f"unreadable task file {path}: {exc}") from exc
    for key in ("id", "statement", "snapshots", "criteria"):
        if key not in record:
            raise BenchmarkError(f"task {path} is missing {key!r}")
    unknown = set(record["criteria"]) - set(CRITERIA)
    if unknown:
        raise BenchmarkError(f"task {path} has unknown criteria {sorted(unknown)}")
    task = BenchmarkTask(
        id=record["id"],
        statement=record["statement"],
        snapshots=record["snapshots"],
        criteria=record["criteria"],
        driver_script=record.get("driver_script", []),
        fixtures=record.get("fixtures"),
        base_dir=path.parent,
    )
    for snapshot in task.snapshots:
        file_path = task.base_dir / snapshot["file"]
        if not file_path.exists():
            raise BenchmarkError(f"snapshot file missing: {file_path}")
        records = count_main_records(file_path.read_text())
        if not MIN_RECORDS <= records <= MAX_RECORDS:
            raise BenchmarkError(
                f"{file_path} main body holds {records} records, "
                f"outside [{MIN_RECORDS}, {MAX_RECORDS}]")
    return task


def load_manifest(path: str | Path) -> list[BenchmarkTask]:
    """Manifest format: {"tasks": ["tasks/e1.json", ...]} next to the files."""
    path = Path(path)
    record = json.loads(path.read_text())
    return [load_task(path.parent / entry) for entry in record["tasks"]]
