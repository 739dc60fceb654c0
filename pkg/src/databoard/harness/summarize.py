"""Run summaries: suggestion counts, latency, and human-labeled accuracy.

Accuracy is imported from a label file, never auto-judged. Each label row
carries two annotator verdicts (correct / incorrect / not-sure) for one
guidance item of one run; items with any not-sure verdict are excluded, a
disagreement contributes partial credit of 0.5.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from ..errors import BadArgument

GUIDANCE_TYPES = ("in-situ", "peripheral", "chat")
DIFFICULTIES = ("Easy", "Medium", "Hard")
VERDICTS = ("correct", "incorrect", "not-sure")


def label_credit(first: str, second: str) -> float | None:
    """None = excluded (a not-sure verdict); otherwise the credit in [0,1]."""
    for verdict in (first, second):
        if verdict not in VERDICTS:
            raise BadArgument(f"unknown verdict {verdict!r}")
    if "not-sure" in (first, second):
        return None
    if first == second:
        return 1.0 if first == "correct" else 0.0
    return 0.5


def load_labels(path: str | Path) -> list[dict]:
    record = json.loads(Path(path).read_text())
    return record["labels"]


def summarize_runs(reports: list[dict], labels: list[dict] | None = None) -> dict:
    """Per difficulty x guidance type: run count, mean suggestion count,
    mean latency, and (when labels are given) accuracy."""
    if not reports:
        raise BadArgument("at least one run report is required")
    cells: dict[tuple[str, str], dict] = {}
    run_counts: dict[str, int] = {}
    for report in reports:
        difficulty = report["difficulty"]
        run_counts[difficulty] = run_counts.get(difficulty, 0) + 1
        per_type: dict[str, list[float]] = {g: [] for g in GUIDANCE_TYPES}
        for entry in report["guidance"]:
            per_type[entry["guidance_type"]].append(entry["latency_ms"])
        for gtype in GUIDANCE_TYPES:
            cell = cells.setdefault((difficulty, gtype),
                                    {"suggestions": [], "latencies": []})
            cell["suggestions"].append(len(per_type[gtype]))
            cell["latencies"].extend(per_type[gtype])

    accuracy: dict[tuple[str, str], tuple[float, int]] = {}
    if labels:
        by_task = {r["task_id"]: r for r in reports}
        credit_sums: dict[tuple[str, str], list[float]] = {}
        for label in labels:
            report = by_task.get(label["run"])
            if report is None:
                raise BadArgument(f"labels reference unknown run {label['run']!r}")
            item = label["item"]
            if not 0 <= item < len(report["guidance"]):
                raise BadArgument(f"label item {item} out of range for {label['run']}")
            entry = report["guidance"][item]
            credit = label_credit(label["labeler1"], label["labeler2"])
            if credit is None:
                continue       # a not-sure verdict excludes the item
            key = (report["difficulty"], entry["guidance_type"])
            credit_sums.setdefault(key, []).append(credit)
        for key, credits in credit_sums.items():
            accuracy[key] = (sum(credits) / len(credits), len(credits))

    rows = []
    for difficulty in DIFFICULTIES:
        if difficulty not in run_counts:
            continue
        for gtype in GUIDANCE_TYPES:
            cell = cells.get((difficulty, gtype))
            if cell is None:
                continue
            suggestions = cell["suggestions"]
            latencies = cell["latencies"]
            row = {
                "difficulty": difficulty,
                "guidance_type": gtype,
                "runs": run_counts[difficulty],
                "mean_suggestion_count": sum(suggestions) / len(suggestions),
                "mean_latency_ms": (sum(latencies) / len(latencies)
                                    if latencies else None),
            }
            if (difficulty, gtype) in accuracy:
                value, labeled = accuracy[(difficulty, gtype)]
                row["accuracy"] = value
                row["labeled_items"] = labeled
            rows.append(row)
    return {"rows": rows, "total_runs": len(reports)}


def render_summary(summary: dict) -> str:
    lines = [f"{'Difficulty':<10} {'Type':<11} {'Runs':>4} "
             f"{'MeanCount':>9} {'MeanLat(ms)':>11} {'Accuracy':>9}"]
    for row in summary["rows"]:
        latency = (f"{row['mean_latency_ms']:.1f}"
                   if row["mean_latency_ms"] is not None else "-")
        acc = f"{row['accuracy'] * 100.0:.1f}%" if "accuracy" in row else "-"
        lines.append(f"{row['difficulty']:<10} {row['guidance_type']:<11} "
                     f"{row['runs']:>4} {row['mean_suggestion_count']:>9.2f} "
                     f"{latency:>11} {acc:>9}")
    lines.append(f"total runs: {summary['total_runs']}")
    return "\n".join(lines)
