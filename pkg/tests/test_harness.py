import itertools
import json
import random
from pathlib import Path

import pytest

from databoard.errors import BadArgument, BenchmarkError
from databoard.harness.bundled import build_benchmark
from databoard.harness.pages import generate_listing
from databoard.harness.replay import ScriptedUser, TaskReplayer, replay_task
from databoard.harness.summarize import (label_credit, render_summary,
                                         summarize_runs)
from databoard.harness.tasks import (classify_difficulty, count_main_records,
                                     load_manifest, load_task)
from databoard.harness.timeline import TimelineBlock, merge_timeline

BENCH = Path(__file__).resolve().parent.parent / "benchmark"


class TestDifficulty:
    @pytest.mark.parametrize("flags,expected", [
        ((False, False, False), "Easy"),
        ((True, True, False), "Medium"),
        ((True, True, True), "Hard"),
    ])
    def test_stated_rule(self, flags, expected):
        multi, ops, viz = flags
        criteria = {"multi_page": multi, "transform_ops_gt_5": ops,
                    "needs_viz": viz}
        assert classify_difficulty(criteria) == expected

    def test_all_eight_combinations(self):
        for flags in itertools.product([False, True], repeat=3):
            count = sum(flags)
            expected = "Easy" if count == 0 else ("Hard" if count == 3 else "Medium")
            criteria = dict(zip(("multi_page", "transform_ops_gt_5", "needs_viz"),
                                flags))
            assert classify_difficulty(criteria) == expected

    def test_depends_only_on_flags(self):
        criteria = {"multi_page": True, "transform_ops_gt_5": False,
                    "needs_viz": False}
        base = classify_difficulty(criteria)
        assert classify_difficulty(dict(criteria)) == base


class TestTaskLoading:
    def test_bundled_manifest_loads(self):
        tasks = load_manifest(BENCH / "manifest.json")
        assert len(tasks) == 10
        difficulties = [classify_difficulty(t.criteria) for t in tasks]
        assert difficulties.count("Easy") == 4
        assert difficulties.count("Medium") == 4
        assert difficulties.count("Hard") == 2

    def test_record_count_window_enforced(self, tmp_path):
        page = generate_listing(1, 9, "cameras", url="https://x/9")
        (tmp_path / "small.html").write_text(page.html)
        record = {"id": "t", "statement": "s",
                  "snapshots": [{"file": "small.html", "url": page.url}],
                  "criteria": {}}
        path = tmp_path / "t.json"
        path.write_text(json.dumps(record))
        with pytest.raises(BenchmarkError):
            load_task(path)

    def test_count_main_records_matches_generator(self):
        for n in (10, 25, 40):
            page = generate_listing(n, n, "movies", url=f"https://x/{n}")
            assert count_main_records(page.html) == n


class TestTimeline:
    def test_three_close_events_one_block(self):
        events = [{"timestamp": t * 10000.0, "category": "manual"}
                  for t in range(3)]
        blocks = merge_timeline(events)
        assert blocks == [TimelineBlock("manual", 0.0, 20000.0, 3)]

    def test_category_change_splits(self):
        events = [{"timestamp": 0.0, "category": "manual"},
                  {"timestamp": 1000.0, "category": "chat"},
                  {"timestamp": 2000.0, "category": "manual"}]
        assert [b.category for b in merge_timeline(events)] == \
            ["manual", "chat", "manual"]

    def test_gap_over_threshold_splits(self):
        events = [{"timestamp": 0.0, "category": "manual"},
                  {"timestamp": 90001.0, "category": "manual"}]
        assert len(merge_timeline(events, 90000.0)) == 2

    def test_unordered_events_rejected(self):
        events = [{"timestamp": 5.0, "category": "a"},
                  {"timestamp": 1.0, "category": "a"}]
        with pytest.raises(BadArgument):
            merge_timeline(events)

    def test_counts_sum_and_no_cross_category_merge(self):
        rng = random.Random(6)
        now = 0.0
        events = []
        for _ in range(200):
            now += rng.choice([1000.0, 50000.0, 95000.0])
            events.append({"timestamp": now,
                           "category": rng.choice(["in-situ", "peripheral",
                                                   "chat", "manual"])})
        blocks = merge_timeline(events)
        assert sum(b.count for b in blocks) == len(events)
        for first, second in zip(blocks, blocks[1:]):
            same = first.category == second.category
            if same:
                assert second.start - first.end > 90000.0


class TestLabels:
    def test_partial_credit_and_exclusion(self):
        assert label_credit("correct", "correct") == 1.0
        assert label_credit("incorrect", "incorrect") == 0.0
        assert label_credit("correct", "incorrect") == 0.5
        assert label_credit("not-sure", "correct") is None

    def test_unknown_verdict_rejected(self):
        with pytest.raises(BadArgument):
            label_credit("great", "correct")


def synthetic_report(task_id, difficulty, latencies_by_type):
    guidance = []
    for gtype, latencies in latencies_by_type.items():
        for latency in latencies:
            guidance.append({"guidance_type": gtype, "latency_ms": latency,
                             "description": "d", "pre_state_hash": "h",
                             "applied": True, "post_state_hash": "h2"})
    return {"task_id": task_id, "difficulty": difficulty, "guidance": guidance}


class TestSummarize:
    def test_single_run_echoes_its_values(self):
        report = synthetic_report("t1", "Easy", {"in-situ": [10.0, 20.0],
                                                 "chat": [5.0]})
        summary = summarize_runs([report])
        rows = {(r["difficulty"], r["guidance_type"]): r for r in summary["rows"]}
        assert rows[("Easy", "in-situ")]["mean_suggestion_count"] == 2
        assert rows[("Easy", "in-situ")]["mean_latency_ms"] == 15.0
        assert rows[("Easy", "chat")]["mean_latency_ms"] == 5.0

    def test_accuracy_arithmetic(self):
        report = synthetic_report("t1", "Easy", {"in-situ": [1.0, 1.0, 1.0, 1.0]})
        labels = [
            {"run": "t1", "item": 0, "labeler1": "correct", "labeler2": "correct"},
            {"run": "t1", "item": 1, "labeler1": "correct", "labeler2": "incorrect"},
            {"run": "t1", "item": 2, "labeler1": "not-sure", "labeler2": "correct"},
            {"run": "t1", "item": 3, "labeler1": "incorrect", "labeler2": "incorrect"},
        ]
        summary = summarize_runs([report], labels)
        row = next(r for r in summary["rows"]
                   if r["guidance_type"] == "in-situ")
        # (1 + 0.5 + 0) / 3 graded items; the not-sure item is excluded
        assert row["accuracy"] == pytest.approx(1.5 / 3)
        assert row["labeled_items"] == 3

    def test_render_is_printable(self):
        summary = summarize_runs([synthetic_report("t", "Hard",
                                                   {"peripheral": [3.0]})])
        text = render_summary(summary)
        assert "Hard" in text and "peripheral" in text


class TestReplay:
    def test_bundled_easy_task_runs_clean(self, tmp_path):
        task = load_task(BENCH / "tasks" / "e1-cameras-sort.json")
        report = replay_task(task, out_dir=tmp_path / "run")
        assert report.invalid_actions == 0
        assert (tmp_path / "run" / "report.json").exists()
        assert (tmp_path / "run" / "guidance.jsonl").exists()
        workspace = json.loads((tmp_path / "run" / "workspace.json").read_text())
        cameras = next(i for i in workspace["instances"] if i["id"] == "Cameras")
        assert len(cameras["rows"]) == 14
        prices = [row[1]["v"] for row in cameras["rows"]]
        assert prices == sorted(prices)

    def test_empty_driver_script_reports_zero_guidance(self, tmp_path):
        task = load_task(BENCH / "tasks" / "e1-cameras-sort.json")
        task.driver_script = []
        report = replay_task(task, out_dir=tmp_path / "run")
        assert report.guidance == []
        assert report.final_version_id == 0

    def test_invalid_action_injects_marker_then_recovers(self):
        task = load_task(BENCH / "tasks" / "e1-cameras-sort.json")
        script = list(task.driver_script)
        script.insert(1, {"do": "invalid-capture"})
        task.driver_script = script
        replayer = TaskReplayer(task)
        report = replayer.run(ScriptedUser(script))
        assert report.invalid_actions == 1
        context = replayer.session.assemble_context()
        assert "[INVALID ACTION]" in context.interaction_history
        # the run still completed: the table was extracted and sorted
        table = replayer.session.workspace.current.instance("Cameras")
        assert len(table.rows) == 14

    def test_step_budget_timeout(self):
        from databoard.errors import TaskTimeout
        task = load_task(BENCH / "tasks" / "e1-cameras-sort.json")
        with pytest.raises(TaskTimeout):
            replay_task(task, step_budget=2)


class TestBenchmarkBuilder:
    def test_build_is_deterministic(self, tmp_path):
        first = tmp_path / "a"
        second = tmp_path / "b"
        build_benchmark(first)
        build_benchmark(second)
        for path in sorted(first.rglob("*")):
            if path.is_file():
                twin = second / path.relative_to(first)
                assert twin.read_bytes() == path.read_bytes()

    def test_committed_benchmark_matches_builder(self, tmp_path):
        build_benchmark(tmp_path / "fresh")
        for path in sorted((tmp_path / "fresh").rglob("*")):
            if path.is_file():
                committed = BENCH / path.relative_to(tmp_path / "fresh")
                assert committed.exists(), f"missing {committed}"
                assert committed.read_bytes() == path.read_bytes()
