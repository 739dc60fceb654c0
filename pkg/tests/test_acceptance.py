"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one [PASS] line (visible with -s, or in captured output on
failure); the whole module runs headless with no UI component.
"""

import itertools
import json
import random
import time
from pathlib import Path

import pytest

from databoard.catalog import ToolExecutor, make_call
from databoard.cells import Cell
from databoard.clock import ScriptedClock
from databoard.config import EngineConfig
from databoard.errors import PlanFailure
from databoard.events import EventLog, InteractionEvent
from databoard.extraction import (ElementSelection, SnapshotStore,
                                  batch_extract, discover_fields,
                                  generalize_selection)
from databoard.fillprog import apply_fill_program, infer_fill_program
from databoard.gateway import assemble_context
from databoard.guidance import Focus, GuidanceEngine
from databoard.harness.pages import generate_listing, item_nodes
from databoard.harness.replay import replay_task
from databoard.harness.tasks import classify_difficulty, load_manifest, load_task
from databoard.harness.timeline import merge_timeline
from databoard.suggestions import ToolPlan
from databoard.transforms import merge_instances
from databoard.workspace import Workspace

import trigger_scripts
from conftest import cell, grid, table
from test_fillprog import ex, oracle_min_length

BENCH = Path(__file__).resolve().parent.parent / "benchmark"


def report(name):
    print(f"[PASS] {name}")


# --- criterion 1: trigger-framework conformance -----------------------------

def test_trigger_framework_conformance():
    started = time.perf_counter()
    hits = 0
    for rule, build in trigger_scripts.POSITIVE_SCRIPTS.items():
        fired = build().fired()
        assert fired == [rule], f"positive {rule} fired {fired}"
        hits += 1
    for rule, build in trigger_scripts.NEGATIVE_SCRIPTS.items():
        fired = build().fired()
        assert fired == [], f"negative control {rule} fired {fired}"
        hits += 1
    elapsed = time.perf_counter() - started
    assert hits == 30
    assert elapsed < 5.0, f"conformance took {elapsed:.2f}s"
    report(f"trigger-framework conformance: 30/30 scripts in {elapsed:.2f}s")


# --- criterion 2: batch extraction recovery ---------------------------------

def test_batch_extraction_recovery():
    rng = random.Random(2024)
    store = SnapshotStore()
    for trial in range(10):
        n = rng.randint(10, 40)
        page = generate_listing(5000 + trial, n, "monitors",
                                url=f"https://accept.test/{trial}")
        snapshot = store.ingest(page.html, page.url)
        cards = item_nodes(snapshot)
        first, second = sorted(rng.sample(range(n), 2))
        exemplars = [ElementSelection.of(snapshot, cards[first].node_id),
                     ElementSelection.of(snapshot, cards[second].node_id)]
        selector = generalize_selection(snapshot, exemplars)
        assert selector.match_count == n, f"page {trial}: match {selector.match_count} != {n}"
        selector = selector.with_fields(discover_fields(snapshot, selector))
        extracted = batch_extract(snapshot, selector, instance_id="T")
        assert len(extracted.rows) == n
        title_col = next(i for i, c in enumerate(extracted.columns)
                         if c.name == "Title")
        got_titles = [row[title_col].value for row in extracted.rows]
        assert got_titles == [item.title for item in page.items], \
            f"page {trial}: extracted rows diverge from ground truth"
    report("batch extraction recovery: 10/10 pages exact (n in [10, 40])")


# --- criterion 3: join oracle equivalence -----------------------------------

def _random_pair(rng):
    key_pool = [f"k{i}" for i in range(rng.randint(1, 10))]

    def build(prefix, rows_max):
        n_extra = rng.randint(0, 7)
        columns = [("k", "text")] + [
            (f"{prefix}{j}", rng.choice(["number", "text"]))
            for j in range(n_extra)]
        rows = []
        for _ in range(rng.randint(0, rows_max)):
            row = [rng.choice(key_pool + [None])]
            for _, kind in columns[1:]:
                if rng.random() < 0.15:
                    row.append(None)
                elif kind == "number":
                    row.append(float(rng.randint(0, 99)))
                else:
                    row.append(rng.choice("abcdef"))
            rows.append(row)
        return table(prefix, columns, rows), rows

    left, left_rows = build("L", 50)
    right, right_rows = build("R", 50)
    return left, left_rows, right, right_rows


def _oracle_join(left_rows, right_rows, right_width, strategy):
    def right_values(row):
        return tuple(v for i, v in enumerate(row) if i != 0)

    out = []
    if strategy == "union":
        left_width = len(left_rows[0]) if left_rows else 1
        for row in left_rows:
            out.append(tuple(row) + (None,) * (right_width - 1))
        for row in right_rows:
            padded = (row[0],) + (None,) * (left_width - 1) + right_values(row)
            out.append(padded)
        return sorted(out, key=repr)
    if strategy in ("inner", "left"):
        for lrow in left_rows:
            matches = [r for r in right_rows
                       if lrow[0] is not None and r[0] == lrow[0]]
            for rrow in matches:
                out.append(tuple(lrow) + right_values(rrow))
            if not matches and strategy == "left":
                out.append(tuple(lrow) + (None,) * (right_width - 1))
    else:
        left_width = len(left_rows[0]) if left_rows else 1
        for rrow in right_rows:
            matches = [l for l in left_rows
                       if rrow[0] is not None and l[0] == rrow[0]]
            for lrow in matches:
                out.append(tuple(lrow) + right_values(rrow))
            if not matches:
                empty = [None] * left_width
                empty[0] = rrow[0]
                out.append(tuple(empty) + right_values(rrow))
    return sorted(out, key=repr)


def test_join_oracle_equivalence():
    rng = random.Random(77)
    checked = 0
    for trial in range(100):
        left, left_rows, right, right_rows = _random_pair(rng)
        strategy = rng.choice(["inner", "left", "right", "union"])
        merged = merge_instances([left, right], strategy,
                                 None if strategy == "union" else ["k", "k"],
                                 "M")
        got = sorted((tuple(r) for r in grid(merged)), key=repr)
        expected = _oracle_join(left_rows, right_rows,
                                len(right.columns), strategy)
        assert got == expected, f"trial {trial} ({strategy}) diverged"
        checked += 1
    assert checked == 100
    report("join oracle equivalence: 100/100 random pairs, all strategies")


# --- criterion 4: plan atomicity --------------------------------------------

def _atomicity_env():
    clock = ScriptedClock(1000.0)
    ws = Workspace("w")
    ws.create_instance(table(
        "T1", [("Name", "text"), ("Price", "text"), ("Qty", "number")],
        [["Sponsored A", "$10", 1.0], ["B", "$20", None],
         ["C", "N/A", 3.0], ["D", "$40", 4.0]]))
    ws.create_instance(table(
        "T2", [("Name", "text"), ("Price", "text"), ("Qty", "number")],
        [["C", "$7", 2.0], ["D", "$9", 5.0]]))
    return GuidanceEngine(ws, SnapshotStore(), EngineConfig(), clock)


def _atomicity_plans():
    def call(tool, **args):
        return make_call(tool, args)

    plans = [
        [call("tableSort", instanceId="T1", columnName="Qty", order="asc"),
         call("tableSort", instanceId="T1", columnName="Name", order="desc")],
        [call("searchAndReplace", instanceId="T1", searchPattern="Sponsored ",
              replaceWith=""),
         call("convertColumnType", instanceId="T1", columnName="Price",
              targetType="number")],
        [call("convertColumnType", instanceId="T1", columnName="Price",
              targetType="number"),
         call("fillMissingValues", instanceId="T1", columnName="Price",
              strategy="mean"),
         call("tableSort", instanceId="T1", columnName="Price", order="desc")],
        [call("renameColumn", instanceId="T1", oldColumnName="Qty",
              newColumnName="Quantity"),
         call("addComputedColumn", instanceId="T1", formula="Quantity * 2",
              newColumnName="Double")],
        [call("mergeInstances", sourceInstanceIds=["T1", "T2"],
              mergeStrategy="union", newInstanceName="Both"),
         call("tableSort", instanceId="T1", columnName="Name", order="asc")],
        [call("mergeInstances", sourceInstanceIds=["T1", "T2"],
              mergeStrategy="inner", joinColumns=["Name", "Name"],
              newInstanceName="Joined"),
         call("positionalTransform", instanceId="T1", op="delete-rows",
              indices=[0])],
        [call("fillMissingValues", instanceId="T1", columnName="Qty",
              strategy="median"),
         call("aggregateTable", instanceId="T1", groupBy=["Name"],
              aggregations=[{"column": "Qty", "fn": "sum"}])],
        [call("addComputedColumn", instanceId="T2", formula="Qty + 1",
              newColumnName="QtyPlus"),
         call("createVisualization", sourceInstanceId="T2", chartType="bar",
              xAxis="Name", yAxis="QtyPlus")],
        [call("reshapeTable", instanceId="T2", direction="fold",
              keyColumns=["Name"], valueColumns=["Price", "Qty"])],
        [call("editCells", instanceId="T2",
              edits=[{"row": 0, "col": 0, "value": {"t": "text", "v": "Z"}}]),
         call("tableSort", instanceId="T2", columnName="Name", order="asc"),
         call("tableFilter", instanceId="T2",
              conditions=[{"column": "Name", "comparator": "contains",
                           "operand": "Z"}], operator="and")],
    ]
    variants = []
    for steps in plans:
        variants.append(steps)
        variants.append([call("tableSort", instanceId="T2",
                              columnName="Qty", order="desc")] + steps)
    return variants[:20]


def test_plan_atomicity():
    plans = _atomicity_plans()
    assert len(plans) == 20
    cases = 0
    for plan_index, steps in enumerate(plans):
        for fail_at in range(len(steps)):
            engine = _atomicity_env()
            suggestion = engine._offer("macro", "joining-tables",
                                       f"plan {plan_index}",
                                       ToolPlan(tuple(steps)), 0.5, 0.0)
            assert suggestion is not None, f"plan {plan_index} failed simulation"
            before = engine.workspace.serialize()
            with pytest.raises(PlanFailure):
                engine.execute_plan(suggestion.id, fail_at_step=fail_at)
            assert engine.workspace.serialize() == before, \
                f"plan {plan_index} leaked state at step {fail_at}"
            cases += 1
        # and the un-faulted run succeeds
        engine = _atomicity_env()
        suggestion = engine._offer("macro", "joining-tables", "clean",
                                   ToolPlan(tuple(steps)), 0.5, 0.0)
        engine.execute_plan(suggestion.id)
    report(f"plan atomicity: {cases} injected failures across 20 plans, "
           f"all rolled back")


# --- criterion 5: idle gate ---------------------------------------------------

def test_idle_gate():
    rng = random.Random(55)
    for _ in range(1000):
        idle = rng.uniform(0.0, 10000.0)
        clock = ScriptedClock(0.0)
        ws = Workspace("w")
        engine = GuidanceEngine(ws, SnapshotStore(), EngineConfig(), clock)
        engine.record_event(InteractionEvent(
            0.0, "workspace-created", {"title": "Best Gear Deals"}))
        clock.advance(idle)
        produced = engine.generate_macro()
        if idle >= 5000.0:
            assert produced, f"gate closed at idle {idle:.1f}ms"
        else:
            assert produced == [], f"gate open at idle {idle:.1f}ms"
    report("idle gate: 1000 random durations, fires iff idle >= 5000 ms")


# --- criterion 6: context cap --------------------------------------------------

def test_context_cap():
    rng = random.Random(66)
    store = SnapshotStore()
    ws = Workspace("w")
    kinds = ["cell-edited", "sort-applied", "selection-made", "chat-sent"]
    for _ in range(1000):
        log = EventLog(15)
        now = 0.0
        for _ in range(rng.randint(0, 40)):
            now += rng.uniform(1.0, 50.0)
            log.record(InteractionEvent(now, rng.choice(kinds), {},
                                        major=rng.random() < 0.8))
        bundle = assemble_context(store, ws.current, Focus(), [], log)
        assert len(bundle.interaction_history) <= 15
    report("context cap: 1000 random event streams, history <= 15")


# --- criterion 7: fill-program consistency and minimality ----------------------

FILL_CORPUS = [
    # the canonical combining-first/last-name case
    [ex({"first": "John", "last": "Smith"}, "John Smith"),
     ex({"first": "Ada", "last": "Lovelace"}, "Ada Lovelace")],
    [ex({"first": "John", "last": "Smith"}, "Smith, John"),
     ex({"first": "Ada", "last": "Lovelace"}, "Lovelace, Ada")],
    [ex({"a": "x"}, "FLAG"), ex({"a": "y"}, "FLAG")],
    [ex({"p": "$1,299"}, "1299"), ex({"p": "$88"}, "88")],
    [ex({"p": "30%"}, "30"), ex({"p": "4%"}, "4")],
    [ex({"s": "ABC"}, "abc"), ex({"s": "DeF"}, "def")],
    [ex({"e": "ann@corp.test"}, "corp.test"),
     ex({"e": "bob@lab.example"}, "lab.example")],
    [ex({"e": "ann@corp.test"}, "ann"), ex({"e": "bob@lab.example"}, "bob")],
    [ex({"s": "Hello World"}, "Hello"), ex({"s": "Big Cat"}, "Big")],
    [ex({"s": "Hello World"}, "World"), ex({"s": "Big Cat"}, "Cat")],
    [ex({"s": "one-two-three"}, "two"), ex({"s": "a-b-c"}, "b")],
    [ex({"s": "one-two-three"}, "three"), ex({"s": "a-b"}, "b")],
    [ex({"n": "Jones"}, "Mr. Jones"), ex({"n": "Lin"}, "Mr. Lin")],
    [ex({"n": "file"}, "file.txt"), ex({"n": "notes"}, "notes.txt")],
    [ex({"a": "red", "b": "apple"}, "red-apple"),
     ex({"a": "big", "b": "cat"}, "big-cat")],
    [ex({"t": "key: value"}, "key"), ex({"t": "name: thing"}, "name")],
    [ex({"t": "key: value"}, " value"), ex({"t": "name: thing"}, " thing")],
    [ex({"s": "a b"}, "ab"), ex({"s": " xy z"}, "xyz")],
    [ex({"s": "MiXeD"}, "mixed"), ex({"s": "CASE"}, "case")],
    [ex({"c": "x"}, "x"), ex({"c": "yy"}, "yy")],
    [ex({"c": "x"}, "xx"), ex({"c": "ab"}, "abab")],
    [ex({"u": "u1", "v": "v1"}, "u1/v1"), ex({"u": "q", "v": "r"}, "q/r")],
    [ex({"s": "#42"}, "42"), ex({"s": "#7"}, "7")],
    [ex({"s": "(555) 123"}, "555 123"), ex({"s": "(44) 9"}, "44 9")],
    [ex({"w": "alpha"}, "alpha!"), ex({"w": "beta"}, "beta!")],
    [ex({"city": "Hong Kong, HK"}, "Hong Kong"),
     ex({"city": "Paris, FR"}, "Paris")],
    [ex({"a": "1", "b": "2"}, "1+2"), ex({"a": "x", "b": "y"}, "x+y")],
    [ex({"s": "AB-cd"}, "ab-cd"), ex({"s": "Xy-ZZ"}, "xy-zz")],
    [ex({"p": "US$30"}, "30"), ex({"p": "US$450"}, "450")],
    [ex({"first": "John", "mid": "Q", "last": "Smith"}, "John Q Smith"),
     ex({"first": "Ada", "mid": "B", "last": "Lovelace"}, "Ada B Lovelace")],
]


def test_fill_program_consistency_and_minimality():
    assert len(FILL_CORPUS) == 30
    for index, examples in enumerate(FILL_CORPUS):
        program = infer_fill_program(examples)
        assert program is not None, f"case {index}: no program found"
        rows = [row for row, _ in examples]
        outputs = [out for _, out in examples]
        assert apply_fill_program(program, rows) == outputs, \
            f"case {index}: program does not reproduce the examples"
        oracle = oracle_min_length(examples, limit=3)
        if oracle is not None:
            assert len(program.steps) == oracle, \
                f"case {index}: found length {len(program.steps)}, " \
                f"oracle says {oracle}"
        else:
            assert len(program.steps) > 3
    report("fill-program consistency and minimality: 30/30 cases, "
           "exhaustive check to length 3")


# --- criterion 8: scenario golden run ------------------------------------------

def test_scenario_golden_run(tmp_path):
    task = load_task(BENCH / "tasks" / "h1-camera-scenario.json")
    hashes = []
    final = None
    for run in range(5):
        reeport = replay_task(task, out_dir=tmp_path / f"run{run}")
        hashes.append(reeport.final_state_hash)
        final = reeport
    assert len(set(hashes)) == 1, f"unstable hashes: {hashes}"

    workspace = json.loads((tmp_path / "run0" / "workspace.json").read_text())
    instances = {i["id"]: i for i in workspace["instances"]}
    combined = instances["Combined_Camera_Data"]
    t1, t2 = instances["Table1"], instances["Table2"]
    assert len(combined["rows"]) == len(t1["rows"]) + len(t2["rows"])
    title_col = next(i for i, c in enumerate(combined["columns"])
                     if c["name"] == "Product Title")
    combined_titles = {row[title_col]["v"] for row in combined["rows"]}
    for source in (t1, t2):
        source_col = next(i for i, c in enumerate(source["columns"])
                          if c["name"] == "Product Title")
        for row in source["rows"]:
            assert row[source_col]["v"] in combined_titles

    viz = instances["Visualization1"]
    assert viz["chart_type"] == "scatter"
    encodings = dict(viz["encodings"])
    assert encodings == {"x": "Price", "y": "User Rating",
                         "color": "Resolution"}
    report(f"scenario golden run: merged {len(combined['rows'])} rows, "
           f"scatter x=Price y=User Rating color=Resolution, "
           f"hash stable across 5 runs")


# --- criterion 9: difficulty classifier -----------------------------------------

def test_difficulty_classifier():
    tasks = load_manifest(BENCH / "manifest.json")
    got = [classify_difficulty(t.criteria) for t in tasks]
    assert got.count("Easy") == 4 and got.count("Medium") == 4 \
        and got.count("Hard") == 2
    for flags in itertools.product([False, True], repeat=3):
        criteria = dict(zip(("multi_page", "transform_ops_gt_5", "needs_viz"),
                            flags))
        count = sum(flags)
        expected = "Easy" if count == 0 else ("Hard" if count == 3 else "Medium")
        assert classify_difficulty(criteria) == expected
    report("difficulty classifier: bundled manifest + all 8 flag combinations")


# --- criterion 10: timeline merge ------------------------------------------------

def test_timeline_merge_oracle():
    rng = random.Random(10)
    threshold = 90000.0
    for _ in range(100):
        now = 0.0
        events = []
        for _ in range(rng.randint(0, 60)):
            now += rng.choice([500.0, 30000.0, 89999.0, 90000.0, 90001.0,
                               150000.0])
            events.append({"timestamp": now,
                           "category": rng.choice(["in-situ", "peripheral",
                                                   "chat", "manual"])})
        got = [(b.category, b.start, b.end, b.count)
               for b in merge_timeline(events, threshold)]
        # independent linear scan
        expected = []
        index = 0
        while index < len(events):
            category = events[index]["category"]
            start = end = events[index]["timestamp"]
            count = 1
            index += 1
            while index < len(events) and \
                    events[index]["category"] == category and \
                    events[index]["timestamp"] - end <= threshold:
                end = events[index]["timestamp"]
                count += 1
                index += 1
            expected.append((category, start, end, count))
        assert got == expected
    report("timeline merge: 100 random streams match the linear-scan oracle "
           "at 90000 ms")


# --- criterion 11: pipeline latency + summary arithmetic -------------------------

def test_pipeline_latency_and_summary_arithmetic(tmp_path):
    # live accuracy/latency figures are provider- and judge-dependent and are
    # not targets; the substitute is the scripted pipeline's cycle time
    task = load_task(BENCH / "tasks" / "m1-monitors-merge.json")
    from databoard.harness.replay import ScriptedUser, TaskReplayer
    replayer = TaskReplayer(task)
    replayer.run(ScriptedUser(task.driver_script[:-1]))   # leave a rich state
    session = replayer.session
    cycle_times = []
    for _ in range(20):
        session.clock.advance(6000)
        started = time.perf_counter()
        session.tick()
        cycle_times.append((time.perf_counter() - started) * 1000.0)
    worst = max(cycle_times)
    assert worst < 200.0, f"evaluation cycle took {worst:.1f} ms"

    from databoard.harness.summarize import summarize_runs
    reports = [{
        "task_id": "synthetic", "difficulty": "Easy",
        "guidance": [{"guidance_type": "in-situ", "latency_ms": 2.0,
                      "description": "d", "pre_state_hash": "h",
                      "applied": True} for _ in range(4)],
    }]
    labels = [
        {"run": "synthetic", "item": 0, "labeler1": "correct", "labeler2": "correct"},
        {"run": "synthetic", "item": 1, "labeler1": "correct", "labeler2": "incorrect"},
        {"run": "synthetic", "item": 2, "labeler1": "not-sure", "labeler2": "correct"},
        {"run": "synthetic", "item": 3, "labeler1": "incorrect", "labeler2": "incorrect"},
    ]
    summary = summarize_runs(reports, labels)
    row = next(r for r in summary["rows"] if r["guidance_type"] == "in-situ")
    assert row["accuracy"] == pytest.approx((1.0 + 0.5 + 0.0) / 3)
    assert row["labeled_items"] == 3
    report(f"scripted pipeline latency: worst cycle {worst:.1f} ms < 200 ms; "
           "summary arithmetic reproduces partial credit and exclusion")
