import pytest

from databoard.catalog import make_call
from databoard.clock import ScriptedClock
from databoard.config import EngineConfig
from databoard.errors import PlanFailure, StaleSuggestion
from databoard.events import InteractionEvent
from databoard.extraction import SnapshotStore
from databoard.guidance import Focus, GuidanceEngine
from databoard.suggestions import (APPLIED, DISMISSED, HELD, STALE, WITHDRAWN,
                                   ToolPlan, new_suggestion)
from databoard.workspace import Workspace

from conftest import table


def sort_plan(instance="T", column="n"):
    return ToolPlan((make_call("tableSort", {"instanceId": instance,
                                             "columnName": column,
                                             "order": "asc"}),))


@pytest.fixture
def engine():
    clock = ScriptedClock(1000.0)
    ws = Workspace("w")
    ws.create_instance(table("T", [("n", "number")], [[2.0], [1.0], [3.0]]))
    engine = GuidanceEngine(ws, SnapshotStore(), EngineConfig(), clock)
    engine.clock_handle = clock
    return engine


def offer(engine, plan=None, scope="macro", rule="joining-tables",
          confidence=0.5, ghost=None):
    suggestion = engine._offer(scope, rule, "test suggestion",
                               plan or sort_plan(), confidence,
                               engine.clock.now(), ghost)
    assert suggestion is not None
    return suggestion


class TestEventLog:
    def test_context_caps_at_fifteen_major(self, engine):
        for i in range(20):
            engine.record_event(InteractionEvent(2000.0 + i, "cell-edited",
                                                 {"n": i}))
        slice_ = engine.log.context_slice()
        assert len(slice_) == 15
        assert slice_[0].payload["n"] == 5

    def test_minor_events_excluded_from_context(self, engine):
        engine.record_event(InteractionEvent(2000.0, "cell-edited", {}))
        engine.record_event(InteractionEvent(2001.0, "selection-made", {},
                                             major=False))
        assert len(engine.log.context_slice()) == 1
        assert len(engine.log.all_events()) == 2

    def test_clock_regression_rejected(self, engine):
        from databoard.errors import ClockRegression
        engine.record_event(InteractionEvent(2000.0, "cell-edited", {}))
        with pytest.raises(ClockRegression):
            engine.record_event(InteractionEvent(1999.0, "cell-edited", {}))


class TestIdleGate:
    def test_closed_below_threshold(self, engine):
        engine.record_event(InteractionEvent(engine.clock.now(),
                                             "workspace-created",
                                             {"title": "Best Gear Deals"}))
        engine.clock_handle.advance(3000)
        assert engine.generate_macro() == []

    def test_open_at_threshold(self, engine):
        # an empty workspace plus a goal title fires the discovery rule
        ws = Workspace("w")
        clock = ScriptedClock(1000.0)
        fresh = GuidanceEngine(ws, SnapshotStore(), EngineConfig(), clock)
        fresh.record_event(InteractionEvent(clock.now(), "workspace-created",
                                            {"title": "Best Gear Deals"}))
        clock.advance(5000)
        produced = fresh.generate_macro()
        assert [s.trigger_rule for s in produced] == ["webpage-suggestion"]


class TestMicroGating:
    def test_editor_focus_required(self, engine):
        payload = {"instance_id": "T", "column": "n", "missing_count": 2}
        in_editor = Focus("table-editor", "T")
        on_canvas = Focus("canvas")
        engine.workspace.create_instance(
            table("F", [("m", "number")], [[1.0], [None], [None]]))
        fill_payload = {"instance_id": "F", "column": "m", "missing_count": 2}
        assert engine.generate_micro("fill-missing", fill_payload, on_canvas) is None
        suggestion = engine.generate_micro("fill-missing", fill_payload, in_editor)
        assert suggestion is not None
        assert suggestion.modality == "in-situ"
        del payload


class TestRanking:
    def test_confidence_then_recency_then_id(self, engine):
        low = offer(engine, confidence=0.4)
        engine.clock_handle.advance(100)
        tied = offer(engine, rule="fill-missing",
                     plan=sort_plan(column="n"), confidence=0.4)
        high = offer(engine, rule="auto-viz",
                     plan=ToolPlan((make_call("createVisualization",
                                              {"sourceInstanceId": "T",
                                               "chartType": "histogram",
                                               "xAxis": "n"}),)),
                     confidence=0.9)
        published = engine.rank_and_publish()
        assert [s.id for s in published] == [high.id, tied.id, low.id]

    def test_order_is_non_increasing_confidence(self, engine):
        for confidence, rule in ((0.2, "fill-missing"), (0.9, "auto-viz"),
                                 (0.5, "joining-tables")):
            plan = ToolPlan((make_call("tableSort",
                                       {"instanceId": "T", "columnName": "n",
                                        "order": "desc" if confidence > 0.4 else "asc"}),
                             make_call("tableSort",
                                       {"instanceId": "T", "columnName": "n",
                                        "order": "asc"}),)) \
                if confidence == 0.5 else sort_plan()
            engine._offer("macro", rule, f"s{confidence}", plan, confidence,
                          engine.clock.now())
        published = engine.rank_and_publish()
        confidences = [s.confidence for s in published]
        assert confidences == sorted(confidences, reverse=True)


class TestInvalidation:
    def test_intent_change_clears_peripheral(self, engine):
        suggestion = offer(engine)
        engine.rank_and_publish()
        engine.invalidate("intent-change")
        assert engine.suggestions[suggestion.id].status == DISMISSED
        assert engine.peripheral_order == []

    def test_typing_withdraws_in_situ_on_target(self, engine):
        suggestion = engine._offer("micro", "autocomplete", "ghost",
                                   sort_plan(), 0.8, 0.0,
                                   {"instance_id": "T", "cells": {}})
        engine.invalidate("user-edit-conflict", {"instance_id": "T"})
        assert engine.suggestions[suggestion.id].status == WITHDRAWN

    def test_version_advance_marks_stale(self, engine, executor):
        suggestion = offer(engine)
        engine.workspace.apply_versioned(
            engine.workspace.current_version_id,
            make_call("tableSort", {"instanceId": "T", "columnName": "n",
                                    "order": "desc"}), executor)
        engine.invalidate("version-advance")
        assert engine.suggestions[suggestion.id].status == STALE

    def test_offscreen_plan_is_held_for_permission(self, engine):
        engine.invalidate("viewport", {"visible": []})
        suggestion = offer(engine)
        assert suggestion.status == HELD
        assert suggestion.needs_navigation

    def test_no_active_suggestions_noop(self, engine):
        engine.invalidate("user-edit-conflict", {"instance_id": "T"})


class TestExecutePlan:
    def test_two_step_plan_keeps_originals(self, engine):
        engine.workspace.create_instance(
            table("U", [("n", "number")], [[1.0], [2.0]]))
        plan = ToolPlan((
            make_call("formatColumn", {"instanceId": "T", "columnName": "n",
                                       "formatPattern": "trim"}),
            make_call("mergeInstances", {"sourceInstanceIds": ["T", "U"],
                                         "mergeStrategy": "union",
                                         "newInstanceName": "Merged"}),
        ))
        # formatColumn on a number column fails validation, so simulation
        # rejects the plan: use a valid two-step plan instead
        plan = ToolPlan((
            make_call("tableSort", {"instanceId": "T", "columnName": "n",
                                    "order": "asc"}),
            make_call("mergeInstances", {"sourceInstanceIds": ["T", "U"],
                                         "mergeStrategy": "union",
                                         "newInstanceName": "Merged"}),
        ))
        suggestion = offer(engine, plan=plan)
        version = engine.execute_plan(suggestion.id)
        assert set(version.instances) == {"T", "U", "Merged"}
        assert engine.suggestions[suggestion.id].status == APPLIED

    def test_injected_failure_rolls_back(self, engine):
        before = engine.workspace.serialize()
        plan = ToolPlan((sort_plan().steps[0],
                         make_call("tableSort", {"instanceId": "T",
                                                 "columnName": "n",
                                                 "order": "desc"})))
        suggestion = offer(engine, plan=plan)
        with pytest.raises(PlanFailure) as info:
            engine.execute_plan(suggestion.id, fail_at_step=1)
        assert info.value.step == 1
        assert engine.workspace.serialize() == before

    def test_stale_suggestion_never_mutates(self, engine, executor):
        suggestion = offer(engine)
        engine.workspace.apply_versioned(
            engine.workspace.current_version_id,
            make_call("tableSort", {"instanceId": "T", "columnName": "n",
                                    "order": "desc"}), executor)
        before = engine.workspace.serialize()
        with pytest.raises(StaleSuggestion):
            engine.execute_plan(suggestion.id)
        assert engine.workspace.serialize() == before

    def test_idempotent_reapplication(self, engine):
        suggestion = offer(engine)
        first = engine.execute_plan(suggestion.id)
        second = engine.execute_plan(suggestion.id)
        assert first.version_id == second.version_id

    def test_invalid_plans_are_never_offered(self, engine):
        bad = ToolPlan((make_call("tableSort", {"instanceId": "nope",
                                                "columnName": "n",
                                                "order": "asc"}),))
        assert engine._offer("macro", "joining-tables", "bad", bad, 0.5, 0.0) is None

    def test_dismissed_signature_not_reoffered(self, engine):
        suggestion = offer(engine)
        engine.dismiss(suggestion.id)
        assert engine._offer("macro", suggestion.trigger_rule,
                             suggestion.description, suggestion.plan,
                             suggestion.confidence, 0.0) is None
