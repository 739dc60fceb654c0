"""The mixed-initiative guidance engine.

Consumes interaction events, evaluates the trigger rules, builds micro
(in-situ) and macro (peripheral) suggestions, enforces the user-centered
policies (conflict avoidance, viewport respect, relevance), and executes
accepted composite plans atomically.

Generation discipline:
  * micro suggestions are built only while the user is inside an editor;
  * macro suggestions are built only after the idle threshold has elapsed
    since the last major event;
  * every plan is dry-run against the current version before being offered,
    so rendered steps are always truthful;
  * a suggestion built at version v can never mutate a later version.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from urllib.parse import quote_plus

from .catalog import ToolCall, ToolExecutor, make_call
from .cells import NUMBER, TEXT, Cell, normalize_currency_text
from .clock import SystemClock
from .config import EngineConfig
from .errors import (BadArgument, EngineError, PlanFailure, ProviderError,
                     StaleSuggestion, UnknownSuggestion)
from .events import EventLog, InteractionEvent
from .extraction import (GeneralizedSelector, SnapshotStore, container_selector,
                         discover_fields, match_selector, relative_path,
                         resolve_path)
from .fillprog import FillProgram
from .instances import canonical_json
from .suggestions import (APPLIED, DISMISSED, HELD, IN_SITU, MACRO, MICRO,
                          OFFERED, PERIPHERAL, STALE, WITHDRAWN, Suggestion,
                          ToolPlan, new_suggestion)
from .triggers import RULE_SCOPES, TriggerContext, evaluate_triggers
from .workspace import Workspace, WorkspaceVersion


@dataclass
class Focus:
    view: str = "canvas"            # canvas | table-editor | viz-editor | page
    instance_id: str | None = None
    tab_url: str | None = None

    @property
    def in_editor(self) -> bool:
        return self.view.endswith("-editor")

    def to_json(self) -> dict:
        return {"view": self.view, "instance_id": self.instance_id,
                "tab_url": self.tab_url}


def simulate_plan(version: WorkspaceVersion, plan: ToolPlan, executor: ToolExecutor) -> None:
    """Dry-run every step against a scratch chain; raises on the first bad step."""
    scratch = version
    for index, call in enumerate(plan.steps):
        try:
            instances = executor(scratch, call)
        except EngineError as exc:
            raise PlanFailure(index, exc) from exc
        scratch = WorkspaceVersion(scratch.version_id + 1, scratch.version_id, instances)


class GuidanceEngine:
    def __init__(self, workspace: Workspace, store: SnapshotStore,
                 config: EngineConfig | None = None, clock=None, planner=None):
        self.workspace = workspace
        self.store = store
        self.config = config or EngineConfig()
        self.clock = clock or SystemClock()
        self.planner = planner          # optional: plan_for_trigger(rule, payload, version)
        self.log = EventLog(self.config.context_event_cap)
        self.executor = ToolExecutor(store)
        self.suggestions: dict[str, Suggestion] = {}
        self.peripheral_order: list[str] = []
        self.session_rules: list[dict] = []       # reusable sort/filter rules
        self.viewport: set[str] | None = None     # None = everything visible
        self._applied_versions: dict[str, int] = {}
        self._retired_signatures: set[str] = set()
        self._start_time = self.clock.now()

    # --- events ---

    def record_event(self, event: InteractionEvent) -> None:
        self.log.record(event)

    def idle_ms(self) -> float:
        last = self.log.last_major()
        anchor = last.timestamp if last is not None else self._start_time
        return self.clock.now() - anchor

    # --- trigger evaluation ---

    def trigger_context(self) -> TriggerContext:
        return TriggerContext(self.log, self.workspace.current, self.store,
                              self.workspace.title, self.config)

    def evaluate(self) -> list[tuple[str, dict]]:
        return evaluate_triggers(self.trigger_context())

    # --- suggestion generation ---

    def _signature(self, rule: str, plan: ToolPlan, scope: str) -> str:
        return canonical_json({"rule": rule, "scope": scope,
                               "steps": [[c.tool_name, c.args] for c in plan.steps]})

    def _already_active(self, signature: str) -> bool:
        if signature in self._retired_signatures:
            return True
        for suggestion in self.suggestions.values():
            if suggestion.status in (OFFERED, HELD) and \
                    suggestion.base_version == self.workspace.current_version_id and \
                    self._signature(suggestion.trigger_rule, suggestion.plan,
                                    suggestion.scope) == signature:
                return True
        return False

    def _offer(self, scope: str, rule: str, description: str, plan: ToolPlan,
               confidence: float, recency: float, ghost: dict | None = None
               ) -> Suggestion | None:
        try:
            simulate_plan(self.workspace.current, plan, self.executor)
        except EngineError:
            return None           # invalid plans are never shown
        signature = self._signature(rule, plan, scope)
        if self._already_active(signature):
            return None
        suggestion = new_suggestion(scope, rule, description, plan, confidence,
                                    self.workspace.current_version_id, recency, ghost)
        if scope == MACRO and self.viewport is not None:
            off_screen = plan.touched_instance_ids() - self.viewport
            if off_screen:
                # never touch artifacts outside the viewport unprompted
                suggestion = replace(suggestion, status=HELD, needs_navigation=True)
        self.suggestions[suggestion.id] = suggestion
        return suggestion

    def generate_micro(self, rule: str, payload: dict, focus: Focus) -> Suggestion | None:
        if not focus.in_editor:
            return None
        if "micro" not in RULE_SCOPES[rule]:
            return None
        built = self._build_plan(rule, payload, micro=True)
        if built is None:
            return None
        description, plan, ghost = built
        confidence = self.config.rule_confidence.get(rule, 0.5)
        recency = self._last_event_time()
        return self._offer(MICRO, rule, description, plan, confidence, recency, ghost)

    def generate_macro(self) -> list[Suggestion]:
        if self.idle_ms() < self.config.idle_threshold_ms:
            return []
        version = self.workspace.current
        produced = []
        for rule, payload in self.evaluate():
            if "macro" not in RULE_SCOPES[rule]:
                continue
            plan_conf = None
            if self.planner is not None:
                try:
                    plan_conf = self.planner.plan_for_trigger(rule, payload, version)
                except ProviderError:
                    plan_conf = None    # degrade to the rule template
            if plan_conf is None:
                built = self._build_plan(rule, payload, micro=False)
                if built is None:
                    continue
                description, plan, _ = built
                confidence = self.config.rule_confidence.get(rule, 0.5)
            else:
                plan, confidence, description = plan_conf
            suggestion = self._offer(MACRO, rule, description, plan,
                                     confidence, self._last_event_time())
            if suggestion is not None:
                produced.append(suggestion)
        return produced

    def _last_event_time(self) -> float:
        last = self.log.last_major()
        return last.timestamp if last else self._start_time

    # --- ranking / publication ---

    def rank_and_publish(self) -> list[Suggestion]:
        """Peripheral list ordered by confidence desc, then trigger recency,
        then id; replaces the previous published order."""
        offered = [s for s in self.suggestions.values()
                   if s.modality == PERIPHERAL and s.status in (OFFERED, HELD)]
        offered.sort(key=lambda s: (-s.confidence, -s.trigger_recency, s.id))
        self.peripheral_order = [s.id for s in offered]
        return offered

    def active_micro(self) -> list[Suggestion]:
        return [s for s in self.suggestions.values()
                if s.modality == IN_SITU and s.status == OFFERED]

    def evaluation_cycle(self, focus: Focus) -> dict:
        """One full proactive pass: triggers, micro, macro, publication."""
        fired = self.evaluate()
        micro = []
        if focus.in_editor:
            for rule, payload in fired:
                if "micro" in RULE_SCOPES[rule]:
                    suggestion = self.generate_micro(rule, payload, focus)
                    if suggestion is not None:
                        micro.append(suggestion)
        macro = self.generate_macro()
        published = self.rank_and_publish()
        return {"fired": fired, "micro": micro, "macro": macro, "published": published}

    # --- invalidation (user-centered policies) ---

    def invalidate(self, cause: str, payload: dict | None = None) -> None:
        payload = payload or {}
        if cause == "user-edit-conflict":
            target = payload.get("instance_id")
            for sid, suggestion in list(self.suggestions.items()):
                if suggestion.status != OFFERED or suggestion.modality != IN_SITU:
                    continue
                ghost_target = (suggestion.ghost_diff or {}).get("instance_id")
                if ghost_target == target or target is None:
                    self.suggestions[sid] = suggestion.with_status(WITHDRAWN)
        elif cause == "version-advance":
            current = self.workspace.current_version_id
            for sid, suggestion in list(self.suggestions.items()):
                if suggestion.status in (OFFERED, HELD) and suggestion.base_version < current:
                    self.suggestions[sid] = suggestion.with_status(STALE)
        elif cause == "viewport":
            visible = set(payload.get("visible", []))
            self.viewport = visible
            for sid, suggestion in list(self.suggestions.items()):
                if suggestion.status != OFFERED or suggestion.modality != PERIPHERAL:
                    continue
                if suggestion.plan.touched_instance_ids() - visible:
                    self.suggestions[sid] = replace(suggestion, status=HELD,
                                                    needs_navigation=True)
        elif cause == "intent-change":
            # a fresh command supersedes older peripheral guidance
            for sid, suggestion in list(self.suggestions.items()):
                if suggestion.modality == PERIPHERAL and suggestion.status in (OFFERED, HELD):
                    self.suggestions[sid] = suggestion.with_status(DISMISSED)
            self.peripheral_order = []
        else:
            raise BadArgument(f"unknown invalidation cause {cause!r}")

    def dismiss(self, suggestion_id: str) -> None:
        suggestion = self._get(suggestion_id)
        self.suggestions[suggestion_id] = suggestion.with_status(DISMISSED)
        self._retired_signatures.add(
            self._signature(suggestion.trigger_rule, suggestion.plan, suggestion.scope))

    def _get(self, suggestion_id: str) -> Suggestion:
        if suggestion_id not in self.suggestions:
            raise UnknownSuggestion(f"no suggestion {suggestion_id!r}")
        return self.suggestions[suggestion_id]

    # --- execution ---

    def execute_plan(self, suggestion_id: str, fail_at_step: int | None = None):
        """Apply an accepted suggestion's plan atomically.

        Applying the same suggestion twice is idempotent and returns the
        version the first application produced. `fail_at_step` is the fault
        hook the atomicity tests drive.
        """
        suggestion = self._get(suggestion_id)
        if suggestion_id in self._applied_versions:
            return self.workspace.version(self._applied_versions[suggestion_id])
        if suggestion.status == STALE or \
                suggestion.base_version != self.workspace.current_version_id:
            self.suggestions[suggestion_id] = suggestion.with_status(STALE)
            raise StaleSuggestion(
                f"suggestion {suggestion_id} was built at version "
                f"{suggestion.base_version}, current is {self.workspace.current_version_id}")

        executor = self.executor
        if fail_at_step is not None:
            base_executor = self.executor

            def executor(version, call, _fail=fail_at_step, _counter=[0]):
                index = _counter[0]
                _counter[0] += 1
                if index == _fail:
                    raise BadArgument(f"injected failure at step {index}")
                return base_executor(version, call)

        versions = self.workspace.apply_plan(
            suggestion.base_version, list(suggestion.plan.steps), executor)
        final = versions[-1]
        self.suggestions[suggestion_id] = suggestion.with_status(APPLIED)
        self._applied_versions[suggestion_id] = final.version_id
        self._retired_signatures.add(
            self._signature(suggestion.trigger_rule, suggestion.plan, suggestion.scope))
        self.invalidate("version-advance")
        return final

    def applied_version_id(self, suggestion_id: str) -> int | None:
        return self._applied_versions.get(suggestion_id)

    # --- template plan builders ---

    def _build_plan(self, rule: str, payload: dict, micro: bool
                    ) -> tuple[str, ToolPlan, dict | None] | None:
        builder = getattr(self, "_plan_" + rule.replace("-", "_"), None)
        if builder is None:
            return None
        return builder(payload, micro)

    def _plan_webpage_suggestion(self, payload, micro):
        title = payload["title"]
        url = "https://duckduckgo.com/?q=" + quote_plus(title)
        plan = ToolPlan((make_call("openPage", {
            "url": url, "description": f"Search results for {title!r}"}),))
        return (f"To help with '{title}', open a search for relevant pages",
                plan, None)

    def _plan_element_selection(self, payload, micro):
        plan = ToolPlan((make_call("selectElements", {
            "selector": payload["selector"], "pageUrl": payload["url"]}),))
        description = f"Select all ({payload['match_count']}) matching items?"
        ghost = {"snapshot_id": payload["snapshot_id"],
                 "match_count": payload["match_count"]}
        return description, plan, ghost

    def _plan_schema_inference(self, payload, micro):
        table = self.workspace.current.instances.get(payload["instance_id"])
        if table is None or table.kind != "table":
            return None
        proposals = _propose_headers(table)
        steps = tuple(
            make_call("renameColumn", {"instanceId": table.id,
                                       "oldColumnName": old, "newColumnName": new})
            for old, new in proposals.items() if old != new)
        if not steps:
            return None
        ghost = {"instance_id": table.id, "headers": proposals}
        return "Name the new columns from their content", ToolPlan(steps), ghost

    def _plan_batch_extraction(self, payload, micro):
        table_id = payload.get("instance_id")
        selector = GeneralizedSelector.from_json(payload["selector"])
        snapshot = self.store.get(payload["snapshot_id"])
        table = self.workspace.current.instances.get(table_id) if table_id else None
        if table is not None and table.kind == "table" and table.rows:
            return self._batch_completion_for_table(snapshot, selector, table, payload)
        # no target table yet: extract into a new instance
        card_selector = container_selector(selector)
        if not card_selector.field_paths:
            card_selector = card_selector.with_fields(
                discover_fields(snapshot, card_selector))
        plan = ToolPlan((make_call("extractBatch", {
            "pageUrl": snapshot.url, "pattern": card_selector.to_json(),
            "newInstanceName": "Extracted"}),))
        return (f"Extract all ({payload['match_count']}) rows?", plan,
                {"match_count": payload["match_count"]})

    def _batch_completion_for_table(self, snapshot, selector, table, payload):
        """Ghost-complete an existing table using its captured provenance."""
        containers = match_selector(snapshot, container_selector(selector))
        container_ids = {c.node_id: c for c in containers}

        def container_of(node):
            cursor = node
            while cursor is not None:
                if cursor.node_id in container_ids:
                    return cursor
                cursor = cursor.parent
            return None

        field_paths = []
        for col in range(len(table.columns)):
            ref = table.provenance[0][col]
            if ref is None or ref.snapshot_id != snapshot.snapshot_id:
                return None
            node = snapshot.dom.node(ref.node_id)
            container = container_of(node) if node is not None else None
            if container is None:
                return None
            field_paths.append(relative_path(container, node))

        captured = set()
        for prow in table.provenance:
            for ref in prow:
                if ref is not None:
                    node = snapshot.dom.node(ref.node_id)
                    container = container_of(node) if node else None
                    if container is not None:
                        captured.add(container.node_id)
        remaining = [c for c in containers if c.node_id not in captured]
        if not remaining:
            return None
        take = remaining[:self.config.ghost_rows_per_round]
        from .extraction import capture_element
        edits = []
        added_rows = []
        next_row = len(table.rows)
        for container in take:
            row_cells = []
            for col, path in enumerate(field_paths):
                node = resolve_path(container, path)
                if node is None:
                    cell, ref = Cell.missing(), None
                else:
                    cell, ref = capture_element(snapshot, node.node_id)
                edit = {"row": next_row, "col": col, "value": cell.to_json()}
                if ref is not None:
                    edit["sourceRef"] = ref.to_json()
                edits.append(edit)
                row_cells.append(cell.to_json())
            added_rows.append(row_cells)
            next_row += 1
        plan = ToolPlan((make_call("editCells", {
            "instanceId": table.id, "edits": edits}),))
        # the selector rides along so acceptance can cue the next round and
        # the UI can highlight the remaining matched items
        ghost = {"instance_id": table.id, "added_rows": added_rows,
                 "start_row": len(table.rows), "selector": selector.to_json(),
                 "snapshot_id": snapshot.snapshot_id,
                 "match_count": payload["match_count"]}
        description = (f"Extract all ({payload['match_count']}) rows? "
                       f"Adding {len(take)} now")
        return description, plan, ghost

    def _plan_autocomplete(self, payload, micro):
        table = self.workspace.current.instances.get(payload["instance_id"])
        if table is None or table.kind != "table":
            return None
        program = FillProgram.from_json(payload["program"])
        col_idx = table.column_index(payload["column"])
        remaining = payload["remaining_rows"][:self.config.ghost_rows_per_round]
        edits = []
        ghost_cells = {}
        for row_idx in remaining:
            row = {c.name: cell for c, cell in zip(table.columns, table.rows[row_idx])
                   if c.name != payload["column"]}
            result = program.run_row(
                {k: v.render() for k, v in row.items() if not v.is_missing})
            cell = Cell.missing() if result is None else Cell.text(result)
            edits.append({"row": row_idx, "col": col_idx, "value": cell.to_json()})
            ghost_cells[str(row_idx)] = cell.to_json()
        if not edits:
            return None
        plan = ToolPlan((make_call("editCells", {
            "instanceId": table.id, "edits": edits}),))
        ghost = {"instance_id": table.id, "column": payload["column"],
                 "cells": ghost_cells, "program": payload["rendered"]}
        return (f"Complete {len(edits)} more rows with {payload['rendered']}",
                plan, ghost)

    def _plan_computed_columns(self, payload, micro):
        new_column = payload.get("new_column", "Computed")
        table = self.workspace.current.instances.get(payload["instance_id"])
        if table is None:
            return None
        name = new_column
        suffix = 2
        existing = {c.name for c in table.columns}
        while name in existing:
            name = f"{new_column}_{suffix}"
            suffix += 1
        plan = ToolPlan((make_call("addComputedColumn", {
            "instanceId": payload["instance_id"], "formula": payload["formula"],
            "newColumnName": name}),))
        return (f"Add a computed column '{name}' = {payload['formula']}?",
                plan, {"instance_id": payload["instance_id"], "column": name})

    def _plan_sorting_filtering_rule(self, payload, micro):
        rule_record = {"kind": payload["kind"], "params": payload["params"]}
        if rule_record not in self.session_rules:
            self.session_rules.append(rule_record)   # session-scoped reusable rule
        if not payload["targets"]:
            return None
        steps = []
        for target in payload["targets"]:
            if payload["kind"] == "sort-applied":
                steps.append(make_call("tableSort", {
                    "instanceId": target, "columnName": payload["params"]["column"],
                    "order": payload["params"]["order"]}))
            else:
                steps.append(make_call("tableFilter", {
                    "instanceId": target, "conditions": payload["params"]["conditions"],
                    "operator": payload["params"].get("operator", "and")}))
        verb = "sort" if payload["kind"] == "sort-applied" else "filter"
        return (f"Apply the same {verb} to {len(steps)} similar table(s)?",
                ToolPlan(tuple(steps)), None)

    def _plan_joining_tables(self, payload, micro):
        left = self.workspace.current.instances[payload["left"]]
        right = self.workspace.current.instances[payload["right"]]
        column = payload["column"]
        steps = []
        for table in (left, right):
            inconsistent = _currency_inconsistency(table)
            if inconsistent is not None:
                steps.append(make_call("formatColumn", {
                    "instanceId": table.id, "columnName": inconsistent,
                    "formatPattern": "currency"}))
        steps.append(make_call("mergeInstances", {
            "sourceInstanceIds": [left.id, right.id], "mergeStrategy": "inner",
            "joinColumns": [column, column],
            "newInstanceName": f"{left.name}_{right.name}_joined"}))
        return (f"Join {left.name} and {right.name} on '{column}'?",
                ToolPlan(tuple(steps)), None)

    def _plan_entity_resolution(self, payload, micro):
        steps = tuple(
            make_call("searchAndReplace", {
                "instanceId": payload["instance_id"], "searchPattern": value,
                "replaceWith": payload["target"],
                "scopeColumn": payload["column"]})
            for value in payload["values"])
        if not steps:
            return None
        return (f"Normalize {payload['count']} more value(s) to "
                f"'{payload['target']}'?", ToolPlan(steps),
                {"instance_id": payload["instance_id"], "column": payload["column"]})

    def _plan_remove_extraneous(self, payload, micro):
        plan = ToolPlan((make_call("searchAndReplace", {
            "instanceId": payload["instance_id"],
            "searchPattern": payload["substring"], "replaceWith": "",
            "scopeColumn": payload["column"]}),))
        return (f"Remove '{payload['substring'].strip() or payload['substring']}' "
                f"from {payload['count']} more cell(s)?", plan,
                {"instance_id": payload["instance_id"], "column": payload["column"]})

    def _plan_fill_missing(self, payload, micro):
        plan = ToolPlan((make_call("fillMissingValues", {
            "instanceId": payload["instance_id"], "columnName": payload["column"],
            "strategy": "mean"}),))
        return (f"Fill {payload['missing_count']} missing values using the "
                f"column average?", plan,
                {"instance_id": payload["instance_id"], "column": payload["column"]})

    def _plan_type_correction(self, payload, micro):
        steps = [make_call("searchAndReplace", {
            "instanceId": payload["instance_id"], "searchPattern": value,
            "replaceWith": "0", "scopeColumn": payload["column"]})
            for value in payload["values"]]
        steps.append(make_call("convertColumnType", {
            "instanceId": payload["instance_id"], "columnName": payload["column"],
            "targetType": NUMBER}))
        return (f"Replace all {payload['count']} text values with '0'?",
                ToolPlan(tuple(steps)),
                {"instance_id": payload["instance_id"], "column": payload["column"]})

    def _plan_auto_viz(self, payload, micro):
        plan = ToolPlan((make_call("createVisualization", {
            "sourceInstanceId": payload["instance_id"], "chartType": "bar",
            "xAxis": payload["categorical"], "yAxis": payload["numeric"]}),))
        return "Create a Bar Chart?", plan, None

    def _plan_alternative_chart(self, payload, micro):
        viz = self.workspace.current.instances.get(payload["instance_id"])
        source = self.workspace.current.instances.get(payload["source"])
        if viz is None or source is None or source.kind != "table":
            return None
        numeric = [c.name for c in source.columns if c.declared_type == NUMBER]
        categorical = [c.name for c in source.columns if c.declared_type == TEXT]
        if len(numeric) >= 2:
            chart, x, y = "scatter", numeric[0], numeric[1]
        elif categorical and numeric:
            chart, x, y = "bar", categorical[0], numeric[0]
        elif numeric:
            chart, x, y = "histogram", numeric[0], None
        else:
            return None
        if chart == viz.chart_type and viz.encoding_map.get("x") == x:
            return None
        args = {"sourceInstanceId": source.id, "chartType": chart, "xAxis": x}
        if y is not None:
            args["yAxis"] = y
        plan = ToolPlan((make_call("createVisualization", args),))
        return (f"Switch to a {chart} chart? ({payload['reason']})", plan, None)

    def _plan_interactive_filter(self, payload, micro):
        viz = self.workspace.current.instances.get(payload["instance_id"])
        if viz is None or viz.kind != "visualization":
            return None
        if "filter" in viz.interactions:
            return None
        updated = viz.to_json()
        updated["interactions"] = list(viz.interactions) + ["filter"]
        plan = ToolPlan((make_call("updateInstance", {
            "instanceId": viz.id, "newInstance": updated}),))
        return ("Turn the selection into a permanent interactive filter?",
                plan, None)


def _propose_headers(table) -> dict[str, str]:
    """Ghost header proposal from column content."""
    from .cells import clean_number_text
    proposals = {}
    used = set()
    for idx, col in enumerate(table.columns):
        cells = [c for c in table.column_cells(col.name) if not c.is_missing]
        if cells and all(c.kind == "image-ref" for c in cells):
            name = "Image"
        elif cells and all(c.kind == TEXT and
                           normalize_currency_text(c.value) is not None and
                           clean_number_text(c.value) is None for c in cells):
            name = "Price"
        elif cells and all(c.kind == TEXT and clean_number_text(c.value) is not None
                           for c in cells):
            name = "Value"
        elif cells and all(c.kind == NUMBER for c in cells):
            name = "Value"
        else:
            name = "Title" if idx <= 1 else f"Field {idx + 1}"
        base = name
        suffix = 2
        while name in used:
            name = f"{base} {suffix}"
            suffix += 1
        used.add(name)
        proposals[col.name] = name
    return proposals


def _currency_inconsistency(table) -> str | None:
    """First text column whose values parse as money but are not canonical."""
    for col in table.columns:
        if col.declared_type != TEXT:
            continue
        values = [c.value for c in table.column_cells(col.name) if not c.is_missing
                  and c.kind == TEXT]
        if not values:
            continue
        parsed = [normalize_currency_text(v) for v in values]
        if all(p is not None for p in parsed) and any(
                p != v for p, v in zip(parsed, values)):
            from .cells import clean_number_text
            if all(clean_number_text(v) is None for v in values):
                return col.name
    return None
