"""The proactive trigger rules.

Each rule inspects the recent major-event window plus the current workspace
version and either binds a payload (the evidence the suggestion builder
needs) or stays silent. Rules are deliberately conservative: every firing
is anchored to a concrete user cue, so evaluating them on an idle
workspace with no matching cue yields nothing.

Event payload shapes are documented in docs/protocol.md.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cells import BOOLEAN, NUMBER, TEXT, Cell, clean_number_text
from .errors import EngineError
from .events import EventLog, InteractionEvent
from .extraction import ElementSelection, SnapshotStore, generalize_selection
from .fillprog import (CellEdit, _deleted_substring, detect_extraneous,
                       detect_normalization, infer_fill_program)

RULES = (
    "webpage-suggestion", "element-selection", "schema-inference",
    "batch-extraction", "autocomplete", "computed-columns",
    "sorting-filtering-rule", "joining-tables", "entity-resolution",
    "remove-extraneous", "fill-missing", "type-correction",
    "auto-viz", "alternative-chart", "interactive-filter",
)

# scope of each rule; dual rows emit both forms (micro gated on editor focus)
RULE_SCOPES = {
    "webpage-suggestion": ("macro",),
    "element-selection": ("micro", "macro"),
    "schema-inference": ("micro",),
    "batch-extraction": ("micro",),
    "autocomplete": ("micro",),
    "computed-columns": ("micro", "macro"),
    "sorting-filtering-rule": ("macro",),
    "joining-tables": ("macro",),
    "entity-resolution": ("micro",),
    "remove-extraneous": ("micro",),
    "fill-missing": ("micro", "macro"),
    "type-correction": ("micro",),
    "auto-viz": ("macro",),
    "alternative-chart": ("macro",),
    "interactive-filter": ("macro",),
}

_DEFAULT_HEADER = re.compile(r"^Column \d+$")

# column-name pairs read as a clear mathematical relationship
RELATION_LEXICON = (
    ("price", "quantity", "{a} * {b}", "Total"),
    ("price", "qty", "{a} * {b}", "Total"),
    ("unit price", "units", "{a} * {b}", "Total"),
    ("revenue", "cost", "{a} - {b}", "Profit"),
)


@dataclass
class TriggerContext:
    log: EventLog
    version: object                 # WorkspaceVersion
    store: SnapshotStore
    title: str = ""
    config: object = None

    def tables(self):
        return [i for i in self.version.instances.values() if i.kind == "table"]

    def visualizations(self):
        return [i for i in self.version.instances.values() if i.kind == "visualization"]

    def recent(self, count: int) -> list[InteractionEvent]:
        return self.log.context_slice()[-count:]

    def last(self) -> InteractionEvent | None:
        slice_ = self.log.context_slice()
        return slice_[-1] if slice_ else None


def _missing_threshold(ctx: TriggerContext) -> int:
    return getattr(ctx.config, "missing_cell_threshold", 3)


# --- 1. Discovery ---

def rule_webpage_suggestion(ctx: TriggerContext):
    last = ctx.last()
    if last is None or last.kind != "workspace-created":
        return None
    title = last.payload.get("title", "") or ctx.title
    if len(title.split()) < 2:
        return None            # a bare word is not a research goal
    if ctx.tables() or ctx.visualizations():
        return None
    return {"title": title}


# --- 2. Data extraction & wrangling ---

def _sibling_selector(ctx: TriggerContext, first: dict, second: dict):
    if first.get("snapshot_id") != second.get("snapshot_id"):
        return None
    if first.get("node_id") == second.get("node_id"):
        return None
    try:
        snapshot = ctx.store.get(first["snapshot_id"])
        exemplars = [ElementSelection.of(snapshot, first["node_id"]),
                     ElementSelection.of(snapshot, second["node_id"])]
        selector = generalize_selection(snapshot, exemplars)
    except (EngineError, KeyError):
        return None
    return snapshot, selector


def _latest_sibling_pair(ctx: TriggerContext, kind: str, window: int = 6):
    """Pair the newest event of `kind` with the nearest earlier one that is a
    structural sibling; intra-item field pairs fail generalization and are
    skipped."""
    events = [e for e in ctx.log.context_slice()[-window:]
              if e.kind == kind and "snapshot_id" in e.payload]
    if len(events) < 2 or ctx.last() is not events[-1]:
        return None
    newest = events[-1]
    for earlier in reversed(events[:-1]):
        found = _sibling_selector(ctx, earlier.payload, newest.payload)
        if found is not None:
            return found
    return None


def rule_element_selection(ctx: TriggerContext):
    found = _latest_sibling_pair(ctx, "selection-made")
    if found is None:
        return None
    snapshot, selector = found
    return {"snapshot_id": snapshot.snapshot_id, "url": snapshot.url,
            "match_count": selector.match_count, "selector": selector.to_json()}


def rule_schema_inference(ctx: TriggerContext):
    last = ctx.last()
    if last is None:
        return None
    created_recently = {e.payload.get("instance_id")
                        for e in ctx.log.context_slice() if e.kind == "table-created"}
    for table in ctx.tables():
        if table.id not in created_recently:
            continue
        if not table.rows:
            continue
        if not all(_DEFAULT_HEADER.match(c.name) for c in table.columns):
            continue
        if last.payload.get("instance_id") == table.id:
            continue           # still working inside the table: not clicked away
        return {"instance_id": table.id,
                "columns": [c.name for c in table.columns]}
    return None


def rule_batch_extraction(ctx: TriggerContext):
    last = ctx.last()
    # continuation: accepting one completion round cues the next one
    if last is not None and last.kind == "suggestion-applied" and \
            last.payload.get("trigger") == "batch-extraction":
        ghost = last.payload.get("ghost", {})
        if "selector" in ghost and "snapshot_id" in ghost:
            try:
                snapshot = ctx.store.get(ghost["snapshot_id"])
            except EngineError:
                return None
            payload = {"snapshot_id": ghost["snapshot_id"], "url": snapshot.url,
                       "match_count": ghost.get("match_count", 0),
                       "selector": ghost["selector"]}
            if ghost.get("instance_id"):
                payload["instance_id"] = ghost["instance_id"]
            return payload
        return None
    found = _latest_sibling_pair(ctx, "element-captured")
    if found is None:
        return None
    snapshot, selector = found
    if selector.match_count <= 2:
        return None            # nothing left beyond the two exemplars
    payload = {"snapshot_id": snapshot.snapshot_id, "url": snapshot.url,
               "match_count": selector.match_count, "selector": selector.to_json()}
    events = [e for e in ctx.log.context_slice() if e.kind == "element-captured"]
    target = events[-1].payload.get("instance_id") if events else None
    if target:
        payload["instance_id"] = target
    return payload


def _cell_edit_events(ctx: TriggerContext, count: int = 2):
    events = [e for e in ctx.log.context_slice() if e.kind == "cell-edited"]
    if len(events) < count or ctx.last() is not events[-1]:
        return None
    tail = events[-count:]
    keys = {(e.payload.get("instance_id"), e.payload.get("column")) for e in tail}
    if len(keys) != 1:
        return None
    return tail


def rule_autocomplete(ctx: TriggerContext):
    tail = _cell_edit_events(ctx)
    if tail is None:
        return None
    for event in tail:
        if not Cell.from_json(event.payload["old"]).is_missing:
            return None        # autocomplete is about filling a fresh column
    instance_id = tail[-1].payload["instance_id"]
    column = tail[-1].payload["column"]
    table = ctx.version.instances.get(instance_id)
    if table is None or table.kind != "table":
        return None
    try:
        col_idx = table.column_index(column)
    except EngineError:
        return None
    examples = []
    for event in tail:
        row_idx = event.payload["row"]
        if row_idx >= len(table.rows):
            return None
        row = {c.name: cell for c, cell in zip(table.columns, table.rows[row_idx])
               if c.name != column}
        examples.append((row, Cell.from_json(event.payload["new"])))
    try:
        program = infer_fill_program(examples)
    except EngineError:
        return None
    if program is None:
        return None            # NoProgram stays silent
    remaining = [i for i, row in enumerate(table.rows) if row[col_idx].is_missing]
    if not remaining:
        return None
    return {"instance_id": instance_id, "column": column,
            "program": program.to_json(), "rendered": program.render(),
            "remaining_rows": remaining}


def rule_computed_columns(ctx: TriggerContext):
    last = ctx.last()
    if last is None:
        return None
    if last.kind == "cell-edited":
        new = Cell.from_json(last.payload["new"])
        if new.kind == TEXT and new.value.startswith("="):
            return {"instance_id": last.payload["instance_id"],
                    "column": last.payload["column"],
                    "formula": new.value[1:].strip()}
        return None
    created_recently = {e.payload.get("instance_id")
                        for e in ctx.log.context_slice() if e.kind == "table-created"}
    for table in ctx.tables():
        if table.id not in created_recently:
            continue
        numeric = {c.name.lower(): c.name for c in table.columns
                   if c.declared_type == NUMBER}
        for a, b, template, new_name in RELATION_LEXICON:
            if a in numeric and b in numeric:
                formula = template.format(a=f"[{numeric[a]}]", b=f"[{numeric[b]}]")
                return {"instance_id": table.id, "formula": formula,
                        "new_column": new_name,
                        "columns": [numeric[a], numeric[b]]}
    return None


def _same_schema(a, b) -> bool:
    return [(c.name, c.declared_type) for c in a.columns] == \
           [(c.name, c.declared_type) for c in b.columns]


def rule_sorting_filtering_rule(ctx: TriggerContext):
    for kind in ("sort-applied", "filter-applied"):
        events = [e for e in ctx.log.context_slice() if e.kind == kind]
        if len(events) < 2 or ctx.last() is not events[-1]:
            continue
        first, second = events[-2], events[-1]
        if first.payload.get("instance_id") == second.payload.get("instance_id"):
            continue
        params_a = {k: v for k, v in first.payload.items() if k != "instance_id"}
        params_b = {k: v for k, v in second.payload.items() if k != "instance_id"}
        if params_a != params_b:
            continue
        a = ctx.version.instances.get(first.payload["instance_id"])
        b = ctx.version.instances.get(second.payload["instance_id"])
        if a is None or b is None or a.kind != "table" or b.kind != "table":
            continue
        if not _same_schema(a, b):
            continue
        targets = [t.id for t in ctx.tables()
                   if t.id not in (a.id, b.id) and _same_schema(t, a)]
        return {"kind": kind, "params": params_a,
                "applied_to": [a.id, b.id], "targets": targets}
    return None


def rule_joining_tables(ctx: TriggerContext):
    tables = sorted(ctx.tables(), key=lambda t: t.id)
    for i, a in enumerate(tables):
        for b in tables[i + 1:]:
            names_b = {c.name: c for c in b.columns}
            for col in a.columns:
                other = names_b.get(col.name)
                if other is None or other.declared_type != col.declared_type:
                    continue
                a_values = {c.value for c in a.column_cells(col.name) if not c.is_missing}
                b_values = {c.value for c in b.column_cells(col.name) if not c.is_missing}
                if a_values & b_values:
                    return {"left": a.id, "right": b.id, "column": col.name}
    return None


# --- 3. Profiling & cleaning ---

def _edits_from_events(events) -> list[CellEdit]:
    edits = []
    for event in events:
        edits.append(CellEdit(event.payload["row"],
                              Cell.from_json(event.payload["old"]),
                              Cell.from_json(event.payload["new"])))
    return edits


def _pure_deletion_pair(edits: list[CellEdit]) -> bool:
    removed = []
    for edit in edits:
        if edit.old.kind != TEXT or edit.new.kind != TEXT:
            return False
        chunk = _deleted_substring(edit.old.value, edit.new.value)
        if chunk is None:
            return False
        removed.append(chunk)
    return len(set(removed)) == 1


def rule_entity_resolution(ctx: TriggerContext):
    tail = _cell_edit_events(ctx)
    if tail is None:
        return None
    edits = _edits_from_events(tail)
    if any(e.old.is_missing for e in edits):
        return None
    if _pure_deletion_pair(edits):
        return None            # that cue belongs to remove-extraneous
    instance_id = tail[-1].payload["instance_id"]
    column = tail[-1].payload["column"]
    table = ctx.version.instances.get(instance_id)
    if table is None or table.kind != "table":
        return None
    try:
        cells = table.column_cells(column)
    except EngineError:
        return None
    proposal = detect_normalization(cells, edits)
    if proposal is None:
        return None
    return {"instance_id": instance_id, "column": column,
            "target": proposal.target,
            "values": list(proposal.values_to_replace),
            "count": proposal.count}


def rule_remove_extraneous(ctx: TriggerContext):
    tail = _cell_edit_events(ctx)
    if tail is None:
        return None
    edits = _edits_from_events(tail)
    if any(e.old.is_missing for e in edits):
        return None
    if not _pure_deletion_pair(edits):
        return None
    instance_id = tail[-1].payload["instance_id"]
    column = tail[-1].payload["column"]
    table = ctx.version.instances.get(instance_id)
    if table is None or table.kind != "table":
        return None
    try:
        cells = table.column_cells(column)
    except EngineError:
        return None
    proposal = detect_extraneous(cells, edits)
    if proposal is None:
        return None
    return {"instance_id": instance_id, "column": column,
            "substring": proposal.substring, "count": proposal.count}


def rule_fill_missing(ctx: TriggerContext):
    threshold = _missing_threshold(ctx)
    last = ctx.last()
    if last is not None and last.kind == "cell-edited":
        old = Cell.from_json(last.payload["old"])
        new = Cell.from_json(last.payload["new"])
        table = ctx.version.instances.get(last.payload.get("instance_id"))
        if (old.is_missing and new.kind == NUMBER and table is not None
                and table.kind == "table"):
            column = last.payload["column"]
            try:
                cells = table.column_cells(column)
            except EngineError:
                cells = None
            if cells is not None and table.column(column).declared_type == NUMBER:
                count = sum(1 for c in cells if c.is_missing)
                if count >= 1:
                    return {"instance_id": table.id, "column": column,
                            "missing_count": count}
    for table in sorted(ctx.tables(), key=lambda t: t.id):
        for col in table.columns:
            if col.declared_type != NUMBER:
                continue
            count = sum(1 for c in table.column_cells(col.name) if c.is_missing)
            if count >= threshold:
                return {"instance_id": table.id, "column": col.name,
                        "missing_count": count}
    return None


def rule_type_correction(ctx: TriggerContext):
    last = ctx.last()
    if last is None or last.kind != "cell-deleted":
        return None
    old = Cell.from_json(last.payload["old"])
    if old.kind != TEXT or clean_number_text(old.value) is not None:
        return None
    table = ctx.version.instances.get(last.payload.get("instance_id"))
    if table is None or table.kind != "table":
        return None
    column = last.payload["column"]
    try:
        col = table.column(column)
    except EngineError:
        return None
    if col.declared_type != TEXT:
        return None
    cells = [c for c in table.column_cells(column) if not c.is_missing]
    numeric = [c for c in cells if clean_number_text(c.value) is not None]
    offenders = sorted({c.value for c in cells if clean_number_text(c.value) is None})
    if not offenders or len(numeric) * 2 < len(cells):
        return None            # the column is not "mostly numbers"
    count = sum(1 for c in cells if clean_number_text(c.value) is None)
    return {"instance_id": table.id, "column": column,
            "values": offenders, "count": count}


# --- 4. Modeling & visualization ---

def _categorical_and_numeric(table):
    categorical = [c.name for c in table.columns if c.declared_type in (TEXT, BOOLEAN)]
    numeric = [c.name for c in table.columns if c.declared_type == NUMBER]
    return categorical, numeric


def rule_auto_viz(ctx: TriggerContext):
    last = ctx.last()
    if last is None or last.kind != "selection-made":
        return None
    if last.payload.get("scope") != "instance":
        return None
    table = ctx.version.instances.get(last.payload.get("instance_id"))
    if table is None or table.kind != "table":
        return None
    categorical, numeric = _categorical_and_numeric(table)
    if not categorical or not numeric:
        return None
    return {"instance_id": table.id, "categorical": categorical[0],
            "numeric": numeric[0]}


def _poor_fit_reason(viz, source) -> str | None:
    if viz is None or source is None or source.kind != "table":
        return None
    enc = viz.encoding_map
    types = {}
    for channel, column in enc.items():
        try:
            types[channel] = source.column(column).declared_type
        except EngineError:
            return "encodes a column that no longer exists"
    if viz.chart_type == "scatter":
        if types.get("x") not in (NUMBER, None) or types.get("y") not in (NUMBER, None):
            return "scatterplots need numeric axes"
    if viz.chart_type == "bar" and types.get("x") == NUMBER and types.get("y") == NUMBER:
        return "two numeric axes read better as a scatterplot"
    if viz.chart_type == "line" and types.get("x") == TEXT:
        return "a line chart needs an ordered x axis"
    if viz.chart_type == "histogram" and types.get("x") == TEXT:
        return "histograms bin numeric columns"
    return None


def rule_alternative_chart(ctx: TriggerContext):
    # a chart invalidated by schema edits always warrants a repair proposal
    for viz in sorted(ctx.visualizations(), key=lambda v: v.id):
        if not viz.valid:
            return {"instance_id": viz.id, "reason": "chart references removed columns",
                    "source": viz.source_instance_id}
    last = ctx.last()
    if last is None or last.kind not in ("viz-created", "viz-edited"):
        return None
    viz = ctx.version.instances.get(last.payload.get("instance_id"))
    if viz is None or viz.kind != "visualization":
        return None
    source = ctx.version.instances.get(viz.source_instance_id)
    if last.kind == "viz-edited":
        return {"instance_id": viz.id, "reason": "the chart specification changed",
                "source": viz.source_instance_id}
    reason = _poor_fit_reason(viz, source)
    if reason is None:
        return None
    return {"instance_id": viz.id, "reason": reason,
            "source": viz.source_instance_id}


def rule_interactive_filter(ctx: TriggerContext):
    last = ctx.last()
    if last is None or last.kind != "selection-made":
        return None
    if last.payload.get("scope") != "rows":
        return None
    table_id = last.payload.get("instance_id")
    table = ctx.version.instances.get(table_id)
    if table is None or table.kind != "table":
        return None
    linked = [v for v in ctx.visualizations() if v.source_instance_id == table_id]
    if not linked:
        return None
    linked.sort(key=lambda v: v.id)
    return {"instance_id": linked[0].id, "source": table_id,
            "rows": last.payload.get("rows", [])}


RULE_FUNCTIONS = {
    "webpage-suggestion": rule_webpage_suggestion,
    "element-selection": rule_element_selection,
    "schema-inference": rule_schema_inference,
    "batch-extraction": rule_batch_extraction,
    "autocomplete": rule_autocomplete,
    "computed-columns": rule_computed_columns,
    "sorting-filtering-rule": rule_sorting_filtering_rule,
    "joining-tables": rule_joining_tables,
    "entity-resolution": rule_entity_resolution,
    "remove-extraneous": rule_remove_extraneous,
    "fill-missing": rule_fill_missing,
    "type-correction": rule_type_correction,
    "auto-viz": rule_auto_viz,
    "alternative-chart": rule_alternative_chart,
    "interactive-filter": rule_interactive_filter,
}


def evaluate_triggers(ctx: TriggerContext) -> list[tuple[str, dict]]:
    """All rules whose predicate holds, with bound payloads, in table order."""
    fired = []
    for rule in RULES:
        payload = RULE_FUNCTIONS[rule](ctx)
        if payload is not None:
            fired.append((rule, payload))
    return fired
