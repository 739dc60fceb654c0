"""The tool catalog: named, validated operations the planner and UI invoke.

Every workspace mutation, whether user manipulation or an accepted plan
step, goes through one of these tools, so the version lineage is a complete
replayable record. Tools are executed against an immutable version and
return the replacement instance map plus a result report (conversion
counts, replacement counts, created ids).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import transforms
from .cells import Cell
from .errors import BadArgument, UnknownInstance, UnknownTool
from .instances import (Instance, SourceRef, TableInstance,
                        VisualizationInstance, instance_from_json, sanitize_id)


@dataclass(frozen=True)
class ToolCall:
    tool_name: str
    args: dict
    call_id: str

    def to_json(self) -> dict:
        return {"tool": self.tool_name, "args": self.args, "call_id": self.call_id}

    @staticmethod
    def from_json(obj: dict) -> "ToolCall":
        return ToolCall(obj["tool"], obj.get("args", {}), obj.get("call_id", ""))


_call_counter = itertools.count(1)


def make_call(tool_name: str, args: dict, call_id: str | None = None) -> ToolCall:
    if call_id is None:
        call_id = f"{tool_name}-{next(_call_counter)}"
    return ToolCall(tool_name, args, call_id)


def reset_call_ids() -> None:
    """Restart generated call ids; replays call this for bit-identical runs."""
    global _call_counter
    _call_counter = itertools.count(1)


# tool name -> (required arg names, optional arg names, mutates workspace)
SIGNATURES: dict[str, tuple[tuple[str, ...], tuple[str, ...], bool]] = {
    "openPage": (("url",), ("description",), False),
    "selectElements": (("selector", "pageUrl"), (), False),
    "inferSchema": (("pageUrl",), ("targetElement",), False),
    "extractBatch": (("pageUrl", "pattern"), ("maxItems", "newInstanceName"), True),
    "updateInstance": (("instanceId", "newInstance"), (), True),
    "addComputedColumn": (("instanceId", "formula", "newColumnName"), (), True),
    "tableSort": (("instanceId", "columnName", "order"), (), True),
    "tableFilter": (("instanceId", "conditions"), ("operator",), True),
    "mergeInstances": (("sourceInstanceIds", "mergeStrategy"),
                       ("joinColumns", "newInstanceName"), True),
    "renameColumn": (("instanceId", "oldColumnName", "newColumnName"), (), True),
    "formatColumn": (("instanceId", "columnName", "formatPattern"), (), True),
    "searchAndReplace": (("instanceId", "searchPattern", "replaceWith"),
                         ("scopeColumn", "useRegex"), True),
    "convertColumnType": (("instanceId", "columnName", "targetType"),
                          ("cleaningPattern",), True),
    "fillMissingValues": (("instanceId", "columnName", "strategy"), ("constant",), True),
    "createVisualization": (("sourceInstanceId", "chartType"),
                            ("xAxis", "yAxis", "colorBy", "sizeBy", "newInstanceName",
                             "interactions"), True),
    "reshapeTable": (("instanceId", "direction", "keyColumns", "valueColumns"), (), True),
    "aggregateTable": (("instanceId", "groupBy", "aggregations"), (), True),
    "positionalTransform": (("instanceId", "op", "indices"), (), True),
    "createInstance": (("instance",), (), True),
    "editCells": (("instanceId", "edits"), (), True),
}

CATALOG = tuple(sorted(SIGNATURES))

_INSTANCE_REF_ARGS = ("instanceId", "sourceInstanceId")


def check_signature(call: ToolCall) -> None:
    """Structural validation: known tool, required args present, none unknown."""
    if call.tool_name not in SIGNATURES:
        raise UnknownTool(f"unknown tool {call.tool_name!r}")
    required, optional, _ = SIGNATURES[call.tool_name]
    missing = [a for a in required if a not in call.args]
    if missing:
        raise BadArgument(f"{call.tool_name} missing required args {missing}")
    unknown = [a for a in call.args if a not in required and a not in optional]
    if unknown:
        raise BadArgument(f"{call.tool_name} got unknown args {unknown}")


def referenced_instance_ids(call: ToolCall) -> list[str]:
    refs = [call.args[a] for a in _INSTANCE_REF_ARGS if a in call.args]
    refs.extend(call.args.get("sourceInstanceIds", []))
    return refs


def check_references(call: ToolCall, instances: dict[str, Instance]) -> None:
    for ref in referenced_instance_ids(call):
        if ref not in instances:
            raise UnknownInstance(f"{call.tool_name} references unknown instance {ref!r}")


def mutates(tool_name: str) -> bool:
    return SIGNATURES[tool_name][2]


def next_instance_id(instances: dict[str, Instance], name: str) -> str:
    base = sanitize_id(name)
    if base not in instances:
        return base
    suffix = 2
    while f"{base}_{suffix}" in instances:
        suffix += 1
    return f"{base}_{suffix}"


def _require_table(inst: Instance, tool: str) -> TableInstance:
    if inst.kind != "table":
        raise BadArgument(f"{tool} operates on tables, {inst.id} is a {inst.kind}")
    return inst


class ToolExecutor:
    """Executes validated tool calls against an immutable version.

    Callable as `executor(version, call) -> dict[str, Instance]` so it plugs
    into Workspace.apply_versioned / apply_plan. The report of the most
    recent call is available as `last_report`.
    """

    def __init__(self, snapshot_store=None):
        self.snapshot_store = snapshot_store
        self.last_report: dict = {}

    def __call__(self, version, call: ToolCall) -> dict[str, Instance]:
        check_signature(call)
        check_references(call, version.instances)
        handler = getattr(self, "_run_" + call.tool_name, None)
        if handler is None:
            raise UnknownTool(f"unknown tool {call.tool_name!r}")
        instances, report = handler(version, call.args)
        self.last_report = report
        report["tool"] = call.tool_name
        return self._revalidate_visualizations(instances)

    @staticmethod
    def _revalidate_visualizations(instances: dict[str, Instance]):
        """Flip the valid flag on charts whose encoded columns disappeared."""
        from dataclasses import replace
        out = dict(instances)
        for iid, inst in instances.items():
            if inst.kind != "visualization":
                continue
            source = instances.get(inst.source_instance_id)
            if source is None or source.kind != "table":
                if inst.valid:
                    out[iid] = replace(inst, valid=False)
                continue
            ok = inst.check_against(source)
            if ok != inst.valid:
                out[iid] = replace(inst, valid=ok)
        return out

    # --- non-mutating tools (side effects live in the UI layer) ---

    def _run_openPage(self, version, args):
        if not str(args["url"]).strip():
            raise BadArgument("openPage needs a non-empty url")
        return dict(version.instances), {"opened": args["url"]}

    def _run_selectElements(self, version, args):
        return dict(version.instances), {"selector": args["selector"]}

    def _run_inferSchema(self, version, args):
        return dict(version.instances), {"pageUrl": args["pageUrl"]}

    # --- extraction ---

    def _run_extractBatch(self, version, args):
        from .extraction import GeneralizedSelector, batch_extract

        if self.snapshot_store is None:
            raise BadArgument("extractBatch needs a snapshot store")
        snapshot = self.snapshot_store.latest_for_url(args["pageUrl"])
        if snapshot is None:
            raise BadArgument(f"no snapshot ingested for {args['pageUrl']!r}")
        selector = GeneralizedSelector.from_json(args["pattern"])
        max_items = args.get("maxItems")
        name = args.get("newInstanceName") or "Table1"
        new_id = next_instance_id(version.instances, name)
        table = batch_extract(snapshot, selector, max_items=max_items,
                              instance_id=new_id, name=new_id)
        instances = dict(version.instances)
        instances[new_id] = table
        return instances, {"created": new_id, "rows": len(table.rows)}

    # --- instance plumbing ---

    def _run_createInstance(self, version, args):
        payload = dict(args["instance"])
        payload["lineage"] = []    # the apply path stamps the creating call
        inst = instance_from_json(payload, payload.get("provenance", []))
        if inst.id in version.instances:
            raise BadArgument(f"instance {inst.id!r} already exists")
        instances = dict(version.instances)
        instances[inst.id] = inst
        return instances, {"created": inst.id}

    def _run_updateInstance(self, version, args):
        current = version.instances[args["instanceId"]]
        payload = dict(args["newInstance"])
        payload["id"] = current.id
        payload.setdefault("kind", current.kind)
        payload.setdefault("name", current.name)
        payload["lineage"] = [[v, c] for v, c in current.lineage]
        replacement = instance_from_json(payload, payload.get("provenance", []))
        instances = dict(version.instances)
        instances[current.id] = replacement
        return instances, {"updated": current.id}

    def _run_editCells(self, version, args):
        table = _require_table(version.instances[args["instanceId"]], "editCells")
        rows = [list(r) for r in table.rows]
        provenance = [list(p) for p in table.provenance]
        width = len(table.columns)
        for edit in args["edits"]:
            row = edit["row"]
            col = edit["col"] if "col" in edit else table.column_index(edit["column"])
            if not 0 <= col < width:
                raise BadArgument(f"column index {col} out of range")
            if row == len(rows):      # appending one new row is allowed
                rows.append([Cell.missing()] * width)
                provenance.append([None] * width)
            if not 0 <= row < len(rows):
                raise BadArgument(f"row index {row} out of range")
            rows[row][col] = Cell.from_json(edit["value"])
            ref = edit.get("sourceRef")
            provenance[row][col] = SourceRef.from_json(ref) if ref else None
        updated = TableInstance.build(table.id, table.name, table.columns,
                                      rows, provenance, table.lineage)
        instances = dict(version.instances)
        instances[table.id] = updated
        return instances, {"edited": len(args["edits"])}

    # --- transforms ---

    def _table(self, version, args, tool) -> TableInstance:
        return _require_table(version.instances[args["instanceId"]], tool)

    def _swap(self, version, updated: Instance):
        instances = dict(version.instances)
        instances[updated.id] = updated
        return instances

    def _run_tableSort(self, version, args):
        table = self._table(version, args, "tableSort")
        updated = transforms.table_sort(table, args["columnName"], args["order"])
        return self._swap(version, updated), {}

    def _run_tableFilter(self, version, args):
        table = self._table(version, args, "tableFilter")
        conditions = [transforms.FilterCondition.from_json(c) for c in args["conditions"]]
        updated = transforms.table_filter(table, conditions, args.get("operator", "and"))
        return self._swap(version, updated), {"rows": len(updated.rows)}

    def _run_mergeInstances(self, version, args):
        ids = args["sourceInstanceIds"]
        if not isinstance(ids, list) or len(ids) < 2:
            raise BadArgument("mergeInstances needs at least two source ids")
        tables = [_require_table(version.instances[i], "mergeInstances") for i in ids]
        name = args.get("newInstanceName") or f"Merged_{'_'.join(ids)}"
        new_id = next_instance_id(version.instances, name)
        merged = transforms.merge_instances(
            tables, args["mergeStrategy"], args.get("joinColumns"), new_id, new_id)
        instances = dict(version.instances)
        instances[new_id] = merged
        return instances, {"created": new_id, "rows": len(merged.rows)}

    def _run_addComputedColumn(self, version, args):
        table = self._table(version, args, "addComputedColumn")
        updated = transforms.add_computed_column(table, args["formula"], args["newColumnName"])
        return self._swap(version, updated), {}

    def _run_convertColumnType(self, version, args):
        table = self._table(version, args, "convertColumnType")
        updated, report = transforms.convert_column_type(
            table, args["columnName"], args["targetType"], args.get("cleaningPattern"))
        return self._swap(version, updated), report

    def _run_fillMissingValues(self, version, args):
        table = self._table(version, args, "fillMissingValues")
        constant = args.get("constant")
        if constant is not None:
            constant = Cell.from_json(constant)
        updated = transforms.fill_missing_values(table, args["columnName"],
                                                 args["strategy"], constant)
        return self._swap(version, updated), {}

    def _run_searchAndReplace(self, version, args):
        table = self._table(version, args, "searchAndReplace")
        updated, count = transforms.search_and_replace(
            table, args["searchPattern"], args["replaceWith"],
            scope_column=args.get("scopeColumn"), use_regex=bool(args.get("useRegex")))
        return self._swap(version, updated), {"replacements": count}

    def _run_renameColumn(self, version, args):
        table = self._table(version, args, "renameColumn")
        updated = transforms.rename_column(table, args["oldColumnName"], args["newColumnName"])
        return self._swap(version, updated), {}

    def _run_formatColumn(self, version, args):
        table = self._table(version, args, "formatColumn")
        updated = transforms.format_column(table, args["columnName"], args["formatPattern"])
        return self._swap(version, updated), {}

    def _run_reshapeTable(self, version, args):
        table = self._table(version, args, "reshapeTable")
        updated = transforms.reshape(table, args["direction"],
                                     args["keyColumns"], args["valueColumns"])
        return self._swap(version, updated), {"rows": len(updated.rows)}

    def _run_aggregateTable(self, version, args):
        table = self._table(version, args, "aggregateTable")
        aggregations = [(a["column"], a["fn"]) for a in args["aggregations"]]
        updated = transforms.aggregate(table, args["groupBy"], aggregations)
        return self._swap(version, updated), {"rows": len(updated.rows)}

    def _run_positionalTransform(self, version, args):
        table = self._table(version, args, "positionalTransform")
        updated = transforms.positional_transform(table, args["op"], args["indices"])
        return self._swap(version, updated), {}

    def _run_createVisualization(self, version, args):
        source = _require_table(version.instances[args["sourceInstanceId"]],
                                "createVisualization")
        encodings = {}
        for channel, key in (("x", "xAxis"), ("y", "yAxis"),
                             ("color", "colorBy"), ("size", "sizeBy")):
            if args.get(key):
                encodings[channel] = args[key]
        for column in encodings.values():
            source.column_index(column)
        name = args.get("newInstanceName") or "Visualization1"
        new_id = next_instance_id(version.instances, name)
        viz = VisualizationInstance.build(
            new_id, new_id, source.id, args["chartType"], encodings,
            interactions=tuple(args.get("interactions", ("zoom-pan", "tooltip"))))
        instances = dict(version.instances)
        instances[new_id] = viz
        return instances, {"created": new_id}
