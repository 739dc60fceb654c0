"""Workspace data instances: tables with provenance and visualizations.

Instances are treated as immutable values. Transforms never modify an
instance in place; they build a replacement carrying the same id with an
extended lineage. Serialization is canonical (sorted keys, fixed
separators) so identical state always yields identical bytes.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace

from .cells import COLUMN_TYPES, NUMBER, DATE, TEXT, Cell
from .errors import BadArgument, UnknownColumn

CHART_TYPES = ("bar", "line", "scatter", "histogram")
CHANNELS = ("x", "y", "color", "size")
INTERACTIONS = ("zoom-pan", "tooltip", "filter")


@dataclass(frozen=True, slots=True)
class Column:
    name: str
    declared_type: str

    def __post_init__(self):
        if not self.name:
            raise BadArgument("column name must be non-empty")
        if self.declared_type not in COLUMN_TYPES:
            raise BadArgument(f"bad declared type {self.declared_type!r}")

    def to_json(self) -> dict:
        return {"name": self.name, "type": self.declared_type}

    @staticmethod
    def from_json(obj: dict) -> "Column":
        return Column(obj["name"], obj["type"])


@dataclass(frozen=True, slots=True)
class SourceRef:
    """Provenance pointer from a cell back to a DOM node in a snapshot."""

    snapshot_id: str
    node_id: int
    url: str

    def to_json(self) -> dict:
        return {"snapshot_id": self.snapshot_id, "node_id": self.node_id, "url": self.url}

    @staticmethod
    def from_json(obj: dict) -> "SourceRef":
        return SourceRef(obj["snapshot_id"], obj["node_id"], obj["url"])


@dataclass(frozen=True)
class TableInstance:
    id: str
    name: str
    columns: tuple[Column, ...]
    rows: tuple[tuple[Cell, ...], ...]
    provenance: tuple[tuple[SourceRef | None, ...], ...]
    lineage: tuple[tuple[int, str], ...] = ()  # (version_id, tool_call_id)

    kind = "table"

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise BadArgument("duplicate column names")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise BadArgument("row width does not match column count")
            for col, cell in zip(self.columns, row):
                if not cell.is_missing and cell.kind != col.declared_type:
                    raise BadArgument(
                        f"{cell.kind} cell in {col.declared_type} column {col.name!r}")
        if len(self.provenance) != len(self.rows):
            raise BadArgument("provenance shape does not match rows")
        for prow, row in zip(self.provenance, self.rows):
            if len(prow) != len(row):
                raise BadArgument("provenance shape does not match rows")

    @staticmethod
    def build(id: str, name: str, columns, rows, provenance=None, lineage=()) -> "TableInstance":
        cols = tuple(columns)
        row_t = tuple(tuple(r) for r in rows)
        if provenance is None:
            prov = tuple(tuple(None for _ in r) for r in row_t)
        else:
            prov = tuple(tuple(p) for p in provenance)
        return TableInstance(id, name, cols, row_t, prov, tuple(lineage))

    def column_index(self, name: str) -> int:
        for i, col in enumerate(self.columns):
            if col.name == name:
                return i
        raise UnknownColumn(f"no column {name!r} in {self.id}")

    def column(self, name: str) -> Column:
        return self.columns[self.column_index(name)]

    def column_cells(self, name: str) -> list[Cell]:
        idx = self.column_index(name)
        return [row[idx] for row in self.rows]

    def with_lineage(self, version_id: int, call_id: str) -> "TableInstance":
        return replace(self, lineage=self.lineage + ((version_id, call_id),))

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "id": self.id,
            "name": self.name,
            "columns": [c.to_json() for c in self.columns],
            "rows": [[cell.to_json() for cell in row] for row in self.rows],
            "lineage": [[v, c] for v, c in self.lineage],
        }

    def provenance_records(self) -> list[dict]:
        records = []
        for r, prow in enumerate(self.provenance):
            for c, ref in enumerate(prow):
                if ref is not None:
                    records.append({"instance_id": self.id, "row": r, "col": c, **ref.to_json()})
        return records

    @staticmethod
    def from_json(obj: dict, provenance_records: list[dict] | None = None) -> "TableInstance":
        rows = tuple(tuple(Cell.from_json(c) for c in row) for row in obj["rows"])
        prov = [[None] * len(row) for row in rows]
        for rec in provenance_records or []:
            if rec["instance_id"] == obj["id"]:
                prov[rec["row"]][rec["col"]] = SourceRef(rec["snapshot_id"], rec["node_id"], rec["url"])
        return TableInstance(
            id=obj["id"],
            name=obj["name"],
            columns=tuple(Column.from_json(c) for c in obj["columns"]),
            rows=rows,
            provenance=tuple(tuple(p) for p in prov),
            lineage=tuple((v, c) for v, c in obj.get("lineage", [])),
        )


@dataclass(frozen=True)
class VisualizationInstance:
    id: str
    name: str
    source_instance_id: str
    chart_type: str
    encodings: tuple[tuple[str, str], ...]  # (channel, column) pairs, channel order
    interactions: tuple[str, ...] = ("zoom-pan", "tooltip")
    lineage: tuple[tuple[int, str], ...] = ()
    valid: bool = True

    kind = "visualization"

    def __post_init__(self):
        if self.chart_type not in CHART_TYPES:
            raise BadArgument(f"unknown chart type {self.chart_type!r}")
        for channel, _ in self.encodings:
            if channel not in CHANNELS:
                raise BadArgument(f"unknown channel {channel!r}")
        for inter in self.interactions:
            if inter not in INTERACTIONS:
                raise BadArgument(f"unknown interaction {inter!r}")

    @staticmethod
    def build(id, name, source_instance_id, chart_type, encodings: dict,
              interactions=("zoom-pan", "tooltip"), lineage=()) -> "VisualizationInstance":
        pairs = tuple((ch, encodings[ch]) for ch in CHANNELS if ch in encodings)
        return VisualizationInstance(id, name, source_instance_id, chart_type,
                                     pairs, tuple(interactions), tuple(lineage))

    @property
    def encoding_map(self) -> dict[str, str]:
        return dict(self.encodings)

    def with_lineage(self, version_id: int, call_id: str) -> "VisualizationInstance":
        return replace(self, lineage=self.lineage + ((version_id, call_id),))

    def check_against(self, source: TableInstance) -> bool:
        names = {c.name for c in source.columns}
        return all(col in names for _, col in self.encodings)

    def to_chart_spec(self, source: TableInstance) -> dict:
        """Declarative chart spec (vega-lite shaped) the UI renders as-is."""
        def channel_type(column_name: str) -> str:
            dtype = source.column(column_name).declared_type
            if dtype == NUMBER:
                return "quantitative"
            if dtype == DATE:
                return "temporal"
            return "nominal"

        mark = {"bar": "bar", "line": "line", "scatter": "point", "histogram": "bar"}[self.chart_type]
        encoding: dict = {}
        for channel, column in self.encodings:
            encoding[channel] = {"field": column, "type": channel_type(column)}
        if self.chart_type == "histogram":
            x = self.encoding_map.get("x")
            if x is not None:
                encoding["x"] = {"field": x, "type": channel_type(x), "bin": True}
            encoding["y"] = {"aggregate": "count", "type": "quantitative"}
        values = []
        for row in source.rows:
            record = {}
            for col, cell in zip(source.columns, row):
                record[col.name] = None if cell.is_missing else cell.value
            values.append(record)
        spec = {
            "mark": {"type": mark, "tooltip": "tooltip" in self.interactions},
            "encoding": encoding,
            "data": {"values": values},
        }
        params = []
        if "zoom-pan" in self.interactions:
            params.append({"name": "grid", "select": "interval", "bind": "scales"})
        if "filter" in self.interactions:
            params.append({"name": "brush", "select": "interval"})
        if params:
            spec["params"] = params
        return spec

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "id": self.id,
            "name": self.name,
            "source_instance_id": self.source_instance_id,
            "chart_type": self.chart_type,
            "encodings": [[ch, col] for ch, col in self.encodings],
            "interactions": list(self.interactions),
            "lineage": [[v, c] for v, c in self.lineage],
            "valid": self.valid,
        }

    @staticmethod
    def from_json(obj: dict) -> "VisualizationInstance":
        return VisualizationInstance(
            id=obj["id"],
            name=obj["name"],
            source_instance_id=obj["source_instance_id"],
            chart_type=obj["chart_type"],
            encodings=tuple((ch, col) for ch, col in obj["encodings"]),
            interactions=tuple(obj.get("interactions", ())),
            lineage=tuple((v, c) for v, c in obj.get("lineage", [])),
            valid=obj.get("valid", True),
        )


Instance = TableInstance | VisualizationInstance


def instance_from_json(obj: dict, provenance_records=None) -> Instance:
    if obj.get("kind") == "visualization":
        return VisualizationInstance.from_json(obj)
    return TableInstance.from_json(obj, provenance_records)


_ID_CLEAN = re.compile(r"[^A-Za-z0-9_]+")


def sanitize_id(name: str) -> str:
    """Instance ids are chat-mentionable handles: space-free, word chars only."""
    cleaned = _ID_CLEAN.sub("_", name.strip()).strip("_")
    return cleaned or "Instance"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
