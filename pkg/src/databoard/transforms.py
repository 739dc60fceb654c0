"""Deterministic table transforms.

Every function here is a pure function of its inputs: it returns a new
TableInstance and never touches the one passed in. Cell provenance is
carried through any transform that moves cells around (sort, filter, merge,
reshape, positional edits) and cleared on cells whose value is synthesized
(computed, filled, replaced).

Missing-value rules, applied uniformly:
  * missing sorts last under both orders;
  * missing never satisfies a filter comparator, including neq;
  * missing is excluded from aggregate inputs; count counts non-missing;
  * a missing operand makes a computed cell missing.
"""

from __future__ import annotations

import re
import statistics
from dataclasses import dataclass

from .cells import (BOOLEAN, NUMBER, TEXT, Cell, convert_cell,
                    normalize_currency_text, parse_date_text)
from .errors import (BadArgument, JoinTypeMismatch, NoNonMissingValues,
                     TypeMismatch, UnknownColumn)
from .instances import Column, SourceRef, TableInstance

COMPARATORS = ("eq", "neq", "lt", "lte", "gt", "gte", "contains", "regex-match")
ORDER_COMPARATORS = ("lt", "lte", "gt", "gte")
TEXT_COMPARATORS = ("contains", "regex-match")
MERGE_STRATEGIES = ("union", "inner", "left", "right")
FILL_STRATEGIES = ("mean", "median", "mode", "interpolation", "constant")
AGG_FUNCTIONS = ("sum", "mean", "min", "max", "count")
POSITIONAL_OPS = ("delete-rows", "delete-cols", "move-col")
FORMAT_PATTERNS = ("currency", "date-iso", "lowercase", "uppercase", "trim")


def _rebuild(t: TableInstance, columns, rows, provenance) -> TableInstance:
    return TableInstance.build(t.id, t.name, columns, rows, provenance, t.lineage)


# --- sort ---

def table_sort(t: TableInstance, column: str, order: str = "asc") -> TableInstance:
    if order not in ("asc", "desc"):
        raise BadArgument(f"order must be asc or desc, got {order!r}")
    idx = t.column_index(column)
    paired = list(zip(t.rows, t.provenance))
    present = [(row, prov) for row, prov in paired if not row[idx].is_missing]
    absent = [(row, prov) for row, prov in paired if row[idx].is_missing]
    present.sort(key=lambda pair: pair[0][idx].sort_key(), reverse=(order == "desc"))
    merged = present + absent   # missing last, original order preserved among them
    rows = [row for row, _ in merged]
    provenance = [prov for _, prov in merged]
    return _rebuild(t, t.columns, rows, provenance)


# --- filter ---

@dataclass(frozen=True)
class FilterCondition:
    column: str
    comparator: str
    operand: Cell | str   # pattern string for contains / regex-match

    def __post_init__(self):
        if self.comparator not in COMPARATORS:
            raise BadArgument(f"unknown comparator {self.comparator!r}")

    def to_json(self) -> dict:
        operand = self.operand.to_json() if isinstance(self.operand, Cell) else self.operand
        return {"column": self.column, "comparator": self.comparator, "operand": operand}

    @staticmethod
    def from_json(obj: dict) -> "FilterCondition":
        operand = obj["operand"]
        if isinstance(operand, dict):
            operand = Cell.from_json(operand)
        return FilterCondition(obj["column"], obj["comparator"], operand)


def _check_condition(t: TableInstance, cond: FilterCondition):
    col = t.column(cond.column)
    if cond.comparator in TEXT_COMPARATORS:
        if col.declared_type != TEXT:
            raise TypeMismatch(f"{cond.comparator} requires a text column")
        if not isinstance(cond.operand, str):
            raise BadArgument(f"{cond.comparator} takes a pattern string")
        if cond.comparator == "regex-match":
            try:
                re.compile(cond.operand)
            except re.error as exc:
                raise BadArgument(f"bad regex {cond.operand!r}: {exc}") from exc
        return
    if not isinstance(cond.operand, Cell):
        raise BadArgument(f"{cond.comparator} takes a cell operand")
    if cond.comparator in ORDER_COMPARATORS:
        if col.declared_type == BOOLEAN:
            raise TypeMismatch("ordering comparators do not apply to boolean columns")
    if not cond.operand.is_missing and cond.operand.kind != col.declared_type:
        raise TypeMismatch(
            f"operand kind {cond.operand.kind} does not match column type {col.declared_type}")


def _matches(cell: Cell, cond: FilterCondition) -> bool:
    if cell.is_missing:
        return False
    comparator = cond.comparator
    if comparator == "contains":
        return cond.operand in str(cell.value)
    if comparator == "regex-match":
        return re.search(cond.operand, str(cell.value)) is not None
    operand = cond.operand
    if operand.is_missing:
        return False
    if comparator == "eq":
        return cell.value == operand.value
    if comparator == "neq":
        return cell.value != operand.value
    left, right = cell.sort_key(), operand.sort_key()
    if comparator == "lt":
        return left < right
    if comparator == "lte":
        return left <= right
    if comparator == "gt":
        return left > right
    return left >= right


def table_filter(t: TableInstance, conditions: list[FilterCondition],
                 operator: str = "and") -> TableInstance:
    if not conditions:
        raise BadArgument("conditions must be non-empty")
    if operator not in ("and", "or"):
        raise BadArgument(f"operator must be and/or, got {operator!r}")
    for cond in conditions:
        _check_condition(t, cond)
    indexed = [(t.column_index(c.column), c) for c in conditions]
    combine = all if operator == "and" else any
    rows, provenance = [], []
    for row, prov in zip(t.rows, t.provenance):
        if combine(_matches(row[idx], cond) for idx, cond in indexed):
            rows.append(row)
            provenance.append(prov)
    return _rebuild(t, t.columns, rows, provenance)


# --- merge ---

def merge_instances(tables: list[TableInstance], strategy: str,
                    join_columns: list[str] | None, new_id: str,
                    new_name: str | None = None) -> TableInstance:
    if len(tables) < 2:
        raise BadArgument("merge needs at least two tables")
    if strategy not in MERGE_STRATEGIES:
        raise BadArgument(f"unknown merge strategy {strategy!r}")
    if strategy == "union":
        return _union(tables, new_id, new_name)
    if not join_columns or len(join_columns) != len(tables):
        raise BadArgument("join strategies need one join column per table")
    result = tables[0]
    key = join_columns[0]
    for other, other_key in zip(tables[1:], join_columns[1:]):
        result = _join_pair(result, other, key, other_key, strategy, new_id, new_name)
        key = other_key if strategy == "right" else key
    return result


def _union(tables: list[TableInstance], new_id: str, new_name: str | None) -> TableInstance:
    columns: list[Column] = []
    seen: dict[str, Column] = {}
    for t in tables:
        for col in t.columns:
            if col.name not in seen:
                seen[col.name] = col
                columns.append(col)
            elif seen[col.name].declared_type != col.declared_type:
                raise JoinTypeMismatch(
                    f"column {col.name!r} has conflicting types across tables")
    rows, provenance = [], []
    for t in tables:
        positions = {col.name: i for i, col in enumerate(t.columns)}
        for row, prov in zip(t.rows, t.provenance):
            out_row, out_prov = [], []
            for col in columns:
                if col.name in positions:
                    i = positions[col.name]
                    out_row.append(row[i])
                    out_prov.append(prov[i])
                else:
                    out_row.append(Cell.missing())
                    out_prov.append(None)
            rows.append(out_row)
            provenance.append(out_prov)
    return TableInstance.build(new_id, new_name or new_id, columns, rows, provenance)


def _join_pair(left: TableInstance, right: TableInstance, left_key: str,
               right_key: str, strategy: str, new_id: str,
               new_name: str | None) -> TableInstance:
    lk = left.column_index(left_key)
    rk = right.column_index(right_key)
    if left.columns[lk].declared_type != right.columns[rk].declared_type:
        raise JoinTypeMismatch(
            f"join key types differ: {left.columns[lk].declared_type} vs "
            f"{right.columns[rk].declared_type}")

    # output schema: the anchor table's columns, then the other side's
    # non-key columns, namespaced "table-name.column" on name collision
    left_names = {c.name for c in left.columns}
    columns = list(left.columns)
    right_out: list[tuple[int, Column]] = []
    for i, col in enumerate(right.columns):
        if i == rk:
            continue
        name = col.name
        if name in left_names:
            name = f"{right.name}.{name}"
            left_out_rename_needed = name in left_names
            if left_out_rename_needed:
                raise BadArgument(f"cannot disambiguate column {col.name!r}")
        right_out.append((i, Column(name, col.declared_type)))
    columns.extend(col for _, col in right_out)

    def right_matches(key_cell: Cell):
        if key_cell.is_missing:
            return []
        return [j for j, row in enumerate(right.rows)
                if not row[rk].is_missing and row[rk].value == key_cell.value]

    rows, provenance = [], []

    def emit(li: int | None, rj: int | None):
        out_row, out_prov = [], []
        if li is not None:
            out_row.extend(left.rows[li])
            out_prov.extend(left.provenance[li])
        else:
            out_row.extend(Cell.missing() for _ in left.columns)
            out_prov.extend(None for _ in left.columns)
            # right join keeps the key value from the right side
            out_row[lk] = right.rows[rj][rk]
            out_prov[lk] = right.provenance[rj][rk]
        for i, _ in right_out:
            if rj is not None:
                out_row.append(right.rows[rj][i])
                out_prov.append(right.provenance[rj][i])
            else:
                out_row.append(Cell.missing())
                out_prov.append(None)
        rows.append(out_row)
        provenance.append(out_prov)

    if strategy == "right":
        left_matches: dict[int, list[int]] = {}
        for li, row in enumerate(left.rows):
            if row[lk].is_missing:
                continue
            for rj in right_matches(row[lk]):
                left_matches.setdefault(rj, []).append(li)
        for rj in range(len(right.rows)):
            found = left_matches.get(rj, [])
            if found:
                for li in found:
                    emit(li, rj)
            else:
                emit(None, rj)
    else:
        for li, row in enumerate(left.rows):
            found = right_matches(row[lk])
            if found:
                for rj in found:
                    emit(li, rj)
            elif strategy == "left":
                emit(li, None)
    return TableInstance.build(new_id, new_name or new_id, columns, rows, provenance)


# --- computed column ---

def add_computed_column(t: TableInstance, formula_text: str, new_name: str) -> TableInstance:
    from .formula import evaluate_formula, parse_formula

    if any(col.name == new_name for col in t.columns):
        raise BadArgument(f"column {new_name!r} already exists")
    node = parse_formula(formula_text)
    known = {col.name for col in t.columns}
    unknown = node.references() - known
    if unknown:
        raise UnknownColumn(f"formula references unknown columns {sorted(unknown)}")
    computed = []
    for row in t.rows:
        env = {col.name: cell for col, cell in zip(t.columns, row)}
        computed.append(evaluate_formula(node, env))
    kinds = {c.kind for c in computed if not c.is_missing}
    if kinds == {NUMBER}:
        declared = NUMBER
    elif kinds <= {TEXT} or not kinds:
        declared = TEXT
        computed = [c if c.is_missing else Cell.text(c.render()) for c in computed]
    else:
        declared = TEXT
        computed = [c if c.is_missing else Cell.text(c.render()) for c in computed]
    columns = list(t.columns) + [Column(new_name, declared)]
    rows = [list(row) + [cell] for row, cell in zip(t.rows, computed)]
    provenance = [list(prov) + [None] for prov in t.provenance]  # synthesized
    return _rebuild(t, columns, rows, provenance)


# --- type conversion ---

def convert_column_type(t: TableInstance, column: str, target_type: str,
                        cleaning_pattern: str | None = None
                        ) -> tuple[TableInstance, dict]:
    col = t.column(column)
    if target_type == col.declared_type:
        raise BadArgument(f"column {column!r} already has type {target_type}")
    if cleaning_pattern:
        try:
            re.compile(cleaning_pattern)
        except re.error as exc:
            raise BadArgument(f"bad cleaning pattern: {exc}") from exc
    idx = t.column_index(column)
    failed = 0
    converted = 0
    rows = []
    for row in t.rows:
        cell = row[idx]
        new_cell = convert_cell(cell, target_type, cleaning_pattern)
        if not cell.is_missing:
            if new_cell.is_missing:
                failed += 1
            else:
                converted += 1
        new_row = list(row)
        new_row[idx] = new_cell
        rows.append(new_row)
    columns = list(t.columns)
    columns[idx] = Column(col.name, target_type)
    report = {"converted": converted, "unconvertible": failed}
    return _rebuild(t, columns, rows, t.provenance), report


# --- fill missing ---

def fill_missing_values(t: TableInstance, column: str, strategy: str,
                        constant: Cell | None = None) -> TableInstance:
    if strategy not in FILL_STRATEGIES:
        raise BadArgument(f"unknown fill strategy {strategy!r}")
    idx = t.column_index(column)
    col = t.columns[idx]
    if strategy == "constant":
        if constant is None or constant.is_missing:
            raise BadArgument("constant strategy requires a constant value")
        if constant.kind != col.declared_type:
            raise TypeMismatch("constant does not match column type")
    elif constant is not None:
        raise BadArgument("constant only applies to the constant strategy")
    if strategy in ("mean", "median", "interpolation") and col.declared_type != NUMBER:
        raise TypeMismatch(f"{strategy} requires a numeric column")

    cells = [row[idx] for row in t.rows]
    present = [(i, c) for i, c in enumerate(cells) if not c.is_missing]
    if strategy != "constant" and not present:
        raise NoNonMissingValues(f"column {column!r} has no values to fill from")

    def fill_value(row_index: int) -> Cell:
        if strategy == "constant":
            return constant
        if strategy == "mean":
            return Cell.number(statistics.fmean(c.value for _, c in present))
        if strategy == "median":
            return Cell.number(statistics.median(c.value for _, c in present))
        if strategy == "mode":
            counts: dict = {}
            for _, c in present:
                counts[c.value] = counts.get(c.value, 0) + 1
            best = max(counts.values())
            candidates = [v for v, n in counts.items() if n == best]
            # deterministic tie-break: smallest by the column's sort order
            winner = sorted(candidates)[0]
            sample = next(c for _, c in present if c.value == winner)
            return Cell(sample.kind, winner)
        # interpolation: linear over row index; edge gaps copy the nearest value
        before = [(i, c) for i, c in present if i < row_index]
        after = [(i, c) for i, c in present if i > row_index]
        if before and after:
            i0, c0 = before[-1]
            i1, c1 = after[0]
            frac = (row_index - i0) / (i1 - i0)
            return Cell.number(c0.value + frac * (c1.value - c0.value))
        if before:
            return Cell.number(before[-1][1].value)
        return Cell.number(after[0][1].value)

    rows, provenance = [], []
    for i, (row, prov) in enumerate(zip(t.rows, t.provenance)):
        if row[idx].is_missing:
            new_row = list(row)
            new_row[idx] = fill_value(i)
            new_prov = list(prov)
            new_prov[idx] = None   # synthesized
            rows.append(new_row)
            provenance.append(new_prov)
        else:
            rows.append(list(row))
            provenance.append(list(prov))
    return _rebuild(t, t.columns, rows, provenance)


# --- search and replace ---

def search_and_replace(t: TableInstance, pattern: str, replacement: str,
                       scope_column: str | None = None,
                       use_regex: bool = False) -> tuple[TableInstance, int]:
    if use_regex:
        try:
            compiled = re.compile(pattern)
        except re.error as exc:
            raise BadArgument(f"bad regex {pattern!r}: {exc}") from exc
    elif pattern == "":
        raise BadArgument("literal pattern must be non-empty")
    col_idx = t.column_index(scope_column) if scope_column is not None else None
    total = 0
    rows, provenance = [], []
    for row, prov in zip(t.rows, t.provenance):
        new_row, new_prov = list(row), list(prov)
        for i, cell in enumerate(row):
            if col_idx is not None and i != col_idx:
                continue
            if cell.kind != TEXT:
                continue   # replacement applies to text cells only
            if use_regex:
                replaced, count = compiled.subn(replacement, cell.value)
            else:
                count = cell.value.count(pattern)
                replaced = cell.value.replace(pattern, replacement)
            if count:
                total += count
                new_row[i] = Cell.text(replaced)
                new_prov[i] = None   # synthesized
        rows.append(new_row)
        provenance.append(new_prov)
    return _rebuild(t, t.columns, rows, provenance), total


# --- rename / format ---

def rename_column(t: TableInstance, old_name: str, new_name: str) -> TableInstance:
    idx = t.column_index(old_name)
    if not new_name:
        raise BadArgument("new column name must be non-empty")
    if any(col.name == new_name for col in t.columns):
        raise BadArgument(f"column {new_name!r} already exists")
    columns = list(t.columns)
    columns[idx] = Column(new_name, columns[idx].declared_type)
    return _rebuild(t, columns, t.rows, t.provenance)


def format_column(t: TableInstance, column: str, format_pattern: str) -> TableInstance:
    base = format_pattern.split(":", 1)[0]
    if base not in FORMAT_PATTERNS:
        raise BadArgument(f"unknown format pattern {format_pattern!r}")
    idx = t.column_index(column)
    if t.columns[idx].declared_type != TEXT:
        raise TypeMismatch("format patterns apply to text columns")
    arg = format_pattern.split(":", 1)[1] if ":" in format_pattern else None

    def apply(value: str) -> str:
        if base == "currency":
            normalized = normalize_currency_text(value, default_code=arg or "USD")
            return normalized if normalized is not None else value
        if base == "date-iso":
            iso = parse_date_text(value)
            return iso if iso is not None else value
        if base == "lowercase":
            return value.lower()
        if base == "uppercase":
            return value.upper()
        return value.strip()   # trim

    rows = []
    for row in t.rows:
        cell = row[idx]
        new_row = list(row)
        if cell.kind == TEXT:
            new_row[idx] = Cell.text(apply(cell.value))
        rows.append(new_row)
    # formatting is a 1:1 rewrite of the same source value: provenance kept
    return _rebuild(t, t.columns, rows, t.provenance)


# --- reshape ---

def reshape(t: TableInstance, direction: str, key_cols: list[str],
            value_cols: list[str]) -> TableInstance:
    if direction not in ("fold", "unfold"):
        raise BadArgument(f"direction must be fold or unfold, got {direction!r}")
    for name in list(key_cols) + list(value_cols):
        t.column_index(name)
    if direction == "fold":
        return _fold(t, key_cols, value_cols)
    if len(value_cols) != 2:
        raise BadArgument("unfold needs exactly a (variable, value) column pair")
    return _unfold(t, key_cols, value_cols[0], value_cols[1])


def _fold(t: TableInstance, key_cols: list[str], value_cols: list[str]) -> TableInstance:
    if not value_cols:
        raise BadArgument("fold needs at least one value column")
    key_idx = [t.column_index(n) for n in key_cols]
    val_idx = [t.column_index(n) for n in value_cols]
    value_types = {t.columns[i].declared_type for i in val_idx}
    value_type = value_types.pop() if len(value_types) == 1 else TEXT
    columns = [t.columns[i] for i in key_idx]
    columns += [Column("variable", TEXT), Column("value", value_type)]
    rows, provenance = [], []
    for row, prov in zip(t.rows, t.provenance):
        for i in val_idx:
            cell = row[i]
            if value_type == TEXT and not cell.is_missing and cell.kind != TEXT:
                cell = Cell.text(cell.render())
            rows.append([row[k] for k in key_idx] + [Cell.text(t.columns[i].name), cell])
            provenance.append([prov[k] for k in key_idx] + [None, prov[i]])
    return _rebuild(t, columns, rows, provenance)


def _unfold(t: TableInstance, key_cols: list[str], var_col: str, val_col: str) -> TableInstance:
    key_idx = [t.column_index(n) for n in key_cols]
    vi = t.column_index(var_col)
    ci = t.column_index(val_col)
    if t.columns[vi].declared_type != TEXT:
        raise TypeMismatch("the variable column must be text")
    variables: list[str] = []
    for row in t.rows:
        if not row[vi].is_missing and row[vi].value not in variables:
            variables.append(row[vi].value)
    groups: dict[tuple, dict] = {}
    order: list[tuple] = []
    for row, prov in zip(t.rows, t.provenance):
        key = tuple(row[k].to_json().items() for k in key_idx)
        key = tuple(tuple(part) for part in key)
        if key not in groups:
            groups[key] = {"key_cells": [row[k] for k in key_idx],
                           "key_prov": [prov[k] for k in key_idx],
                           "values": {}, "prov": {}}
            order.append(key)
        if not row[vi].is_missing:
            groups[key]["values"][row[vi].value] = row[ci]
            groups[key]["prov"][row[vi].value] = prov[ci]
    columns = [t.columns[k] for k in key_idx]
    columns += [Column(v, t.columns[ci].declared_type) for v in variables]
    rows, provenance = [], []
    for key in order:
        g = groups[key]
        row = list(g["key_cells"])
        prov = list(g["key_prov"])
        for v in variables:
            row.append(g["values"].get(v, Cell.missing()))
            prov.append(g["prov"].get(v))
        rows.append(row)
        provenance.append(prov)
    return _rebuild(t, columns, rows, provenance)


# --- aggregate ---

def aggregate(t: TableInstance, group_by: list[str],
              aggregations: list[tuple[str, str]]) -> TableInstance:
    if not aggregations:
        raise BadArgument("at least one aggregation is required")
    key_idx = [t.column_index(n) for n in group_by]
    specs = []
    for column, fn in aggregations:
        if fn not in AGG_FUNCTIONS:
            raise BadArgument(f"unknown aggregation {fn!r}")
        idx = t.column_index(column)
        if fn != "count" and t.columns[idx].declared_type != NUMBER:
            raise TypeMismatch(f"{fn} requires a numeric column")
        specs.append((idx, column, fn))
    groups: dict[tuple, list[int]] = {}
    order: list[tuple] = []
    for i, row in enumerate(t.rows):
        key = tuple((row[k].kind, row[k].value) for k in key_idx)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(i)
    columns = [t.columns[k] for k in key_idx]
    for _, column, fn in specs:
        dtype = NUMBER
        columns.append(Column(f"{fn}_{column}", dtype))
    rows = []
    for key in order:
        members = groups[key]
        first = t.rows[members[0]]
        out = [first[k] for k in key_idx]
        for idx, _, fn in specs:
            values = [t.rows[i][idx].value for i in members
                      if not t.rows[i][idx].is_missing]
            if fn == "count":
                out.append(Cell.number(float(len(values))))
            elif fn == "sum":
                out.append(Cell.number(float(sum(values))))
            elif not values:
                out.append(Cell.missing())
            elif fn == "mean":
                out.append(Cell.number(statistics.fmean(values)))
            elif fn == "min":
                out.append(Cell.number(min(values)))
            else:
                out.append(Cell.number(max(values)))
        rows.append(out)
    provenance = [[None] * len(columns) for _ in rows]
    return _rebuild(t, columns, rows, provenance)


# --- positional transforms ---

def positional_transform(t: TableInstance, op: str, indices: list[int]) -> TableInstance:
    if op not in POSITIONAL_OPS:
        raise BadArgument(f"unknown positional op {op!r}")
    if op == "delete-rows":
        bad = [i for i in indices if not 0 <= i < len(t.rows)]
        if bad:
            raise BadArgument(f"row indices out of range: {bad}")
        keep = [i for i in range(len(t.rows)) if i not in set(indices)]
        rows = [t.rows[i] for i in keep]
        provenance = [t.provenance[i] for i in keep]
        return _rebuild(t, t.columns, rows, provenance)
    if op == "delete-cols":
        bad = [i for i in indices if not 0 <= i < len(t.columns)]
        if bad:
            raise BadArgument(f"column indices out of range: {bad}")
        keep = [i for i in range(len(t.columns)) if i not in set(indices)]
        if not keep:
            raise BadArgument("cannot delete every column")
        columns = [t.columns[i] for i in keep]
        rows = [[row[i] for i in keep] for row in t.rows]
        provenance = [[prov[i] for i in keep] for prov in t.provenance]
        return _rebuild(t, columns, rows, provenance)
    if len(indices) != 2:
        raise BadArgument("move-col takes [from, to]")
    src, dst = indices
    if not (0 <= src < len(t.columns) and 0 <= dst < len(t.columns)):
        raise BadArgument(f"column indices out of range: {indices}")
    columns = list(t.columns)
    col = columns.pop(src)
    columns.insert(dst, col)
    rows = []
    for row in t.rows:
        cells = list(row)
        cell = cells.pop(src)
        cells.insert(dst, cell)
        rows.append(cells)
    provenance = []
    for prow in t.provenance:
        cells = list(prow)
        cell = cells.pop(src)
        cells.insert(dst, cell)
        provenance.append(cells)
    return _rebuild(t, columns, rows, provenance)
