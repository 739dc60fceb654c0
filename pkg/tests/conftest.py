import pytest

from databoard.cells import Cell
from databoard.catalog import ToolExecutor
from databoard.instances import Column, TableInstance
from databoard.workspace import Workspace


def cell(value):
    """Shorthand: build a Cell from a plain Python value (None = missing)."""
    if value is None:
        return Cell.missing()
    if isinstance(value, bool):
        return Cell.boolean(value)
    if isinstance(value, (int, float)):
        return Cell.number(float(value))
    return Cell.text(value)


def table(id, columns, rows, provenance=None):
    """columns: [(name, type)]; rows: lists of plain values."""
    cols = [Column(n, t) for n, t in columns]
    cell_rows = [[cell(v) for v in row] for row in rows]
    return TableInstance.build(id, id, cols, cell_rows, provenance)


def values(t, column):
    """Plain-value view of one column (None = missing)."""
    return [None if c.is_missing else c.value for c in t.column_cells(column)]


def grid(t):
    return [[None if c.is_missing else c.value for c in row] for row in t.rows]


@pytest.fixture
def executor():
    return ToolExecutor()


@pytest.fixture
def workspace():
    return Workspace("test")
