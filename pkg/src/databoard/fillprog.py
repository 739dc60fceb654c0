"""Programming-by-example string programs for in-situ autocomplete.

The DSL is deliberately tiny so minimal-program search stays exhaustive and
deterministic. A program is an ordered list of emitter steps; each step
produces one text segment from the row and the row's output is their
concatenation:

    const(s)            literal text
    col(c)              the cell text of column c
    fold(c)             case-folded (lowercased) cell text
    strip(c, chars)     cell text with every occurrence of the chars removed
    split(c, delim, k)  the k-th piece after splitting on delim (-1 = last)
    sub(c, anchor, side)  text before/after the first anchor occurrence

Inference returns the shortest consistent program; ties break on the
documented step order above (earlier kinds first, then parameter order).
Rows with a missing referenced cell produce a missing output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .cells import Cell
from .errors import BadArgument, ConflictingExamples

MAX_PROGRAM_LENGTH = 6

_KIND_ORDER = {"const": 0, "col": 1, "fold": 2, "strip": 3, "split": 4, "sub": 5}


@dataclass(frozen=True)
class Step:
    kind: str
    column: str | None = None
    text: str | None = None      # const literal / strip chars / split delim / sub anchor
    index: int | None = None     # split piece
    side: str | None = None      # sub: "before" | "after"

    def order_key(self):
        return (_KIND_ORDER[self.kind], self.column or "", self.text or "",
                self.index if self.index is not None else 0, self.side or "")

    def emit(self, row: dict[str, str]) -> str | None:
        """Segment for one row; None when a referenced cell is missing."""
        if self.kind == "const":
            return self.text
        value = row.get(self.column)
        if value is None:
            return None
        if self.kind == "col":
            return value
        if self.kind == "fold":
            return value.lower()
        if self.kind == "strip":
            out = value
            for ch in self.text:
                out = out.replace(ch, "")
            return out
        if self.kind == "split":
            pieces = value.split(self.text)
            if self.index == -1:
                return pieces[-1]
            if self.index >= len(pieces):
                return None
            return pieces[self.index]
        if self.kind == "sub":
            pos = value.find(self.text)
            if pos < 0:
                return None
            return value[:pos] if self.side == "before" else value[pos + len(self.text):]
        raise BadArgument(f"unknown step kind {self.kind!r}")

    def render(self) -> str:
        if self.kind == "const":
            return f"const({self.text!r})"
        if self.kind == "col":
            return f"col({self.column})"
        if self.kind == "fold":
            return f"fold({self.column})"
        if self.kind == "strip":
            return f"strip({self.column}, {self.text!r})"
        if self.kind == "split":
            return f"split({self.column}, {self.text!r}, {self.index})"
        return f"sub({self.column}, {self.text!r}, {self.side})"

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for key in ("column", "text", "index", "side"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out

    @staticmethod
    def from_json(obj: dict) -> "Step":
        return Step(obj["kind"], obj.get("column"), obj.get("text"),
                    obj.get("index"), obj.get("side"))


@dataclass(frozen=True)
class FillProgram:
    steps: tuple[Step, ...]

    def __post_init__(self):
        if not self.steps:
            raise BadArgument("programs must have at least one step")
        if len(self.steps) > MAX_PROGRAM_LENGTH:
            raise BadArgument("program too long")

    def references(self) -> set[str]:
        return {s.column for s in self.steps if s.column is not None}

    def run_row(self, row: dict[str, str]) -> str | None:
        parts = []
        for step in self.steps:
            segment = step.emit(row)
            if segment is None:
                return None
            parts.append(segment)
        return "".join(parts)

    def render(self) -> str:
        if len(self.steps) == 1:
            return self.steps[0].render()
        return "concat(" + ", ".join(s.render() for s in self.steps) + ")"

    def to_json(self) -> dict:
        return {"steps": [s.to_json() for s in self.steps]}

    @staticmethod
    def from_json(obj: dict) -> "FillProgram":
        return FillProgram(tuple(Step.from_json(s) for s in obj["steps"]))


def _row_text(row: dict[str, Cell]) -> dict[str, str]:
    return {name: cell.render() for name, cell in row.items() if not cell.is_missing}


def apply_fill_program(program: FillProgram, rows: list[dict[str, Cell]]) -> list[Cell]:
    """One output cell per row; missing inputs propagate to missing outputs."""
    out = []
    for row in rows:
        result = program.run_row(_row_text(row))
        out.append(Cell.missing() if result is None else Cell.text(result))
    return out


def _common_prefix(strings: list[str]) -> str:
    if not strings:
        return ""
    shortest = min(strings, key=len)
    for i, ch in enumerate(shortest):
        if any(s[i] != ch for s in strings):
            return shortest[:i]
    return shortest


_NON_WORD = re.compile(r"[^A-Za-z0-9]")


def _punct_chars(values: list[str]) -> list[str]:
    chars = sorted({ch for v in values for ch in _NON_WORD.findall(v)})
    return chars[:6]


def _subset_strings(chars: list[str]) -> list[str]:
    subsets = []
    for mask in range(1, 1 << len(chars)):
        subsets.append("".join(chars[i] for i in range(len(chars)) if mask >> i & 1))
    subsets.sort(key=lambda s: (len(s), s))
    return subsets


def _column_steps(columns: list[str], values_by_column: dict[str, list[str]]) -> list[Step]:
    """Every non-const candidate step, in the documented deterministic order."""
    steps: list[Step] = []
    for column in columns:
        steps.append(Step("col", column))
    for column in columns:
        steps.append(Step("fold", column))
    for column in columns:
        for chars in _subset_strings(_punct_chars(values_by_column[column])):
            steps.append(Step("strip", column, chars))
    for column in columns:
        delims = _punct_chars(values_by_column[column])
        if " " not in delims and any(" " in v for v in values_by_column[column]):
            delims.append(" ")
        for delim in sorted(delims):
            max_pieces = max(len(v.split(delim)) for v in values_by_column[column])
            for k in list(range(min(max_pieces, 6))) + [-1]:
                steps.append(Step("split", column, delim, k))
    for column in columns:
        anchors = _punct_chars(values_by_column[column])
        if any(" " in v for v in values_by_column[column]):
            anchors.append(" ")
        for anchor in sorted(anchors):
            for side in ("before", "after"):
                steps.append(Step("sub", column, anchor, side))
    return steps


def infer_fill_program(examples: list[tuple[dict[str, Cell], Cell]],
                       max_length: int = MAX_PROGRAM_LENGTH) -> FillProgram | None:
    """Shortest program consistent with all examples, or None.

    Search is iterative-deepening DFS with prefix pruning; candidates are
    explored in the documented step order, so the result is deterministic.
    """
    if len(examples) < 2:
        raise BadArgument("inference needs at least two examples")
    rows = [_row_text(row) for row, _ in examples]
    outputs = []
    for row, out in examples:
        if out.is_missing:
            raise BadArgument("example outputs must be non-missing")
        outputs.append(out.render())
    for i in range(len(examples)):
        for j in range(i + 1, len(examples)):
            if rows[i] == rows[j] and outputs[i] != outputs[j]:
                raise ConflictingExamples(
                    "identical inputs map to different outputs")

    columns = sorted({name for row in rows for name in row})
    values_by_column = {
        c: [row[c] for row in rows if c in row] for c in columns}
    # a column referenced by a program must be present in every example row
    usable = [c for c in columns if all(c in row for row in rows)]
    values_by_column = {c: values_by_column[c] for c in usable}
    column_steps = _column_steps(usable, values_by_column)

    def segments_for(step: Step) -> list[str] | None:
        segments = []
        for row in rows:
            segment = step.emit(row)
            if segment is None:
                return None
            segments.append(segment)
        return segments

    evaluated = [(step, segs) for step in column_steps
                 if (segs := segments_for(step)) is not None]

    def search(remaining: list[str], depth_left: int, acc: list[Step]):
        if all(r == "" for r in remaining):
            return list(acc)
        if depth_left == 0:
            return None
        # const candidates: prefixes shared by every remaining suffix
        common = _common_prefix(remaining)
        for length in range(1, len(common) + 1):
            acc.append(Step("const", text=common[:length]))
            found = search([r[length:] for r in remaining], depth_left - 1, acc)
            acc.pop()
            if found:
                return found
        for step, segments in evaluated:
            if all(seg == "" for seg in segments):
                continue
            if all(r.startswith(seg) for r, seg in zip(remaining, segments)):
                acc.append(step)
                found = search([r[len(seg):] for r, seg in zip(remaining, segments)],
                               depth_left - 1, acc)
                acc.pop()
                if found:
                    return found
        return None

    for limit in range(1, max_length + 1):
        steps = search(list(outputs), limit, [])
        if steps:
            return FillProgram(tuple(steps))
    return None


# --- normalization and extraneous-character detection ---

_KEY_STRIP = re.compile(r"[^a-z0-9]+")


def _cluster_key(value: str) -> str:
    return _KEY_STRIP.sub("", value.casefold())


@dataclass(frozen=True)
class CellEdit:
    row: int
    old: Cell
    new: Cell


@dataclass(frozen=True)
class NormalizationProposal:
    target: str               # the user's most recently written form
    values_to_replace: tuple[str, ...]
    count: int                # remaining cells covered by the proposal


def detect_normalization(column_cells: list[Cell],
                         recent_edits: list[CellEdit]) -> NormalizationProposal | None:
    """Fires when the user just rewrote >=2 same-cluster values to one form."""
    text_edits = [e for e in recent_edits
                  if e.old.kind == "text" and e.new.kind == "text"
                  and e.old.value != e.new.value]
    if len(text_edits) < 2:
        return None
    last_two = text_edits[-2:]
    target = last_two[-1].new.value
    if any(e.new.value != target for e in last_two):
        return None
    keys = {_cluster_key(e.old.value) for e in last_two}
    if len(keys) != 1:
        return None
    cluster = keys.pop()
    if not cluster:
        return None
    remaining = [c.value for c in column_cells
                 if c.kind == "text" and c.value != target
                 and _cluster_key(c.value) == cluster]
    if not remaining:
        return None
    values = tuple(sorted(set(remaining)))
    return NormalizationProposal(target, values, len(remaining))


@dataclass(frozen=True)
class RemovalProposal:
    substring: str
    count: int                # remaining cells still containing the substring


def _deleted_substring(old: str, new: str) -> str | None:
    """The substring removed when new is old minus one contiguous chunk.

    Single-gap diffs are ambiguous ("Sponsored Sony" -> "Sony" could drop
    "ponsored S" after the shared S); the leftmost gap is the canonical
    reading, so repeated deletions of one marker compare equal.
    """
    gap = len(old) - len(new)
    if gap <= 0:
        return None
    for split in range(len(new) + 1):
        if old[:split] == new[:split] and old[split + gap:] == new[split:]:
            return old[split:split + gap]
    return None


def detect_extraneous(column_cells: list[Cell],
                      recent_edits: list[CellEdit]) -> RemovalProposal | None:
    """Fires when the user deleted the same substring from two cells."""
    deletions = []
    for edit in recent_edits:
        if edit.old.kind != "text" or edit.new.kind != "text":
            continue
        removed = _deleted_substring(edit.old.value, edit.new.value)
        if removed is not None:
            deletions.append(removed)
    if len(deletions) < 2:
        return None
    substring = deletions[-1]
    if deletions[-2] != substring:
        return None
    remaining = sum(1 for c in column_cells
                    if c.kind == "text" and substring in c.value)
    if remaining == 0:
        return None
    return RemovalProposal(substring, remaining)
