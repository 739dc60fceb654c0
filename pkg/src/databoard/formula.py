"""Row formula language for computed columns.

Grammar (EBNF, also documented in docs/formula.md):

    expr    = term , { ("+" | "-") , term } ;
    term    = factor , { ("*" | "/") , factor } ;
    factor  = number | string | column | call | "(" , expr , ")" | "-" , factor ;
    call    = fname , "(" , expr , ")" ;
    fname   = "abs" | "round" | "len" | "lower" | "upper" ;
    column  = ident | "[" , { any char except "]" } , "]" ;
    ident   = letter | "_" , { letter | digit | "_" } ;
    number  = digit , { digit } , [ "." , { digit } ] ;
    string  = '"' ... '"' | "'" ... "'" ;

"+" adds numbers and concatenates text. Per-row faults (missing operand,
division by zero, operand type mismatch) make that row's result missing;
they never abort the whole column.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .cells import Cell
from .errors import FormulaParseError

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>\d+(?:\.\d+)?)"
    r"|(?P<string>\"[^\"]*\"|'[^']*')"
    r"|(?P<bracket>\[[^\]]+\])"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>[-+*/()])"
    r")"
)

FUNCTIONS = ("abs", "round", "len", "lower", "upper")


@dataclass(frozen=True)
class Node:
    op: str                      # "num", "str", "col", "call", "+", "-", "*", "/", "neg"
    value: object = None
    args: tuple = ()

    def references(self) -> set[str]:
        refs = set()
        if self.op == "col":
            refs.add(self.value)
        for arg in self.args:
            refs |= arg.references()
        return refs


def tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if not match or match.end() == pos:
            remainder = text[pos:].strip()
            if not remainder:
                break
            raise FormulaParseError(f"unexpected character at {remainder[:10]!r}")
        pos = match.end()
        for group in ("number", "string", "bracket", "ident", "op"):
            value = match.group(group)
            if value is not None:
                tokens.append((group, value))
                break
    return tokens


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else (None, None)

    def take(self):
        token = self.peek()
        self.pos += 1
        return token

    def expect_op(self, op: str):
        kind, value = self.take()
        if kind != "op" or value != op:
            raise FormulaParseError(f"expected {op!r}, got {value!r}")

    def parse(self) -> Node:
        node = self.expr()
        if self.pos != len(self.tokens):
            raise FormulaParseError(f"trailing input at {self.peek()[1]!r}")
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            node = Node(op, args=(node, self.term()))
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            node = Node(op, args=(node, self.factor()))
        return node

    def factor(self) -> Node:
        kind, value = self.take()
        if kind == "number":
            return Node("num", float(value))
        if kind == "string":
            return Node("str", value[1:-1])
        if kind == "bracket":
            return Node("col", value[1:-1])
        if kind == "ident":
            if value in FUNCTIONS and self.peek() == ("op", "("):
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return Node("call", value, (arg,))
            return Node("col", value)
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "op" and value == "-":
            return Node("neg", args=(self.factor(),))
        raise FormulaParseError(f"unexpected token {value!r}")


def parse_formula(text: str) -> Node:
    if not text or not text.strip():
        raise FormulaParseError("empty formula")
    return _Parser(tokenize(text)).parse()


class _RowFault(Exception):
    """Per-row evaluation fault; the row's result becomes missing."""


def _eval(node: Node, row: dict[str, Cell]):
    if node.op == "num":
        return node.value
    if node.op == "str":
        return node.value
    if node.op == "col":
        cell = row[node.value]
        if cell.is_missing:
            raise _RowFault()
        if cell.kind == "number":
            return cell.value
        return cell.render()
    if node.op == "call":
        arg = _eval(node.args[0], row)
        name = node.value
        if name == "abs":
            _require_number(arg)
            return abs(arg)
        if name == "round":
            _require_number(arg)
            return float(round(arg))
        if name == "len":
            return float(len(arg)) if isinstance(arg, str) else _fault()
        if name == "lower":
            return arg.lower() if isinstance(arg, str) else _fault()
        if name == "upper":
            return arg.upper() if isinstance(arg, str) else _fault()
    if node.op == "neg":
        value = _eval(node.args[0], row)
        _require_number(value)
        return -value
    left = _eval(node.args[0], row)
    right = _eval(node.args[1], row)
    if node.op == "+":
        if isinstance(left, str) and isinstance(right, str):
            return left + right
        if isinstance(left, float) and isinstance(right, float):
            return left + right
        raise _RowFault()
    _require_number(left)
    _require_number(right)
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        if right == 0:
            raise _RowFault()
        return left / right
    raise FormulaParseError(f"unknown node {node.op!r}")


def _require_number(value):
    if not isinstance(value, float):
        raise _RowFault()


def _fault():
    raise _RowFault()


def evaluate_formula(node: Node, row: dict[str, Cell]) -> Cell:
    """Evaluate one row; any per-row fault yields a missing cell."""
    try:
        result = _eval(node, row)
    except _RowFault:
        return Cell.missing()
    if isinstance(result, str):
        return Cell.text(result)
    if not math.isfinite(result):
        return Cell.missing()
    return Cell.number(result)
