"""Typed cell values and the conversion helpers that move between them.

Cells are immutable tagged values. Missing is an explicit variant so that
fill strategies and type conversion have unambiguous semantics; it is never
represented by an empty string. Numbers must be finite, dates are ISO-8601
day-precision strings, image refs are syntactically valid URLs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from datetime import date as _date
from urllib.parse import urlparse

from .errors import BadArgument

TEXT = "text"
NUMBER = "number"
BOOLEAN = "boolean"
DATE = "date"
IMAGE_REF = "image-ref"
MISSING = "missing"

KINDS = (TEXT, NUMBER, BOOLEAN, DATE, IMAGE_REF, MISSING)
# declared column types exclude missing
COLUMN_TYPES = (TEXT, NUMBER, BOOLEAN, DATE, IMAGE_REF)

_ISO_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")

# leading currency markers stripped by the default number-cleaning rule
CURRENCY_PREFIXES = ("HK$", "US$", "$", "€", "£", "¥")

CURRENCY_CODES = {
    "HK$": "HKD",
    "US$": "USD",
    "$": "USD",
    "€": "EUR",
    "£": "GBP",
    "¥": "JPY",
}


@dataclass(frozen=True, slots=True)
class Cell:
    """One tagged cell value. Construct through the factory methods."""

    kind: str
    value: str | float | bool | None

    @staticmethod
    def text(value: str) -> "Cell":
        return Cell(TEXT, str(value))

    @staticmethod
    def number(value: float) -> "Cell":
        value = float(value)
        if not math.isfinite(value):
            raise BadArgument("number cells must be finite")
        return Cell(NUMBER, value)

    @staticmethod
    def boolean(value: bool) -> "Cell":
        return Cell(BOOLEAN, bool(value))

    @staticmethod
    def date(value: str) -> "Cell":
        if not _ISO_DATE.match(value):
            raise BadArgument(f"dates must be ISO-8601 day precision, got {value!r}")
        y, m, d = (int(p) for p in value.split("-"))
        try:
            _date(y, m, d)
        except ValueError as exc:
            raise BadArgument(f"invalid calendar date {value!r}") from exc
        return Cell(DATE, value)

    @staticmethod
    def image(url: str) -> "Cell":
        parsed = urlparse(url)
        if not parsed.scheme and not parsed.path:
            raise BadArgument(f"image ref is not a URL: {url!r}")
        if any(ch.isspace() for ch in url):
            raise BadArgument(f"image ref contains whitespace: {url!r}")
        return Cell(IMAGE_REF, url)

    @staticmethod
    def missing() -> "Cell":
        return _MISSING

    @property
    def is_missing(self) -> bool:
        return self.kind == MISSING

    def render(self) -> str:
        """Canonical text rendering, used by text conversion and display."""
        if self.kind == MISSING:
            return ""
        if self.kind == NUMBER:
            return render_number(self.value)
        if self.kind == BOOLEAN:
            return "true" if self.value else "false"
        return str(self.value)

    def sort_key(self):
        """Orderable key within one declared type; missing handled by callers."""
        if self.kind == NUMBER:
            return self.value
        if self.kind == BOOLEAN:
            return 1 if self.value else 0
        return str(self.value)

    def to_json(self) -> dict:
        if self.kind == MISSING:
            return {"t": MISSING}
        return {"t": self.kind, "v": self.value}

    @staticmethod
    def from_json(obj: dict) -> "Cell":
        kind = obj.get("t")
        if kind == MISSING:
            return _MISSING
        if kind not in KINDS:
            raise BadArgument(f"unknown cell kind {kind!r}")
        value = obj.get("v")
        if kind == NUMBER:
            return Cell.number(value)
        if kind == BOOLEAN:
            return Cell.boolean(value)
        if kind == DATE:
            return Cell.date(value)
        if kind == IMAGE_REF:
            return Cell.image(value)
        return Cell.text(value)


_MISSING = Cell(MISSING, None)


def render_number(value: float) -> str:
    """Integral floats render without the trailing .0 (1299.0 -> "1299")."""
    if value == int(value) and abs(value) < 1e15:
        return str(int(value))
    return repr(float(value))


_NUMBER_BODY = re.compile(
    r"^[-+]?\d{1,3}(,\d{3})*(\.\d+)?$|^[-+]?\d+(\.\d+)?([eE][-+]?\d+)?$")


def clean_number_text(text: str) -> float | None:
    """Default cleaning rule for number conversion.

    Strips a leading currency marker (HK$, US$, $, €, £, ¥), thousands
    separators, and surrounding whitespace. Returns None when the remainder
    is not a plain decimal number.
    """
    s = text.strip()
    for prefix in CURRENCY_PREFIXES:
        if s.startswith(prefix):
            s = s[len(prefix):].strip()
            break
    if not _NUMBER_BODY.match(s):
        return None
    try:
        value = float(s.replace(",", ""))
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value


_MONTHS = {
    name: i + 1
    for i, name in enumerate(
        ["january", "february", "march", "april", "may", "june", "july",
         "august", "september", "october", "november", "december"]
    )
}
_MONTH_DAY_YEAR = re.compile(r"^([A-Za-z]+)\.?\s+(\d{1,2}),?\s+(\d{4})$")
_DAY_MONTH_YEAR = re.compile(r"^(\d{1,2})\.?\s+([A-Za-z]+)\.?\s+(\d{4})$")
_SLASH_DATE = re.compile(r"^(\d{4})[/-](\d{1,2})[/-](\d{1,2})$")


def _month_number(name: str) -> int | None:
    name = name.lower()
    for full, num in _MONTHS.items():
        if full.startswith(name) and len(name) >= 3:
            return num
    return None


def parse_date_text(text: str) -> str | None:
    """Parse a handful of unambiguous date forms; returns ISO or None.

    Accepted: ISO (2024-05-01), slash ISO (2024/5/1), "May 1, 2024",
    "1 May 2024". Anything else, including ambiguous numeric forms like
    05/01/2024, is rejected.
    """
    s = text.strip()
    if _ISO_DATE.match(s):
        try:
            Cell.date(s)
            return s
        except BadArgument:
            return None
    m = _SLASH_DATE.match(s)
    if m:
        y, mo, d = (int(g) for g in m.groups())
        return _checked_iso(y, mo, d)
    m = _MONTH_DAY_YEAR.match(s)
    if m:
        mo = _month_number(m.group(1))
        if mo is None:
            return None
        return _checked_iso(int(m.group(3)), mo, int(m.group(2)))
    m = _DAY_MONTH_YEAR.match(s)
    if m:
        mo = _month_number(m.group(2))
        if mo is None:
            return None
        return _checked_iso(int(m.group(3)), mo, int(m.group(1)))
    return None


def _checked_iso(y: int, m: int, d: int) -> str | None:
    try:
        return _date(y, m, d).isoformat()
    except ValueError:
        return None


# Currency normalization: accepts symbol-prefixed ("$", "HK$", "US $"),
# code-prefixed ("USD 30"), or code-suffixed ("1299 USD") amounts and
# renders them all as "<amount> <CODE>".
_CODE_SUFFIX = re.compile(r"^(.*?)\s*([A-Za-z]{3})$")
_CODE_PREFIX = re.compile(r"^([A-Za-z]{3})\s+(.*)$")
_SYMBOL_PREFIX = re.compile(r"^(HK|US)?\s*([$€£¥])\s*(.*)$")
_KNOWN_CODES = {"USD", "EUR", "GBP", "JPY", "HKD", "CNY", "AUD", "CAD", "CHF", "INR", "KRW", "SGD"}
_SYMBOL_CODES = {("HK", "$"): "HKD", ("US", "$"): "USD", ("", "$"): "USD",
                 ("", "€"): "EUR", ("", "£"): "GBP", ("", "¥"): "JPY"}


def normalize_currency_text(text: str, default_code: str = "USD") -> str | None:
    """Canonicalize a currency string to "<amount> <CODE>".

    "US $1,299" -> "1299 USD"; "1299 USD" -> "1299 USD"; "HK$ 888" ->
    "888 HKD". Returns None when no amount can be recognized.
    """
    s = text.strip()
    code = None
    m = _CODE_SUFFIX.match(s)
    if m and m.group(2).upper() in _KNOWN_CODES:
        code = m.group(2).upper()
        s = m.group(1).strip()
    if code is None:
        m = _CODE_PREFIX.match(s)
        if m and m.group(1).upper() in _KNOWN_CODES:
            code = m.group(1).upper()
            s = m.group(2).strip()
    m = _SYMBOL_PREFIX.match(s)
    if m:
        country, symbol = (m.group(1) or "").upper(), m.group(2)
        if (country, symbol) in _SYMBOL_CODES:
            if code is None:
                code = _SYMBOL_CODES[(country, symbol)]
            s = m.group(3).strip()
    value = clean_number_text(s)
    if value is None:
        return None
    return f"{render_number(value)} {code or default_code}"


def convert_cell(cell: Cell, target: str, cleaning_pattern: str | None = None) -> Cell:
    """Convert one cell to the target type; unconvertible becomes missing."""
    if cell.is_missing:
        return cell
    text = cell.render()
    if cleaning_pattern:
        text = re.sub(cleaning_pattern, "", text).strip()
    if target == TEXT:
        return Cell.text(text)
    if target == NUMBER:
        if cell.kind == BOOLEAN:
            return Cell.number(1.0 if cell.value else 0.0)
        value = clean_number_text(text)
        return Cell.number(value) if value is not None else Cell.missing()
    if target == BOOLEAN:
        if cell.kind == NUMBER:
            return Cell.boolean(cell.value != 0)
        lowered = text.strip().lower()
        if lowered in ("true", "yes", "1"):
            return Cell.boolean(True)
        if lowered in ("false", "no", "0"):
            return Cell.boolean(False)
        return Cell.missing()
    if target == DATE:
        iso = parse_date_text(text)
        return Cell.date(iso) if iso else Cell.missing()
    if target == IMAGE_REF:
        try:
            return Cell.image(text.strip())
        except BadArgument:
            return Cell.missing()
    raise BadArgument(f"unknown target type {target!r}")
