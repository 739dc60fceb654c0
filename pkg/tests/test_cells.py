import math

import pytest
from hypothesis import given, strategies as st

from databoard.cells import (Cell, clean_number_text, convert_cell,
                             normalize_currency_text, parse_date_text,
                             render_number)
from databoard.errors import BadArgument


class TestCellInvariants:
    def test_number_must_be_finite(self):
        with pytest.raises(BadArgument):
            Cell.number(float("nan"))
        with pytest.raises(BadArgument):
            Cell.number(float("inf"))

    def test_missing_is_distinct_from_empty_string(self):
        assert Cell.text("").kind == "text"
        assert Cell.missing().kind == "missing"
        assert Cell.text("") != Cell.missing()

    def test_date_day_precision(self):
        assert Cell.date("2024-05-01").value == "2024-05-01"
        with pytest.raises(BadArgument):
            Cell.date("2024-5-1")
        with pytest.raises(BadArgument):
            Cell.date("2024-02-30")

    def test_image_ref_must_be_url_like(self):
        assert Cell.image("https://x.test/a.jpg").kind == "image-ref"
        with pytest.raises(BadArgument):
            Cell.image("not a url at all")

    def test_json_round_trip(self):
        for cell in (Cell.text("hi"), Cell.number(1.5), Cell.boolean(True),
                     Cell.date("2020-01-02"), Cell.image("https://x/i.png"),
                     Cell.missing()):
            assert Cell.from_json(cell.to_json()) == cell

    @given(st.floats(allow_nan=False, allow_infinity=False, width=32))
    def test_number_round_trip(self, value):
        cell = Cell.number(value)
        assert Cell.from_json(cell.to_json()).value == cell.value


class TestNumberCleaning:
    def test_currency_string_to_number(self):
        assert clean_number_text("$1,299.00") == 1299.0

    def test_unconvertible_is_none(self):
        assert clean_number_text("N/A") is None

    def test_hk_dollar_prefix(self):
        assert clean_number_text("HK$ 888") == 888.0

    @pytest.mark.parametrize("text,expected", [
        ("  42 ", 42.0),
        ("€9.99", 9.99),
        ("£1,000", 1000.0),
        ("¥500", 500.0),
        ("-3.5", -3.5),
        ("1,23", None),          # malformed grouping
        ("12abc", None),
        ("", None),
    ])
    def test_cleaning_table(self, text, expected):
        assert clean_number_text(text) == expected


# hand-built normalization oracle: 20 forms and their canonical rendering
CURRENCY_FORMS = [
    ("US $1,299", "1299 USD"),
    ("1299 USD", "1299 USD"),
    ("$1,299.00", "1299 USD"),
    ("HK$ 888", "888 HKD"),
    ("HK$9,880", "9880 HKD"),
    ("€2.500", "2.5 EUR"),       # dot is always decimal; no locale grouping
    ("€2,500", "2500 EUR"),
    ("£15", "15 GBP"),
    ("¥1,200", "1200 JPY"),
    ("USD 30", "30 USD"),
    ("hkd 75", "75 HKD"),
    ("42", "42 USD"),            # default code
    ("  $99  ", "99 USD"),
    ("1299.50 USD", "1299.5 USD"),
    ("US $0", "0 USD"),
    ("EUR 7.25", "7.25 EUR"),
    ("$1,299,000", "1299000 USD"),
    ("free", None),
    ("N/A", None),
    ("$ 12.00", "12 USD"),
]


@pytest.mark.parametrize("text,expected", CURRENCY_FORMS)
def test_currency_normalization_oracle(text, expected):
    assert normalize_currency_text(text) == expected


class TestDates:
    @pytest.mark.parametrize("text,expected", [
        ("2024-05-01", "2024-05-01"),
        ("2024/5/1", "2024-05-01"),
        ("May 1, 2024", "2024-05-01"),
        ("1 May 2024", "2024-05-01"),
        ("13/05/2024", None),     # ambiguous numeric form rejected
        ("not a date", None),
    ])
    def test_parse(self, text, expected):
        assert parse_date_text(text) == expected


class TestConvertCell:
    def test_text_to_number_with_default_cleaning(self):
        assert convert_cell(Cell.text("$1,299.00"), "number") == Cell.number(1299.0)

    def test_unconvertible_becomes_missing(self):
        assert convert_cell(Cell.text("N/A"), "number").is_missing

    def test_cleaning_pattern_applies_first(self):
        cell = convert_cell(Cell.text("1299 USD"), "number",
                            cleaning_pattern=r"\s*[A-Z]{3}$")
        assert cell == Cell.number(1299.0)

    def test_missing_stays_missing(self):
        assert convert_cell(Cell.missing(), "number").is_missing

    def test_number_to_text_render(self):
        assert convert_cell(Cell.number(1299.0), "text") == Cell.text("1299")
        assert render_number(2.5) == "2.5"

    def test_boolean_paths(self):
        assert convert_cell(Cell.text("yes"), "boolean") == Cell.boolean(True)
        assert convert_cell(Cell.number(0.0), "boolean") == Cell.boolean(False)
        assert convert_cell(Cell.text("maybe"), "boolean").is_missing

    @given(st.floats(min_value=-1e12, max_value=1e12,
                     allow_nan=False, allow_infinity=False))
    def test_number_text_round_trip(self, value):
        text = convert_cell(Cell.number(value), "text")
        back = convert_cell(text, "number")
        assert not back.is_missing
        assert math.isclose(back.value, value, rel_tol=1e-12, abs_tol=1e-9)
