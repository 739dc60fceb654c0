import random
import re

import pytest

from databoard import transforms
from databoard.cells import Cell
from databoard.errors import (BadArgument, JoinTypeMismatch,
                              NoNonMissingValues, TypeMismatch, UnknownColumn)
from databoard.instances import SourceRef
from databoard.transforms import FilterCondition

from conftest import cell, grid, table, values


# --- sort ---

class TestSort:
    def test_sorted_input_is_unchanged(self):
        t = table("T", [("n", "number")], [[1.0], [2.0], [3.0]])
        assert values(transforms.table_sort(t, "n", "asc"), "n") == [1.0, 2.0, 3.0]

    def test_missing_sorts_last(self):
        t = table("T", [("n", "number")], [[3.0], [None], [1.0]])
        assert values(transforms.table_sort(t, "n", "asc"), "n") == [1.0, 3.0, None]
        assert values(transforms.table_sort(t, "n", "desc"), "n") == [3.0, 1.0, None]

    def test_unknown_column(self):
        t = table("T", [("n", "number")], [[1.0]])
        with pytest.raises(UnknownColumn):
            transforms.table_sort(t, "zzz", "asc")

    def test_stability_with_sequence_tags(self):
        rows = [[1.0, float(i)] for i in range(6)]
        rows[1][0] = rows[3][0] = 2.0
        t = table("T", [("k", "number"), ("tag", "number")], rows)
        sorted_t = transforms.table_sort(t, "k", "asc")
        tags_for_ones = [r[1] for r in grid(sorted_t) if r[0] == 1.0]
        assert tags_for_ones == sorted(tags_for_ones)

    def test_matches_comparison_sort_oracle(self):
        rng = random.Random(11)
        data = [[None if rng.random() < 0.2 else float(rng.randint(0, 9)),
                 float(i)] for i in range(50)]
        t = table("T", [("k", "number"), ("tag", "number")], data)
        got = grid(transforms.table_sort(t, "k", "asc"))

        # insertion sort with the same missing-last rule, written fresh
        oracle = []
        for row in data:
            i = 0
            while i < len(oracle):
                a, b = row[0], oracle[i][0]
                a_key = (a is None, a if a is not None else 0.0)
                b_key = (b is None, b if b is not None else 0.0)
                if a_key < b_key:
                    break
                i += 1
            oracle.insert(i, row)
        assert got == oracle


# --- filter ---

class TestFilter:
    def test_tautology_keeps_all_rows(self):
        t = table("T", [("s", "text")], [["a"], ["b"], ["c"]])
        kept = transforms.table_filter(t, [FilterCondition("s", "contains", "")])
        assert len(kept.rows) == 3

    def test_lt_is_strict(self):
        t = table("T", [("price", "number")], [[999.0], [1000.0], [1001.0]])
        kept = transforms.table_filter(
            t, [FilterCondition("price", "lt", cell(1000.0))])
        assert values(kept, "price") == [999.0]

    def test_empty_conditions_rejected(self):
        t = table("T", [("s", "text")], [["a"]])
        with pytest.raises(BadArgument):
            transforms.table_filter(t, [])

    def test_regex_must_compile(self):
        t = table("T", [("s", "text")], [["a"]])
        with pytest.raises(BadArgument):
            transforms.table_filter(t, [FilterCondition("s", "regex-match", "(")])

    def test_comparator_type_compatibility(self):
        t = table("T", [("n", "number")], [[1.0]])
        with pytest.raises(TypeMismatch):
            transforms.table_filter(t, [FilterCondition("n", "contains", "1")])

    def test_provenance_carried_for_survivors(self):
        ref = SourceRef("s", 3, "u")
        t = table("T", [("n", "number")], [[1.0], [2.0]],
                  provenance=[[ref], [None]])
        kept = transforms.table_filter(t, [FilterCondition("n", "lt", cell(1.5))])
        assert kept.provenance[0][0] == ref

    def test_random_tables_match_predicate_oracle(self):
        rng = random.Random(23)
        for _ in range(30):
            rows = [[float(rng.randint(0, 5)),
                     rng.choice(["alpha", "beta", "gamma", None])]
                    for _ in range(rng.randint(0, 20))]
            t = table("T", [("n", "number"), ("s", "text")], rows)
            conditions = [
                FilterCondition("n", rng.choice(["lt", "lte", "gt", "gte", "eq", "neq"]),
                                cell(float(rng.randint(0, 5)))),
                FilterCondition("s", "contains", rng.choice(["a", "et", "z"])),
            ]
            operator = rng.choice(["and", "or"])
            got = grid(transforms.table_filter(t, conditions, operator))

            def match(row):
                outcomes = []
                n, s = row
                c0 = conditions[0]
                if n is None:
                    outcomes.append(False)
                else:
                    op = c0.comparator
                    rhs = c0.operand.value
                    outcomes.append({"lt": n < rhs, "lte": n <= rhs,
                                     "gt": n > rhs, "gte": n >= rhs,
                                     "eq": n == rhs, "neq": n != rhs}[op])
                outcomes.append(False if s is None else conditions[1].operand in s)
                return all(outcomes) if operator == "and" else any(outcomes)

            assert got == [row for row in rows if match(row)]


# --- merge ---

def nested_loop_join(left_rows, right_rows, lk, rk, strategy):
    """Independent oracle: row multisets for each strategy over plain tuples."""
    out = []
    if strategy in ("inner", "left"):
        for lrow in left_rows:
            matches = [r for r in right_rows
                       if lrow[lk] is not None and r[rk] == lrow[lk]]
            for rrow in matches:
                out.append(tuple(lrow) + tuple(v for i, v in enumerate(rrow) if i != rk))
            if not matches and strategy == "left":
                out.append(tuple(lrow) + (None,) * (len(right_rows[0]) - 1 if right_rows else 0))
    else:
        for rrow in right_rows:
            matches = [l for l in left_rows
                       if rrow[rk] is not None and l[lk] == rrow[rk]]
            for lrow in matches:
                out.append(tuple(lrow) + tuple(v for i, v in enumerate(rrow) if i != rk))
            if not matches:
                lrow = [None] * len(left_rows[0] if left_rows else [None])
                lrow[lk] = rrow[rk]
                out.append(tuple(lrow) + tuple(v for i, v in enumerate(rrow) if i != rk))
    return sorted(out, key=repr)


class TestMerge:
    def amazon_ebay(self):
        a = table("Amazon", [("Product Title", "text"), ("Price", "number")],
                  [["p1", 1.0], ["p2", 2.0], ["p3", 3.0], ["p4", 4.0], ["p5", 5.0]])
        b = table("Ebay", [("Product Title", "text"), ("Rating", "number")],
                  [["p2", 4.0], ["p4", 4.5], ["p5", 3.5], ["p9", 5.0], ["p0", 1.0]])
        return a, b

    def test_inner_join_empty_intersection(self):
        a = table("A", [("k", "text"), ("x", "number")], [["a", 1.0]])
        b = table("B", [("k", "text"), ("y", "number")], [["b", 2.0]])
        merged = transforms.merge_instances([a, b], "inner", ["k", "k"], "M")
        assert len(merged.rows) == 0
        assert [c.name for c in merged.columns] == ["k", "x", "y"]

    def test_left_join_five_rows_two_missing(self):
        a, b = self.amazon_ebay()
        merged = transforms.merge_instances([a, b], "left",
                                            ["Product Title", "Product Title"], "M")
        assert len(merged.rows) == 5
        missing_rating = [r for r in merged.rows if r[2].is_missing]
        assert len(missing_rating) == 2
        # oracle comparison on the multiset
        got = sorted((tuple(v) for v in grid(merged)), key=repr)
        expected = nested_loop_join(
            [["p1", 1.0], ["p2", 2.0], ["p3", 3.0], ["p4", 4.0], ["p5", 5.0]],
            [["p2", 4.0], ["p4", 4.5], ["p5", 3.5], ["p9", 5.0], ["p0", 1.0]],
            0, 0, "left")
        assert got == expected

    def test_union_of_single_column_tables(self):
        a = table("A", [("x", "text")], [["1"], ["2"]])
        b = table("B", [("y", "text")], [["3"]])
        merged = transforms.merge_instances([a, b], "union", None, "M")
        assert [c.name for c in merged.columns] == ["x", "y"]
        assert grid(merged) == [["1", None], ["2", None], [None, "3"]]

    def test_join_type_mismatch(self):
        a = table("A", [("k", "text")], [["a"]])
        b = table("B", [("k", "number")], [[1.0]])
        with pytest.raises(JoinTypeMismatch):
            transforms.merge_instances([a, b], "inner", ["k", "k"], "M")

    def test_collision_namespacing(self):
        a = table("A", [("k", "text"), ("Price", "number")], [["a", 1.0]])
        b = table("B", [("k", "text"), ("Price", "number")], [["a", 2.0]])
        merged = transforms.merge_instances([a, b], "inner", ["k", "k"], "M")
        assert [c.name for c in merged.columns] == ["k", "Price", "B.Price"]

    def test_needs_two_tables(self):
        a = table("A", [("k", "text")], [["a"]])
        with pytest.raises(BadArgument):
            transforms.merge_instances([a], "union", None, "M")


# --- computed columns ---

class TestComputedColumn:
    def test_price_times_quantity(self):
        t = table("T", [("Price", "number"), ("Quantity", "number")],
                  [[10.0, 3.0]])
        out = transforms.add_computed_column(t, "Price * Quantity", "Total")
        assert values(out, "Total") == [30.0]
        assert out.column("Total").declared_type == "number"

    def test_missing_propagation(self):
        t = table("T", [("Price", "number"), ("Quantity", "number")],
                  [[None, 3.0]])
        out = transforms.add_computed_column(t, "Price * Quantity", "Total")
        assert values(out, "Total") == [None]

    def test_new_column_provenance_is_cleared(self):
        ref = SourceRef("s", 1, "u")
        t = table("T", [("n", "number")], [[1.0]], provenance=[[ref]])
        out = transforms.add_computed_column(t, "n + 1", "m")
        assert out.provenance[0] == (ref, None)

    def test_duplicate_name_rejected(self):
        t = table("T", [("n", "number")], [[1.0]])
        with pytest.raises(BadArgument):
            transforms.add_computed_column(t, "n", "n")

    def test_unknown_reference_rejected(self):
        t = table("T", [("n", "number")], [[1.0]])
        with pytest.raises(UnknownColumn):
            transforms.add_computed_column(t, "n + missing_col", "m")


# --- type conversion ---

_ORACLE_STRIP = re.compile(r"^\s*(?:HK\$|US\$|\$|€|£|¥)?\s*")


def conversion_oracle(text):
    """Reference parse: regex strip then plain decimal parse."""
    stripped = _ORACLE_STRIP.sub("", text.strip()).replace(",", "")
    if not re.fullmatch(r"[-+]?\d+(\.\d+)?", stripped):
        return None
    return float(stripped)


class TestConvertColumnType:
    def test_currency_to_number(self):
        t = table("T", [("p", "text")], [["$1,299.00"], ["HK$ 888"], ["N/A"]])
        out, report = transforms.convert_column_type(t, "p", "number")
        assert values(out, "p") == [1299.0, 888.0, None]
        assert report == {"converted": 2, "unconvertible": 1}

    def test_same_type_rejected(self):
        t = table("T", [("p", "text")], [["x"]])
        with pytest.raises(BadArgument):
            transforms.convert_column_type(t, "p", "text")

    def test_never_errors_on_whole_table(self):
        rng = random.Random(5)
        pool = ["$1,299.00", "N/A", "HK$ 888", "12", "abc", "€5.50", "", "US$30"]
        rows = [[rng.choice(pool)] for _ in range(40)]
        t = table("T", [("p", "text")], rows)
        out, report = transforms.convert_column_type(t, "p", "number")
        expected = [conversion_oracle(r[0]) for r in rows]
        assert values(out, "p") == expected
        assert report["unconvertible"] == sum(1 for e in expected if e is None)

    def test_provenance_carried_through_conversion(self):
        ref = SourceRef("s", 9, "u")
        t = table("T", [("p", "text")], [["$5"]], provenance=[[ref]])
        out, _ = transforms.convert_column_type(t, "p", "number")
        assert out.provenance[0][0] == ref


# --- fill missing ---

class TestFillMissing:
    def test_mean(self):
        t = table("T", [("n", "number")], [[1.0], [2.0], [None], [4.0]])
        out = transforms.fill_missing_values(t, "n", "mean")
        assert values(out, "n") == [1.0, 2.0, pytest.approx(7 / 3), 4.0]

    def test_interpolation_midpoint(self):
        t = table("T", [("n", "number")], [[1.0], [None], [3.0]])
        out = transforms.fill_missing_values(t, "n", "interpolation")
        assert values(out, "n") == [1.0, 2.0, 3.0]

    def test_interpolation_edges_copy_nearest(self):
        t = table("T", [("n", "number")], [[None], [2.0], [None]])
        out = transforms.fill_missing_values(t, "n", "interpolation")
        assert values(out, "n") == [2.0, 2.0, 2.0]

    def test_mode_tie_break_lexicographic(self):
        t = table("T", [("s", "text")],
                  [["beta"], ["alpha"], ["beta"], ["alpha"], [None]])
        out = transforms.fill_missing_values(t, "s", "mode")
        # frequency oracle: both occur twice, tie -> smallest
        counts = {}
        for v in ("beta", "alpha", "beta", "alpha"):
            counts[v] = counts.get(v, 0) + 1
        best = max(counts.values())
        expected = sorted(v for v, n in counts.items() if n == best)[0]
        assert values(out, "s")[-1] == expected == "alpha"

    def test_constant_requires_value(self):
        t = table("T", [("n", "number")], [[None]])
        with pytest.raises(BadArgument):
            transforms.fill_missing_values(t, "n", "constant")

    def test_constant_only_for_constant_strategy(self):
        t = table("T", [("n", "number")], [[1.0], [None]])
        with pytest.raises(BadArgument):
            transforms.fill_missing_values(t, "n", "mean", cell(1.0))

    def test_mean_requires_numeric_column(self):
        t = table("T", [("s", "text")], [["a"], [None]])
        with pytest.raises(TypeMismatch):
            transforms.fill_missing_values(t, "s", "mean")

    def test_all_missing_raises(self):
        t = table("T", [("n", "number")], [[None], [None]])
        with pytest.raises(NoNonMissingValues):
            transforms.fill_missing_values(t, "n", "mean")

    def test_filled_cells_lose_provenance(self):
        ref = SourceRef("s", 1, "u")
        t = table("T", [("n", "number")], [[1.0], [None]],
                  provenance=[[ref], [ref]])
        out = transforms.fill_missing_values(t, "n", "mean")
        assert out.provenance[0][0] == ref
        assert out.provenance[1][0] is None


# --- search and replace ---

class TestSearchAndReplace:
    def test_sponsored_prefix_removal(self):
        t = table("T", [("s", "text")],
                  [["Sponsored Sony"], ["Canon"], ["Sponsored Fuji"]])
        out, count = transforms.search_and_replace(t, "Sponsored ", "")
        assert values(out, "s") == ["Sony", "Canon", "Fuji"]
        assert count == 2

    def test_zero_matches_identical_table(self):
        t = table("T", [("s", "text")], [["abc"]])
        out, count = transforms.search_and_replace(t, "zzz", "x", use_regex=True)
        assert count == 0
        assert grid(out) == grid(t)

    def test_text_cells_only(self):
        t = table("T", [("s", "text"), ("n", "number")], [["1", 1.0]])
        out, count = transforms.search_and_replace(t, "1", "2")
        assert count == 1
        assert grid(out) == [["2", 1.0]]

    def test_random_literals_match_scan_oracle(self):
        rng = random.Random(31)
        alphabet = "abcx "
        for _ in range(40):
            rows = [["".join(rng.choice(alphabet) for _ in range(rng.randint(0, 8)))]
                    for _ in range(10)]
            t = table("T", [("s", "text")], rows)
            pattern = "".join(rng.choice("abc") for _ in range(rng.randint(1, 2)))
            out, count = transforms.search_and_replace(t, pattern, "Z")
            expected_rows, expected_count = [], 0
            for (s,) in rows:
                expected_count += s.count(pattern)
                expected_rows.append([s.replace(pattern, "Z")])
            assert grid(out) == expected_rows
            assert count == expected_count

    def test_replaced_cells_lose_provenance(self):
        ref = SourceRef("s", 1, "u")
        t = table("T", [("s", "text")], [["ab"], ["zz"]],
                  provenance=[[ref], [ref]])
        out, _ = transforms.search_and_replace(t, "a", "x")
        assert out.provenance[0][0] is None
        assert out.provenance[1][0] == ref


# --- rename / format ---

class TestRenameFormat:
    def test_rename_keeps_data(self):
        t = table("T", [("Price", "number")], [[1.0]])
        out = transforms.rename_column(t, "Price", "Price_USD")
        assert [c.name for c in out.columns] == ["Price_USD"]
        assert grid(out) == grid(t)

    def test_rename_to_existing_rejected(self):
        t = table("T", [("a", "text"), ("b", "text")], [["x", "y"]])
        with pytest.raises(BadArgument):
            transforms.rename_column(t, "a", "b")

    def test_currency_format_canonicalizes_both_forms(self):
        t = table("T", [("p", "text")], [["US $1,299"], ["1299 USD"]])
        out = transforms.format_column(t, "p", "currency")
        assert values(out, "p") == ["1299 USD", "1299 USD"]

    def test_unrecognized_values_left_unchanged(self):
        t = table("T", [("p", "text")], [["call us"]])
        out = transforms.format_column(t, "p", "currency")
        assert values(out, "p") == ["call us"]

    def test_other_patterns(self):
        t = table("T", [("s", "text")], [["  MiXeD  "]])
        assert values(transforms.format_column(t, "s", "trim"), "s") == ["MiXeD"]
        assert values(transforms.format_column(t, "s", "lowercase"), "s") == ["  mixed  "]
        assert values(transforms.format_column(t, "s", "uppercase"), "s") == ["  MIXED  "]


# --- reshape ---

class TestReshape:
    def test_fold_row_count(self):
        t = table("T", [("id", "text"), ("a", "number"), ("b", "number")],
                  [["x", 1.0, 2.0], ["y", 3.0, 4.0], ["z", 5.0, 6.0]])
        folded = transforms.reshape(t, "fold", ["id"], ["a", "b"])
        assert len(folded.rows) == 6
        assert [c.name for c in folded.columns] == ["id", "variable", "value"]

    def test_unfold_fold_identity_up_to_row_sort(self):
        t = table("T", [("id", "text"), ("a", "number"), ("b", "number")],
                  [["x", 1.0, 2.0], ["y", 3.0, 4.0]])
        folded = transforms.reshape(t, "fold", ["id"], ["a", "b"])
        unfolded = transforms.reshape(folded, "unfold", ["id"],
                                      ["variable", "value"])
        assert sorted(grid(unfolded)) == sorted(grid(t))
        assert [c.name for c in unfolded.columns] == ["id", "a", "b"]

    def test_fold_matches_pair_enumeration_oracle(self):
        rng = random.Random(3)
        rows = [[f"r{i}"] + [float(rng.randint(0, 9)) for _ in range(3)]
                for i in range(7)]
        t = table("T", [("id", "text"), ("c1", "number"), ("c2", "number"),
                        ("c3", "number")], rows)
        folded = transforms.reshape(t, "fold", ["id"], ["c1", "c2", "c3"])
        expected = []
        for row in rows:
            for name, value in zip(("c1", "c2", "c3"), row[1:]):
                expected.append([row[0], name, value])
        assert grid(folded) == expected


# --- aggregate ---

class TestAggregate:
    def test_all_distinct_counts_are_one(self):
        t = table("T", [("k", "text"), ("n", "number")],
                  [["a", 1.0], ["b", 2.0], ["c", 3.0]])
        out = transforms.aggregate(t, ["k"], [("n", "count")])
        assert values(out, "count_n") == [1.0, 1.0, 1.0]

    def test_sum_excludes_missing(self):
        t = table("T", [("k", "text"), ("n", "number")],
                  [["a", 1.0], ["a", None], ["a", 2.0]])
        out = transforms.aggregate(t, ["k"], [("n", "sum")])
        assert values(out, "sum_n") == [3.0]

    def test_missing_key_is_its_own_group(self):
        t = table("T", [("k", "text"), ("n", "number")],
                  [["a", 1.0], [None, 2.0], [None, 3.0]])
        out = transforms.aggregate(t, ["k"], [("n", "count")])
        assert values(out, "count_n") == [1.0, 2.0]

    def test_random_groups_match_bruteforce(self):
        rng = random.Random(17)
        rows = [[rng.choice(["a", "b", "c", None]),
                 None if rng.random() < 0.2 else float(rng.randint(0, 9))]
                for _ in range(60)]
        t = table("T", [("k", "text"), ("n", "number")], rows)
        out = transforms.aggregate(t, ["k"], [("n", "sum"), ("n", "mean"),
                                              ("n", "min"), ("n", "max"),
                                              ("n", "count")])
        buckets, order = {}, []
        for k, n in rows:
            if k not in buckets:
                buckets[k] = []
                order.append(k)
            if n is not None:
                buckets[k].append(n)
        expected = []
        for k in order:
            vals = buckets[k]
            expected.append([
                k,
                float(sum(vals)),
                (sum(vals) / len(vals)) if vals else None,
                min(vals) if vals else None,
                max(vals) if vals else None,
                float(len(vals)),
            ])
        got = grid(out)
        assert len(got) == len(expected)
        for got_row, exp_row in zip(got, expected):
            assert got_row[0] == exp_row[0]
            for g, e in zip(got_row[1:], exp_row[1:]):
                assert g == pytest.approx(e) if e is not None else g is None


# --- positional ---

class TestPositional:
    def test_delete_first_row(self):
        t = table("T", [("n", "number")], [[0.0], [1.0], [2.0]])
        out = transforms.positional_transform(t, "delete-rows", [0])
        assert values(out, "n") == [1.0, 2.0]

    def test_move_col_to_same_index_is_identity(self):
        t = table("T", [("a", "text"), ("b", "text")], [["x", "y"]])
        out = transforms.positional_transform(t, "move-col", [1, 1])
        assert grid(out) == grid(t)
        assert [c.name for c in out.columns] == ["a", "b"]

    def test_out_of_range_rejected(self):
        t = table("T", [("a", "text")], [["x"]])
        with pytest.raises(BadArgument):
            transforms.positional_transform(t, "delete-rows", [5])

    def test_random_edit_scripts_match_list_surgery(self):
        rng = random.Random(29)
        for _ in range(25):
            n_rows, n_cols = rng.randint(2, 8), rng.randint(2, 5)
            rows = [[float(rng.randint(0, 99)) for _ in range(n_cols)]
                    for _ in range(n_rows)]
            names = [f"c{i}" for i in range(n_cols)]
            t = table("T", [(n, "number") for n in names], rows)
            mirror = [list(r) for r in rows]
            for _ in range(3):
                op = rng.choice(["delete-rows", "delete-cols", "move-col"])
                if op == "delete-rows" and len(mirror) > 1:
                    i = rng.randrange(len(mirror))
                    t = transforms.positional_transform(t, op, [i])
                    del mirror[i]
                elif op == "delete-cols" and len(mirror[0]) > 1:
                    i = rng.randrange(len(mirror[0]))
                    t = transforms.positional_transform(t, op, [i])
                    for row in mirror:
                        del row[i]
                elif op == "move-col":
                    src = rng.randrange(len(mirror[0]))
                    dst = rng.randrange(len(mirror[0]))
                    t = transforms.positional_transform(t, op, [src, dst])
                    for row in mirror:
                        value = row.pop(src)
                        row.insert(dst, value)
            assert grid(t) == mirror


# --- purity ---

def test_transforms_are_pure_same_inputs_same_serialization():
    t = table("T", [("s", "text"), ("n", "number")],
              [["b", 2.0], ["a", None], ["c", 1.0]])
    from databoard.instances import canonical_json
    first = canonical_json(transforms.table_sort(t, "n", "asc").to_json())
    second = canonical_json(transforms.table_sort(t, "n", "asc").to_json())
    assert first == second
    assert grid(t) == [["b", 2.0], ["a", None], ["c", 1.0]]   # input untouched
