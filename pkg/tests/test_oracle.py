"""Symbolic conditioning oracle: state machinery, rules, and exact values."""

import io
import json
import random
from fractions import Fraction

import pytest

from rapkit.formulas import cover_formula_value
from rapkit.model import BudgetExceededError, instance
from rapkit.oracle import (
    ExpRapState,
    ExpVariable,
    LinearEntry,
    canonical_key,
    classify_entries,
    condition_minimum,
    condition_pair,
    induction_measure,
    is_terminal,
    make_initial_state,
    oracle_expected_value,
    oracle_node_count,
    reduce_state,
)

from conftest import random_instance


def entry(mapping) -> LinearEntry:
    return LinearEntry.of({v: Fraction(c) for v, c in mapping.items()})


def state(k, rows, intensities, accumulated=0) -> ExpRapState:
    variables = tuple(ExpVariable(v, Fraction(i)) for v, i in intensities.items())
    entries = tuple(tuple(entry(e) for e in row) for row in rows)
    return ExpRapState(k, entries, variables, Fraction(accumulated))


class TestGoldenValues:
    def test_one_by_one(self):
        assert oracle_expected_value(instance(1, 1, 1)) == 1

    def test_two_by_two(self):
        assert oracle_expected_value(instance(2, 2, 2)) == Fraction(5, 4)

    def test_two_by_two_single_zero(self):
        assert oracle_expected_value(instance(2, 2, 2, [(0, 0)])) == Fraction(3, 4)

    def test_three_by_three_full(self):
        assert oracle_expected_value(instance(3, 3, 3)) == Fraction(49, 36)

    def test_all_zero_pattern(self):
        zeros = [(r, c) for r in range(2) for c in range(2)]
        assert oracle_expected_value(instance(2, 2, 2, zeros)) == 0

    def test_matches_cover_formula_on_random_instances(self, oracle_cache):
        rng = random.Random(41)
        for _ in range(40):
            p = random_instance(rng, max_m=3, max_n=4)
            assert oracle_expected_value(p, cache=oracle_cache) == cover_formula_value(p)


class TestLinearEntry:
    def test_comparable(self):
        assert entry({1: 1}).le(entry({1: 2}))
        assert not entry({1: 2}).le(entry({1: 1}))

    def test_incomparable(self):
        assert entry({1: 1}).incomparable(entry({2: 1}))
        assert not entry({1: 1}).incomparable(entry({1: 1, 2: 1}))

    def test_zero_entry(self):
        assert LinearEntry().is_zero
        assert LinearEntry().le(entry({1: 1}))

    def test_rejects_nonpositive_coefficients(self):
        with pytest.raises(ValueError):
            LinearEntry(((1, Fraction(-1)),))
        assert entry({1: 0}).is_zero  # zero coefficients dropped by .of


class TestReduce:
    def test_column_with_k_zeros_deleted(self):
        s = make_initial_state(instance(3, 3, 2, [(0, 0), (1, 0)]))
        reduced = reduce_state(s)
        assert (reduced.k, reduced.m, reduced.n) == (1, 3, 2)
        assert all(not e.is_zero for row in reduced.entries for e in row)

    def test_terminal_state_returned_as_is(self):
        s = make_initial_state(instance(2, 2, 2, [(0, 0), (1, 1)]))
        assert is_terminal(s)
        assert reduce_state(s) == s

    def test_no_forced_lines_fixed_point(self):
        s = make_initial_state(instance(3, 3, 2, [(0, 0)]))
        assert reduce_state(s) == s

    def test_idempotent(self):
        s = make_initial_state(instance(4, 4, 3, [(0, 0), (1, 0), (2, 0), (0, 1)]))
        once = reduce_state(s)
        assert reduce_state(once) == once


class TestClassify:
    def test_initial_state_all_standard(self):
        cls = classify_entries(make_initial_state(instance(2, 3, 2)))
        assert all(label == "standard" for row in cls.labels for label in row)
        assert cls.non_covered_nonstandard == ()

    def test_zero_label(self):
        cls = classify_entries(make_initial_state(instance(2, 2, 2, [(1, 0)])))
        assert cls.labels[1][0] == "zero"

    def test_repeated_variable_is_nonstandard(self):
        s = state(1, [[{0: 1}, {0: 1}]], {0: 1})
        cls = classify_entries(s)
        assert cls.labels[0] == ("nonstandard", "nonstandard")

    def test_scaled_variable_is_nonstandard(self):
        s = state(1, [[{0: 2}, {1: 1}]], {0: 1, 1: 1})
        assert classify_entries(s).labels[0][0] == "nonstandard"

    def test_minimal_detected(self):
        rows = [[{0: 1}, {0: 1, 1: 1}], [{0: 1, 2: 1}, {0: 1, 1: 1, 2: 1}]]
        cls = classify_entries(state(2, rows, {0: 1, 1: 1, 2: 1}))
        assert cls.minimal == (0, 0)
        assert cls.first_incomparable_pair is None

    def test_incomparable_pair_detected_when_no_minimal(self):
        rows = [[{0: 1}, {1: 1}], [{1: 1}, {0: 1}]]
        cls = classify_entries(state(2, rows, {0: 1, 1: 1}))
        assert cls.minimal is None
        assert cls.first_incomparable_pair == ((0, 0), (0, 1))


class TestConditionPair:
    def test_equal_scaled_intensities_split_evenly(self):
        rows = [[{0: 2}, {1: 2}], [{1: 2}, {0: 2}]]
        s = state(2, rows, {0: 1, 1: 1})
        (w1, c1), (w2, c2) = condition_pair(s, (0, 0), (0, 1))
        assert w1 == w2 == Fraction(1, 2)

    def test_intensity_ratio_two_to_one(self):
        rows = [[{0: 1}, {1: 2}], [{1: 2}, {0: 1}]]
        s = state(2, rows, {0: 1, 1: 1})
        (w1, _), (w2, _) = condition_pair(s, (0, 0), (0, 1))
        assert (w1, w2) == (Fraction(2, 3), Fraction(1, 3))

    def test_children_share_y_coefficient(self):
        rows = [[{0: 2}, {1: 2}], [{1: 2}, {0: 2}]]
        s = state(2, rows, {0: 1, 1: 1})
        for _, child in condition_pair(s, (0, 0), (0, 1)):
            y_id = min(v.id for v in child.variables if v.id >= 2)
            e1 = child.entries[0][0]
            e2 = child.entries[0][1]
            assert e1.coeff(y_id) == e2.coeff(y_id) > 0

    def test_comparable_entries_rejected(self):
        s = state(1, [[{0: 1}, {0: 2}]], {0: 1})
        with pytest.raises(ValueError):
            condition_pair(s, (0, 0), (0, 1))

    def test_no_cost_extracted_and_accumulated_kept(self):
        rows = [[{0: 2}, {1: 2}], [{1: 2}, {0: 2}]]
        s = state(2, rows, {0: 1, 1: 1}, accumulated=Fraction(3, 7))
        for w, child in condition_pair(s, (0, 0), (0, 1)):
            assert child.accumulated == Fraction(3, 7)
            assert w > 0


class TestConditionMinimum:
    def test_one_by_one(self):
        extracted, children = condition_minimum(make_initial_state(instance(1, 1, 1)))
        assert extracted == 1
        assert len(children) == 1
        weight, child = children[0]
        assert weight == 1
        assert is_terminal(reduce_state(child))
        assert child.accumulated == 1

    def test_two_by_two_intensity_four(self):
        extracted, children = condition_minimum(make_initial_state(instance(2, 2, 2)))
        assert extracted == Fraction(1, 2)  # (k - |cover|) / I = 2/4
        assert [w for w, _ in children] == [Fraction(1, 4)] * 4

    def test_minimum_position_becomes_zero(self):
        _, children = condition_minimum(make_initial_state(instance(2, 2, 2)))
        positions = [(r, c) for r in range(2) for c in range(2)]
        for (weight, child), pos in zip(children, positions):
            assert child.entries[pos[0]][pos[1]].is_zero

    def test_accumulated_nondecreasing(self):
        parent = make_initial_state(instance(3, 3, 2, [(0, 0)]))
        extracted, children = condition_minimum(parent)
        assert extracted > 0
        for _, child in children:
            assert child.accumulated == parent.accumulated + extracted

    def test_weights_sum_to_one(self):
        _, children = condition_minimum(make_initial_state(instance(3, 4, 2, [(1, 2)])))
        assert sum(w for w, _ in children) == 1

    def test_doubly_covered_entries_gain_the_minimum(self):
        # one zero covered by a row; the crossing entries are doubly covered
        s = make_initial_state(instance(2, 2, 2, [(0, 0)]))
        # cover of {(0,0)} is {row 0}; no doubly covered cells (no cols);
        # a state with both a row and a column in the cover:
        s2 = make_initial_state(instance(3, 3, 3, [(0, 0), (0, 1), (1, 0), (2, 0)]))
        cover = classify_entries(s2).cover
        assert cover.rows and cover.cols
        _, children = condition_minimum(s2)
        for _, child in children:
            y_id = child.entries[0][0].variables()[0]  # doubly covered zero gains Y
            for r in cover.rows:
                for c in cover.cols:
                    assert child.entries[r][c].coeff(y_id) >= 1

    def test_measure_drops_at_branching(self):
        for p in (instance(2, 2, 2), instance(3, 3, 2, [(0, 0)]), instance(3, 3, 3)):
            parent = reduce_state(make_initial_state(p))
            before = induction_measure(parent)
            _, children = condition_minimum(parent)
            for _, child in children:
                assert induction_measure(child) < before


class TestBudgetAndTrace:
    def test_budget_exhaustion_reports_nodes(self):
        with pytest.raises(BudgetExceededError) as exc:
            oracle_expected_value(instance(3, 3, 3), budget=3)
        assert exc.value.nodes == 4

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            oracle_expected_value(instance(2, 2, 2), budget=0)

    def test_node_count(self):
        value, nodes = oracle_node_count(instance(2, 2, 2))
        assert value == Fraction(5, 4) and nodes >= 1

    def test_trace_lines_conserve_probability(self):
        buffer = io.StringIO()
        oracle_expected_value(instance(3, 3, 2, [(0, 0)]), trace=buffer)
        lines = [json.loads(line) for line in buffer.getvalue().splitlines()]
        assert lines
        for line in lines:
            assert line["rule"] in ("pair", "minimum")
            weights = [Fraction(w) for w in line["weights"]]
            assert sum(weights) == 1 and all(w > 0 for w in weights)
            assert Fraction(line["extracted"]) >= 0

    def test_cache_reuse_across_calls(self):
        cache: dict = {}
        oracle_expected_value(instance(3, 3, 3), cache=cache)
        _, nodes = oracle_node_count(instance(3, 3, 3), cache=cache)
        assert nodes == 0  # everything served from the shared cache


class TestCanonicalKey:
    def test_invariant_under_row_and_column_permutation(self):
        a = make_initial_state(instance(3, 3, 2, [(0, 0)]))
        b = make_initial_state(instance(3, 3, 2, [(2, 2)]))
        c = make_initial_state(instance(3, 3, 2, [(1, 2)]))
        assert canonical_key(a) == canonical_key(b) == canonical_key(c)

    def test_distinguishes_different_structures(self):
        a = make_initial_state(instance(3, 3, 2, [(0, 0)]))
        b = make_initial_state(instance(3, 3, 2, [(0, 0), (1, 1)]))
        assert canonical_key(a) != canonical_key(b)

    def test_excludes_accumulated(self):
        s = make_initial_state(instance(2, 2, 2))
        shifted = ExpRapState(s.k, s.entries, s.variables, Fraction(7, 2))
        assert canonical_key(s) == canonical_key(shifted)
