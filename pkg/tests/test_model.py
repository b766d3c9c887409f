"""Domain types, validation, transformations, and the instance file format."""

import json
from fractions import Fraction

import pytest
from hypothesis import given

from rapkit.model import (
    Assignment,
    InvalidInstanceError,
    SampledMatrix,
    ZeroPattern,
    delete_column,
    delete_row,
    insert_zero,
    instance,
    parse_instance,
    rational_approx,
    rational_from_json,
    rational_to_json,
    serialize_instance,
    transpose_instance,
)

from conftest import instances


class TestParseInstance:
    def test_empty_zero_set(self):
        p = parse_instance('{"m":2,"n":2,"k":2,"zeros":[]}')
        assert (p.m, p.n, p.k, p.zeros) == (2, 2, 2, ())

    def test_single_zero(self):
        p = parse_instance('{"m":3,"n":3,"k":2,"zeros":[[0,0]]}')
        assert (p.m, p.n, p.k, p.zeros) == (3, 3, 2, ((0, 0),))

    def test_k_exceeds_min_dimension(self):
        with pytest.raises(InvalidInstanceError):
            parse_instance('{"m":2,"n":3,"k":3,"zeros":[]}')

    @pytest.mark.parametrize(
        "text",
        [
            "not json",
            "[1,2]",
            '{"m":2,"n":2}',
            '{"m":2,"n":2,"k":true,"zeros":[]}',
            '{"m":2,"n":2,"k":1,"zeros":[[0]]}',
            '{"m":2,"n":2,"k":1,"zeros":[[0,5]]}',
            '{"m":2,"n":2,"k":1,"zeros":[[0,0],[0,0]]}',
            '{"m":0,"n":2,"k":1,"zeros":[]}',
            '{"m":2,"n":2,"k":0,"zeros":[]}',
        ],
    )
    def test_malformed_documents_rejected(self, text):
        with pytest.raises(InvalidInstanceError):
            parse_instance(text)

    @given(instances())
    def test_round_trip(self, p):
        assert parse_instance(serialize_instance(p)) == p

    def test_serialized_zeros_sorted(self):
        p = instance(3, 3, 2, [(2, 1), (0, 2), (0, 0)])
        doc = json.loads(serialize_instance(p))
        assert doc["zeros"] == [[0, 0], [0, 2], [2, 1]]


class TestTranspose:
    def test_coordinate_swap(self):
        p = transpose_instance(instance(2, 3, 2, [(0, 2)]))
        assert (p.m, p.n, p.k, p.zeros) == (3, 2, 2, ((2, 0),))

    @given(instances())
    def test_involution(self, p):
        assert transpose_instance(transpose_instance(p)) == p

    def test_square_no_zero_fixed_point(self):
        p = instance(3, 3, 2)
        assert transpose_instance(p) == p

    @given(instances())
    def test_preserves_zero_count_and_k(self, p):
        q = transpose_instance(p)
        assert len(q.zeros) == len(p.zeros) and q.k == p.k


class TestDeleteColumn:
    def test_all_zeros_in_deleted_column(self):
        p = delete_column(instance(3, 3, 2, [(0, 0), (1, 0)]), 0)
        assert (p.m, p.n, p.k, p.zeros) == (3, 2, 1, ())

    def test_reindexing(self):
        p = delete_column(instance(2, 3, 2, [(0, 2)]), 1)
        assert (p.m, p.n, p.k, p.zeros) == (2, 2, 1, ((0, 1),))

    def test_too_small_rejected(self):
        with pytest.raises(InvalidInstanceError):
            delete_column(instance(2, 2, 2), 0)
        with pytest.raises(InvalidInstanceError):
            delete_column(instance(3, 3, 3), 0)
        with pytest.raises(InvalidInstanceError):
            delete_column(instance(3, 3, 1), 0)

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidInstanceError):
            delete_column(instance(3, 3, 2), 3)

    def test_zero_count_drops_by_column_occupancy(self):
        p = instance(3, 4, 3, [(0, 1), (1, 1), (2, 3), (0, 0)])
        q = delete_column(p, 1)
        assert len(q.zeros) == len(p.zeros) - 2

    def test_delete_row_is_transpose_conjugate(self):
        p = instance(3, 4, 2, [(0, 1), (1, 1), (2, 3)])
        direct = delete_row(p, 1)
        conjugated = transpose_instance(delete_column(transpose_instance(p), 1))
        assert direct == conjugated


class TestInsertZero:
    def test_basic(self):
        assert insert_zero(instance(2, 2, 2), (0, 0)).zeros == ((0, 0),)

    def test_existing_zero_rejected(self):
        with pytest.raises(InvalidInstanceError):
            insert_zero(instance(2, 2, 2, [(0, 0)]), (0, 0))

    def test_accumulates(self):
        p = insert_zero(instance(3, 3, 2, [(0, 0)]), (1, 1))
        assert p.zeros == ((0, 0), (1, 1))


class TestValidation:
    def test_zero_pattern_bounds(self):
        with pytest.raises(InvalidInstanceError):
            ZeroPattern(2, 2, ((2, 0),))

    def test_assignment_independence(self):
        with pytest.raises(InvalidInstanceError):
            Assignment(((0, 0), (0, 1)))
        with pytest.raises(InvalidInstanceError):
            Assignment(((0, 0), (1, 0)))

    def test_assignment_positions_canonical(self):
        a = Assignment(((1, 1), (0, 0)))
        assert a.positions == ((0, 0), (1, 1)) and len(a) == 2 and (1, 1) in a

    def test_sampled_matrix_contract(self):
        z = ZeroPattern(2, 2, ((0, 0),))
        SampledMatrix(2, 2, ((0.0, 1.0), (2.0, 3.0)), z)
        with pytest.raises(InvalidInstanceError):
            SampledMatrix(2, 2, ((0.5, 1.0), (2.0, 3.0)), z)  # nonzero at zero position
        with pytest.raises(InvalidInstanceError):
            SampledMatrix(2, 2, ((0.0, 0.0), (2.0, 3.0)), z)  # zero off the pattern
        with pytest.raises(InvalidInstanceError):
            SampledMatrix(2, 2, ((0.0, 1.0),), z)  # wrong shape


class TestRationalWireFormat:
    def test_shape_and_digits(self):
        doc = rational_to_json(Fraction(49, 36))
        assert doc == {"num": "49", "den": "36", "approx": "1.36111111111"}

    def test_round_trip(self):
        value = Fraction(-7, 12)
        assert rational_from_json(rational_to_json(value)) == value

    def test_malformed_rejected(self):
        with pytest.raises(InvalidInstanceError):
            rational_from_json({"num": "1"})

    def test_approx_significant_digits(self):
        assert rational_approx(Fraction(1, 3)) == "0.333333333333"
