"""Exact k-assignment solver and the structure of optimal-assignment families."""

import random
from fractions import Fraction

import pytest

from rapkit.model import Assignment
from rapkit.solver import (
    brute_force_k_assignment,
    enumerate_optimal_assignments,
    solve_k_assignment,
    symmetric_difference_paths,
    uses_row,
)

from conftest import random_fraction_matrix


class TestSolve:
    def test_two_by_two(self):
        result = solve_k_assignment([[1, 2], [3, 5]], 2)
        assert result.cost == 5
        assert result.positions == ((0, 1), (1, 0))

    def test_k1_is_global_minimum(self):
        result = solve_k_assignment([[7, 2, 9], [4, 8, 3]], 1)
        assert result.cost == 2 and result.positions == ((0, 1),)

    def test_zero_assignment(self):
        result = solve_k_assignment([[0, 1], [1, 0]], 2)
        assert result.cost == 0 and result.positions == ((0, 0), (1, 1))

    def test_lexicographic_tie_break(self):
        assert solve_k_assignment([[1, 1], [1, 1]], 1).positions == ((0, 0),)
        assert solve_k_assignment([[1, 1], [1, 1]], 2).positions == ((0, 0), (1, 1))
        # both diagonals cost 3; (0,0),(1,1) sorts first
        assert solve_k_assignment([[1, 2], [2, 2]], 2).positions == ((0, 0), (1, 1))

    def test_rectangular_partial(self):
        result = solve_k_assignment([[5, 1, 4], [2, 6, 3]], 1)
        assert result.cost == 1

    def test_fraction_entries_exact(self):
        matrix = [[Fraction(1, 3), Fraction(1, 2)], [Fraction(1, 4), Fraction(1, 6)]]
        result = solve_k_assignment(matrix, 2)
        assert result.cost == Fraction(1, 2)

    @pytest.mark.parametrize(
        "matrix,k",
        [
            ([[1, 2]], 2),
            ([[1, 2], [3, 4]], 0),
            ([[1, -2], [3, 4]], 1),
            ([[1, float("inf")], [3, 4]], 1),
            ([[1, 2], [3]], 1),
        ],
    )
    def test_invalid_inputs(self, matrix, k):
        with pytest.raises((ValueError, IndexError)):
            solve_k_assignment(matrix, k)

    def test_matches_brute_force_cost_and_positions(self):
        rng = random.Random(21)
        for _ in range(250):
            m, n = rng.randint(1, 5), rng.randint(1, 5)
            k = rng.randint(1, min(m, n))
            zeros = {(r, c) for r in range(m) for c in range(n) if rng.random() < 0.3}
            matrix = random_fraction_matrix(rng, m, n, zeros)
            fast = solve_k_assignment(matrix, k)
            slow = brute_force_k_assignment(matrix, k)
            assert fast.cost == slow.cost
            assert fast.positions == slow.positions

    def test_monotone_in_entries(self):
        rng = random.Random(22)
        for _ in range(100):
            m, n = rng.randint(2, 4), rng.randint(2, 4)
            k = rng.randint(1, min(m, n))
            matrix = random_fraction_matrix(rng, m, n)
            base = solve_k_assignment(matrix, k).cost
            r, c = rng.randrange(m), rng.randrange(n)
            matrix[r][c] = matrix[r][c] / 2
            assert solve_k_assignment(matrix, k).cost <= base


class TestBruteForce:
    def test_two_by_two(self):
        assert brute_force_k_assignment([[1, 2], [3, 5]], 2).cost == 5

    def test_single_cell(self):
        result = brute_force_k_assignment([[Fraction(7, 3)]], 1)
        assert result.cost == Fraction(7, 3)

    def test_three_permutations(self):
        matrix = [[1, 9, 9], [9, 1, 9], [9, 9, 1]]
        assert brute_force_k_assignment(matrix, 3).cost == 3


class TestEnumerateOptima:
    def test_unique_optimum(self):
        optima = enumerate_optimal_assignments([[0, 0], [1, 2]], 2)
        assert len(optima) == 1
        assert optima[0].positions == ((0, 1), (1, 0))

    def test_all_zero_two_optima(self):
        optima = enumerate_optimal_assignments([[0, 0], [0, 0]], 2)
        assert len(optima) == 2

    def test_generic_unique(self):
        rng = random.Random(23)
        matrix = [[rng.random() for _ in range(3)] for _ in range(3)]
        assert len(enumerate_optimal_assignments(matrix, 3)) == 1

    def test_zero_difference_equivalence(self):
        # distinct optima of a sampled standard RAP differ only at zeros
        rng = random.Random(24)
        for _ in range(60):
            m, n = rng.randint(2, 4), rng.randint(2, 4)
            k = rng.randint(1, min(m, n))
            zeros = {(r, c) for r in range(m) for c in range(n) if rng.random() < 0.4}
            matrix = [
                [Fraction(0) if (r, c) in zeros else Fraction(rng.random()).limit_denominator(10**9)
                 for c in range(n)]
                for r in range(m)
            ]
            optima = enumerate_optimal_assignments(matrix, k)
            for a in optima:
                for b in optima:
                    diff = a.position_set ^ b.position_set
                    assert all(matrix[r][c] == 0 for r, c in diff)


class TestAlternatingPaths:
    def test_equal_assignments(self):
        mu = Assignment(((0, 0), (1, 1)))
        assert symmetric_difference_paths(mu, mu) == []

    def test_two_by_two_swap_is_one_cycle(self):
        mu = Assignment(((0, 0), (1, 1)))
        nu = Assignment(((0, 1), (1, 0)))
        paths = symmetric_difference_paths(mu, nu)
        assert len(paths) == 1 and len(paths[0].positions) == 4

    def test_disjoint_singletons(self):
        paths = symmetric_difference_paths(Assignment(((0, 0),)), Assignment(((1, 1),)))
        assert sorted(len(p.positions) for p in paths) == [1, 1]

    def test_positions_alternate_between_assignments(self):
        mu = Assignment(((0, 0), (1, 1), (2, 2)))
        nu = Assignment(((0, 1), (1, 0), (2, 2)))
        for path in symmetric_difference_paths(mu, nu):
            sides = [pos in mu.position_set for pos in path.positions]
            assert all(sides[i] != sides[i + 1] for i in range(len(sides) - 1))

    def test_partition_covers_symmetric_difference(self):
        mu = Assignment(((0, 0), (1, 2), (2, 1)))
        nu = Assignment(((0, 2), (1, 1), (3, 0)))
        paths = symmetric_difference_paths(mu, nu)
        scattered = [pos for path in paths for pos in path.positions]
        assert sorted(scattered) == sorted(mu.position_set ^ nu.position_set)

    def test_optimal_families_decompose_into_few_paths(self):
        # any element of an optimum can be reached from any other optimum
        # through one path or two odd paths
        rng = random.Random(25)
        for _ in range(60):
            m, n = rng.randint(2, 4), rng.randint(2, 4)
            k = rng.randint(1, min(m, n))
            zeros = {(r, c) for r in range(m) for c in range(n) if rng.random() < 0.4}
            matrix = random_fraction_matrix(rng, m, n, zeros)
            optima = enumerate_optimal_assignments(matrix, k)
            if len(optima) < 2:
                continue
            for mu in optima:
                for nu in optima:
                    for a in nu.position_set - mu.position_set:
                        assert any(
                            len(paths) == 1
                            or (len(paths) == 2
                                and all(len(t.positions) % 2 == 1 for t in paths))
                            for cand in optima
                            if a in cand.position_set
                            for paths in [symmetric_difference_paths(mu, cand)]
                        )


class TestUsesRow:
    def test_present(self):
        assert uses_row(Assignment(((0, 1),)), 0)

    def test_absent(self):
        assert not uses_row(Assignment(((0, 1),)), 1)

    def test_full_assignment_uses_all_rows(self):
        a = Assignment(((0, 2), (1, 0), (2, 1)))
        assert all(uses_row(a, r) for r in range(3))
