"""Exact minimum-cost k-assignment on rectangular nonnegative matrices.

The solver runs successive shortest augmenting paths with node
potentials, one augmentation per assigned entry, on the bipartite
row/column graph.  Costs are carried as pairs (entry sum, tie weight)
under lexicographic order, which is a linearly ordered group, so the
usual correctness argument applies verbatim and the returned optimum is
additionally the lexicographically smallest sorted position list among
all minimum-cost k-assignments.

The tie weight of position (r, c) is B^(mn) - B^(mn-1-t) with t = r*n+c
and B = k+1.  Any assignment has exactly k positions, so minimizing the
tie-weight sum maximizes sum of B^(mn-1-t), and with B > k that sum is
a base-B digit vector: it picks out the assignment containing the
smallest position on which two candidate sets differ.

Entries may be ints, fractions.Fraction, or floats; arithmetic stays in
the input type, so rational instances are solved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from heapq import heappop, heappush
from itertools import combinations, permutations
from typing import Iterable, Sequence

from .model import Assignment, Position, SampledMatrix

Number = int | float | Fraction

ENUMERATION_LIMIT = 2_000_000  # independent k-sets tolerated by brute force


@dataclass(frozen=True)
class SolveResult:
    """An optimal k-assignment together with its cost."""

    cost: Number
    assignment: Assignment

    @property
    def positions(self) -> tuple[Position, ...]:
        return self.assignment.positions


@dataclass(frozen=True)
class AlternatingPath:
    """Positions of mu (triangle) nu in traversal order.

    Consecutive positions share a row or a column and belong to the two
    assignments alternately; a cycle is reported as the traversal of all
    its positions starting from the smallest one.
    """

    positions: tuple[Position, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", tuple(self.positions))
        for (r1, c1), (r2, c2) in zip(self.positions, self.positions[1:]):
            if r1 != r2 and c1 != c2:
                raise ValueError("consecutive path positions must share a line")

    def __len__(self) -> int:
        return len(self.positions)


def _as_matrix(matrix: SampledMatrix | Sequence[Sequence[Number]]) -> list[list[Number]]:
    if isinstance(matrix, SampledMatrix):
        rows = [list(row) for row in matrix.entries]
    else:
        rows = [list(row) for row in matrix]
    if not rows or not rows[0]:
        raise ValueError("matrix must be nonempty")
    n = len(rows[0])
    for row in rows:
        if len(row) != n:
            raise ValueError("matrix rows must have equal length")
        for x in row:
            if isinstance(x, float) and not math.isfinite(x):
                raise ValueError(f"matrix entries must be finite, got {x!r}")
            if x < 0:
                raise ValueError(f"matrix entries must be nonnegative, got {x!r}")
    return rows


def _check_k(k: int, m: int, n: int) -> None:
    if not isinstance(k, int) or isinstance(k, bool) or not 1 <= k <= min(m, n):
        raise ValueError(f"k={k!r} out of range for a {m}x{n} matrix")


def solve_k_assignment(
    matrix: SampledMatrix | Sequence[Sequence[Number]], k: int
) -> SolveResult:
    """Globally minimal sum of k independent entries, deterministic on ties.

    Runs k successive shortest-path augmentations; each path is found by
    a multi-source Dijkstra from the unassigned rows over reduced costs,
    with potentials updated by the capped rule pi(x) += min(dist(x), D).
    """
    a = _as_matrix(matrix)
    m, n = len(a), len(a[0])
    _check_k(k, m, n)

    base = k + 1
    top = base ** (m * n)
    zero = a[0][0] - a[0][0]  # additive zero in the entry type

    def tie(r: int, c: int) -> int:
        return top - base ** (m * n - 1 - (r * n + c))

    pot_r: list[list] = [[zero, 0] for _ in range(m)]
    pot_c: list[list] = [[zero, 0] for _ in range(n)]
    match_rc: list[int | None] = [None] * m
    match_cr: list[int | None] = [None] * n

    for _ in range(k):
        dist_r: list[tuple | None] = [None] * m
        dist_c: list[tuple | None] = [None] * n
        done_r = [False] * m
        done_c = [False] * n
        parent_c: list[int | None] = [None] * n  # column <- row it was relaxed from
        heap: list[tuple] = []
        for r in range(m):
            if match_rc[r] is None:
                dist_r[r] = (zero, 0)
                heappush(heap, (zero, 0, 0, r))
        end: int | None = None
        bound: tuple | None = None
        while heap:
            d0, d1, kind, x = heappop(heap)
            if kind == 0:
                if done_r[x] or (d0, d1) != dist_r[x]:
                    continue
                done_r[x] = True
                for c in range(n):
                    if match_rc[x] == c or done_c[c]:
                        continue
                    # reduced cost convention: c(r,c) + pot_r - pot_c >= 0
                    nd = (
                        d0 + a[x][c] + pot_r[x][0] - pot_c[c][0],
                        d1 + tie(x, c) + pot_r[x][1] - pot_c[c][1],
                    )
                    if dist_c[c] is None or nd < dist_c[c]:
                        dist_c[c] = nd
                        parent_c[c] = x
                        heappush(heap, (nd[0], nd[1], 1, c))
            else:
                if done_c[x] or (d0, d1) != dist_c[x]:
                    continue
                done_c[x] = True
                r = match_cr[x]
                if r is None:
                    end = x
                    bound = (d0, d1)
                    break
                if not done_r[r] and (dist_r[r] is None or (d0, d1) < dist_r[r]):
                    dist_r[r] = (d0, d1)
                    heappush(heap, (d0, d1, 0, r))
        assert end is not None and bound is not None, "augmenting path must exist for k <= min(m,n)"

        for r in range(m):
            d = dist_r[r]
            inc = bound if d is None or d > bound else d
            pot_r[r][0] += inc[0]
            pot_r[r][1] += inc[1]
        for c in range(n):
            d = dist_c[c]
            inc = bound if d is None or d > bound else d
            pot_c[c][0] += inc[0]
            pot_c[c][1] += inc[1]

        c: int | None = end
        while c is not None:
            r = parent_c[c]
            prev = match_rc[r]
            match_rc[r] = c
            match_cr[c] = r
            c = prev

    positions = tuple(sorted((r, match_rc[r]) for r in range(m) if match_rc[r] is not None))
    cost = zero
    for r, c in positions:
        cost = cost + a[r][c]
    return SolveResult(cost=cost, assignment=Assignment(positions))


def _independent_k_sets(m: int, n: int, k: int) -> Iterable[tuple[Position, ...]]:
    for rows in combinations(range(m), k):
        for cols in permutations(range(n), k):
            yield tuple(sorted(zip(rows, cols)))


def _enumeration_count(m: int, n: int, k: int) -> int:
    return math.comb(m, k) * math.perm(n, k)


def brute_force_k_assignment(
    matrix: SampledMatrix | Sequence[Sequence[Number]], k: int
) -> SolveResult:
    """Exhaustive reference solver over every independent k-set."""
    a = _as_matrix(matrix)
    m, n = len(a), len(a[0])
    _check_k(k, m, n)
    if _enumeration_count(m, n, k) > ENUMERATION_LIMIT:
        raise ValueError(f"instance too large for brute force ({m}x{n}, k={k})")
    best: tuple | None = None
    for positions in _independent_k_sets(m, n, k):
        cost = sum(a[r][c] for r, c in positions)
        key = (cost, positions)
        if best is None or key < best:
            best = key
    assert best is not None
    return SolveResult(cost=best[0], assignment=Assignment(best[1]))


def enumerate_optimal_assignments(
    matrix: SampledMatrix | Sequence[Sequence[Number]], k: int
) -> list[Assignment]:
    """All independent k-sets attaining the minimum cost.

    Exact comparison for int and Fraction entries; for float entries a
    relative tolerance of 1e-12 guards rounding in the summed costs.
    """
    a = _as_matrix(matrix)
    m, n = len(a), len(a[0])
    _check_k(k, m, n)
    if _enumeration_count(m, n, k) > ENUMERATION_LIMIT:
        raise ValueError(f"instance too large for enumeration ({m}x{n}, k={k})")
    scored = [
        (sum(a[r][c] for r, c in positions), positions)
        for positions in _independent_k_sets(m, n, k)
    ]
    floating = any(isinstance(x, float) for row in a for x in row)
    best = min(cost for cost, _ in scored)
    if floating:
        cutoff = best + abs(best) * 1e-12
        chosen = [p for cost, p in scored if cost <= cutoff]
    else:
        chosen = [p for cost, p in scored if cost == best]
    return [Assignment(p) for p in sorted(set(chosen))]


def symmetric_difference_paths(mu: Assignment, nu: Assignment) -> list[AlternatingPath]:
    """Decompose mu (triangle) nu into maximal alternating paths.

    Every position in the symmetric difference has at most one same-row
    neighbor and one same-column neighbor from the other assignment, so
    the components are paths and cycles; cycles are traversed in full
    starting from their smallest position.
    """
    if len(mu.positions) != len(nu.positions):
        raise ValueError("assignments must have equal size")
    mu_only = set(mu.positions) - set(nu.positions)
    nu_only = set(nu.positions) - set(mu.positions)
    diff = mu_only | nu_only

    def neighbors(p: Position) -> list[Position]:
        other = nu_only if p in mu_only else mu_only
        r, c = p
        out = [q for q in other if q[0] == r or q[1] == c]
        assert len(out) <= 2
        return sorted(out)

    paths: list[AlternatingPath] = []
    seen: set[Position] = set()
    for start in sorted(diff):
        if start in seen:
            continue
        component = {start}
        frontier = [start]
        while frontier:
            p = frontier.pop()
            for q in neighbors(p):
                if q not in component:
                    component.add(q)
                    frontier.append(q)
        endpoints = sorted(p for p in component if len(neighbors(p)) < 2)
        head = endpoints[0] if endpoints else min(component)
        order = [head]
        seen.add(head)
        cur = head
        while True:
            nxt = [q for q in neighbors(cur) if q not in seen]
            if not nxt:
                break
            cur = nxt[0]
            order.append(cur)
            seen.add(cur)
        assert len(order) == len(component)
        paths.append(AlternatingPath(tuple(order)))
    return paths


def uses_row(a: Assignment, r: int) -> bool:
    """True iff some position of the assignment lies in row r."""
    return any(p[0] == r for p in a.positions)
