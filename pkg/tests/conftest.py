"""Shared helpers: random instance generation and brute-force cover oracles."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from rapkit.model import RapInstance, ZeroPattern, instance


def random_instance(
    rng: random.Random,
    max_m: int = 4,
    max_n: int = 4,
    zero_density: float = 0.35,
    min_k: int = 1,
) -> RapInstance:
    m = rng.randint(max(1, min_k), max_m)
    n = rng.randint(max(1, min_k), max_n)
    k = rng.randint(min_k, min(m, n))
    zeros = [(r, c) for r in range(m) for c in range(n) if rng.random() < zero_density]
    return instance(m, n, k, zeros)


def random_fraction_matrix(
    rng: random.Random, m: int, n: int, zeros: set | None = None
) -> list[list[Fraction]]:
    zeros = zeros or set()
    return [
        [
            Fraction(0) if (r, c) in zeros else Fraction(rng.randint(1, 24), rng.randint(1, 8))
            for c in range(n)
        ]
        for r in range(m)
    ]


def brute_force_min_cover_size(z: ZeroPattern) -> int:
    """Smallest number of lines covering every zero, by subset enumeration."""
    best = None
    for rows in itertools.chain.from_iterable(
        itertools.combinations(range(z.m), i) for i in range(z.m + 1)
    ):
        rowset = set(rows)
        residual_cols = {c for r, c in z.zeros if r not in rowset}
        size = len(rowset) + len(residual_cols)
        if best is None or size < best:
            best = size
    return best


def all_patterns(m: int, n: int):
    cells = [(r, c) for r in range(m) for c in range(n)]
    for bits in range(1 << (m * n)):
        yield ZeroPattern(m, n, tuple(cells[i] for i in range(m * n) if bits >> i & 1))


@st.composite
def instances(draw, max_m: int = 4, max_n: int = 4):
    m = draw(st.integers(1, max_m))
    n = draw(st.integers(1, max_n))
    k = draw(st.integers(1, min(m, n)))
    cells = [(r, c) for r in range(m) for c in range(n)]
    zeros = draw(st.lists(st.sampled_from(cells), unique=True, max_size=m * n))
    return instance(m, n, k, zeros)


@pytest.fixture(scope="session")
def oracle_cache() -> dict:
    """Canonical-state memo shared across the whole session; exact, so safe."""
    return {}
