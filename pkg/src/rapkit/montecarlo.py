"""Seeded Monte Carlo estimation for standard RAPs.

Sampling is reproducible and thread-count independent: sample i draws
from its own counter-based substream (Philox keyed by the seed, counter
i * 2^128), so any partition of the index range produces bit-identical
per-sample results, and reduction merges fixed-size chunks in index
order.

The hot path solves each sampled matrix with the C implementation of
the rectangular assignment solver, reduced from k-cardinality to full
assignment by padding with zero-cost dummy columns that absorb the
m - k unused rows.  Statistical conclusions are tie-insensitive: every
estimated quantity (cost, zero-free-row usage, nonzero-entry usage) is
invariant across optimal assignments with probability 1.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Callable

import numpy as np
from scipy.optimize import linear_sum_assignment

from .formulas import cover_formula_value, min_entry_usage_probability
from .model import (
    RapInstance,
    SampledMatrix,
    insert_zero,
    instance,
    rational_to_json,
)

_CHUNK = 512


@dataclass(frozen=True)
class EstimateReport:
    """Mean and standard error of a Monte Carlo estimate."""

    mean: float
    stderr: float
    samples: int
    seed: int
    target: Fraction | None = None

    def within_3_sigma(self) -> bool | None:
        if self.target is None:
            return None
        return abs(self.mean - float(self.target)) <= 3 * self.stderr

    def to_json_obj(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "seed": self.seed,
            "target": None if self.target is None else rational_to_json(self.target),
        }


def _check_seed(seed: int) -> int:
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ValueError(f"seed must be a 64-bit nonnegative integer, got {seed!r}")
    return seed


def _check_samples(samples: int) -> int:
    if not isinstance(samples, int) or isinstance(samples, bool) or samples < 2:
        raise ValueError(f"samples must be an integer >= 2, got {samples!r}")
    return samples


def substream(seed: int, index: int) -> np.random.Generator:
    """The generator for sample `index` under `seed`; disjoint by construction."""
    return np.random.Generator(np.random.Philox(key=seed, counter=index << 128))


def _sample_array(m: int, n: int, zero_mask: np.ndarray, gen: np.random.Generator) -> np.ndarray:
    # -log(U) with U in (0,1]: 1 - random() never hits 0; redraw the
    # measure-zero U = 1 collisions so nonzero entries stay positive
    a = -np.log1p(-gen.random((m, n)))
    a[zero_mask] = 0.0
    while True:
        bad = (a == 0.0) & ~zero_mask
        if not bad.any():
            return a
        a[bad] = -np.log1p(-gen.random(int(bad.sum())))


def sample_matrix(p: RapInstance, rng: int | np.random.Generator) -> SampledMatrix:
    """One realization of the standard RAP: zeros at Z, exp(1) elsewhere."""
    gen = substream(_check_seed(rng), 0) if isinstance(rng, int) else rng
    zero_mask = np.zeros((p.m, p.n), dtype=bool)
    for r, c in p.zeros:
        zero_mask[r, c] = True
    a = _sample_array(p.m, p.n, zero_mask, gen)
    entries = tuple(tuple(float(x) for x in row) for row in a)
    return SampledMatrix(p.m, p.n, entries, source=p.pattern)


def _solve_positions(a: np.ndarray, k: int) -> tuple[float, set[tuple[int, int]]]:
    """Minimum-cost k-assignment via dummy-column padding; cost and positions."""
    m, n = a.shape
    if k < m:
        padded = np.concatenate([a, np.zeros((m, m - k))], axis=1)
    else:
        padded = a
    rows, cols = linear_sum_assignment(padded)
    chosen = {(int(r), int(c)) for r, c in zip(rows, cols) if c < n}
    cost = float(sum(a[r, c] for r, c in chosen))
    return cost, chosen


def _run(
    p: RapInstance,
    samples: int,
    seed: int,
    per_sample: Callable[[np.ndarray, float, set[tuple[int, int]]], float],
    threads: int = 1,
    csv_out: IO[str] | None = None,
) -> tuple[float, float]:
    """Chunked deterministic sampling loop; returns (mean, stderr) of the statistic."""
    zero_mask = np.zeros((p.m, p.n), dtype=bool)
    for r, c in p.zeros:
        zero_mask[r, c] = True

    def chunk(start: int) -> tuple[float, float, list[tuple[int, float, float]]]:
        stop = min(start + _CHUNK, samples)
        total = 0.0
        total_sq = 0.0
        rows: list[tuple[int, float, float]] = []
        for i in range(start, stop):
            a = _sample_array(p.m, p.n, zero_mask, substream(seed, i))
            cost, chosen = _solve_positions(a, p.k)
            x = per_sample(a, cost, chosen)
            total += x
            total_sq += x * x
            if csv_out is not None:
                rows.append((i, cost, x))
        return total, total_sq, rows

    starts = range(0, samples, _CHUNK)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(chunk, starts))
    else:
        results = [chunk(s) for s in starts]

    grand = 0.0
    grand_sq = 0.0
    for total, total_sq, rows in results:
        grand += total
        grand_sq += total_sq
        for i, cost, x in rows:
            csv_out.write(f"{i},{cost!r},{x!r}\n")
    mean = grand / samples
    variance = max(grand_sq - samples * mean * mean, 0.0) / (samples - 1)
    return mean, math.sqrt(variance / samples)


def estimate_value(
    p: RapInstance,
    samples: int,
    seed: int,
    threads: int = 1,
    csv_out: IO[str] | None = None,
    target: Fraction | None = None,
) -> EstimateReport:
    """Sample mean of the optimal k-assignment cost."""
    _check_samples(samples)
    _check_seed(seed)
    if csv_out is not None:
        csv_out.write("sample,cost,statistic\n")
    mean, stderr = _run(p, samples, seed, lambda a, cost, chosen: cost, threads, csv_out)
    return EstimateReport(mean, stderr, samples, seed, target)


def estimate_row_usage(
    p: RapInstance,
    r: int,
    samples: int,
    seed: int,
    threads: int = 1,
    csv_out: IO[str] | None = None,
    target: Fraction | None = None,
) -> EstimateReport:
    """Frequency with which the optimal assignment uses zero-free row r."""
    _check_samples(samples)
    _check_seed(seed)
    if not 0 <= r < p.m:
        raise IndexError(f"row index {r} out of range for m={p.m}")
    if any(zr == r for zr, _ in p.zeros):
        raise ValueError(f"row {r} contains a zero; usage varies across optima")
    if csv_out is not None:
        csv_out.write("sample,cost,statistic\n")
    mean, stderr = _run(
        p,
        samples,
        seed,
        lambda a, cost, chosen: float(any(pos[0] == r for pos in chosen)),
        threads,
        csv_out,
    )
    return EstimateReport(mean, stderr, samples, seed, target)


def estimate_entry_usage(
    p: RapInstance,
    pos: tuple[int, int],
    samples: int,
    seed: int,
    threads: int = 1,
    csv_out: IO[str] | None = None,
) -> EstimateReport:
    """Frequency with which a nonzero position is used, against E(P) - E(P').

    The exact target replaces the entry at `pos` by a zero and takes the
    cover-formula difference of the two instances.
    """
    _check_samples(samples)
    _check_seed(seed)
    r, c = pos
    if not (0 <= r < p.m and 0 <= c < p.n):
        raise IndexError(f"position {pos} out of range")
    if pos in p.zeros:
        raise ValueError(f"position {pos} is a zero; usage varies across optima")
    target = cover_formula_value(p) - cover_formula_value(insert_zero(p, pos))
    if csv_out is not None:
        csv_out.write("sample,cost,statistic\n")
    mean, stderr = _run(
        p,
        samples,
        seed,
        lambda a, cost, chosen: float((r, c) in chosen),
        threads,
        csv_out,
    )
    return EstimateReport(mean, stderr, samples, seed, target)


def estimate_min_entry_usage(
    k: int,
    m: int,
    n: int,
    samples: int,
    seed: int,
    threads: int = 1,
    csv_out: IO[str] | None = None,
) -> EstimateReport:
    """Frequency with which the smallest entry of a zero-free instance is used."""
    _check_samples(samples)
    _check_seed(seed)
    p = instance(m, n, k)
    target = min_entry_usage_probability(k, m, n)

    def used_min(a: np.ndarray, cost: float, chosen: set[tuple[int, int]]) -> float:
        r, c = np.unravel_index(int(np.argmin(a)), a.shape)
        return float((int(r), int(c)) in chosen)

    if csv_out is not None:
        csv_out.write("sample,cost,statistic\n")
    mean, stderr = _run(p, samples, seed, used_min, threads, csv_out)
    return EstimateReport(mean, stderr, samples, seed, target)
