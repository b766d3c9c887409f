"""Core domain types for random assignment problems with zero patterns.

A problem instance is an m-by-n matrix shape together with a set Z of
positions that are forced to zero and an assignment size k.  All other
entries are understood to be independent exponential(1) random variables
when the instance is sampled or evaluated exactly.

Positions are 0-indexed (row, col) pairs everywhere: in the file format,
on the CLI, and internally.  All types are immutable values; operations
on them are pure functions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable

Position = tuple[int, int]


class RapError(Exception):
    """Base class for errors raised by this package."""


class InvalidInstanceError(RapError, ValueError):
    """An instance document or constructor argument violates the model."""


class BudgetExceededError(RapError):
    """A resource budget (recursion nodes, enumeration size) was exhausted."""

    def __init__(self, message: str, nodes: int | None = None):
        super().__init__(message)
        self.nodes = nodes


def _canonical_positions(positions: Iterable[Position]) -> tuple[Position, ...]:
    out = []
    for pos in positions:
        r, c = pos
        out.append((int(r), int(c)))
    return tuple(sorted(out))


@dataclass(frozen=True)
class ZeroPattern:
    """An m-by-n grid with a set of forced-zero positions.

    ``zeros`` is stored as a lexicographically sorted tuple so that equal
    patterns hash equally and iterate deterministically.
    """

    m: int
    n: int
    zeros: tuple[Position, ...] = ()

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise InvalidInstanceError(f"dimensions must be positive, got {self.m}x{self.n}")
        canon = _canonical_positions(self.zeros)
        if len(set(canon)) != len(canon):
            raise InvalidInstanceError("duplicate zero positions")
        for r, c in canon:
            if not (0 <= r < self.m and 0 <= c < self.n):
                raise InvalidInstanceError(f"zero position ({r},{c}) outside {self.m}x{self.n} grid")
        object.__setattr__(self, "zeros", canon)

    @property
    def zero_set(self) -> frozenset[Position]:
        return frozenset(self.zeros)

    def zeros_in_row(self, r: int) -> tuple[Position, ...]:
        return tuple(p for p in self.zeros if p[0] == r)

    def zeros_in_col(self, c: int) -> tuple[Position, ...]:
        return tuple(p for p in self.zeros if p[1] == c)


@dataclass(frozen=True)
class RapInstance:
    """A zero pattern plus the assignment size k; the object all formulas take."""

    pattern: ZeroPattern
    k: int

    def __post_init__(self) -> None:
        if not (1 <= self.k <= min(self.pattern.m, self.pattern.n)):
            raise InvalidInstanceError(
                f"k={self.k} must satisfy 1 <= k <= min(m,n)={min(self.pattern.m, self.pattern.n)}"
            )

    @property
    def m(self) -> int:
        return self.pattern.m

    @property
    def n(self) -> int:
        return self.pattern.n

    @property
    def zeros(self) -> tuple[Position, ...]:
        return self.pattern.zeros


def instance(m: int, n: int, k: int, zeros: Iterable[Position] = ()) -> RapInstance:
    """Shorthand constructor used throughout the package and the tests."""
    return RapInstance(ZeroPattern(m, n, tuple(zeros)), k)


@dataclass(frozen=True)
class Assignment:
    """A set of matrix positions, no two sharing a row or a column."""

    positions: tuple[Position, ...]

    def __post_init__(self) -> None:
        canon = _canonical_positions(self.positions)
        rows = [r for r, _ in canon]
        cols = [c for _, c in canon]
        if len(set(rows)) != len(rows) or len(set(cols)) != len(cols):
            raise InvalidInstanceError("assignment positions must be independent")
        object.__setattr__(self, "positions", canon)

    def __len__(self) -> int:
        return len(self.positions)

    def __contains__(self, pos: Position) -> bool:
        return pos in set(self.positions)

    @property
    def position_set(self) -> frozenset[Position]:
        return frozenset(self.positions)


@dataclass(frozen=True)
class SampledMatrix:
    """A realization of an instance: zeros at Z, positive reals elsewhere."""

    m: int
    n: int
    entries: tuple[tuple[float, ...], ...]
    source: ZeroPattern

    def __post_init__(self) -> None:
        if len(self.entries) != self.m or any(len(row) != self.n for row in self.entries):
            raise InvalidInstanceError("entry grid does not match declared dimensions")
        zset = self.source.zero_set
        for r in range(self.m):
            for c in range(self.n):
                v = self.entries[r][c]
                if (r, c) in zset:
                    if v != 0.0:
                        raise InvalidInstanceError(f"entry at zero position ({r},{c}) is {v}")
                elif not v > 0.0:
                    raise InvalidInstanceError(f"entry at ({r},{c}) must be strictly positive")

    def __getitem__(self, pos: Position) -> float:
        return self.entries[pos[0]][pos[1]]


# ---------------------------------------------------------------------------
# Instance transformations
# ---------------------------------------------------------------------------


def transpose_instance(p: RapInstance) -> RapInstance:
    """Swap rows and columns; every zero (r,c) becomes (c,r), k unchanged."""
    return instance(p.n, p.m, p.k, [(c, r) for r, c in p.zeros])


def delete_column(p: RapInstance, col: int) -> RapInstance:
    """Remove column ``col``, reindex the later columns, decrement k and n.

    Valid only when the shrunken instance is still a proper problem,
    i.e. n >= 2 and k >= 2.
    """
    if not (0 <= col < p.n):
        raise InvalidInstanceError(f"column index {col} out of range for n={p.n}")
    if p.k < 2 or p.k > min(p.m, p.n - 1):
        raise InvalidInstanceError(
            f"cannot delete a column unless 2 <= k <= min(m, n-1); k={p.k}, m={p.m}, n={p.n}"
        )
    zeros = [(r, c if c < col else c - 1) for r, c in p.zeros if c != col]
    return instance(p.m, p.n - 1, p.k - 1, zeros)


def delete_row(p: RapInstance, row: int) -> RapInstance:
    """Transpose-conjugate of :func:`delete_column`."""
    if not (0 <= row < p.m):
        raise InvalidInstanceError(f"row index {row} out of range for m={p.m}")
    if p.k < 2 or p.k > min(p.m - 1, p.n):
        raise InvalidInstanceError(
            f"cannot delete a row unless 2 <= k <= min(m-1, n); k={p.k}, m={p.m}, n={p.n}"
        )
    zeros = [(r if r < row else r - 1, c) for r, c in p.zeros if r != row]
    return instance(p.m - 1, p.n, p.k - 1, zeros)


def insert_zero(p: RapInstance, pos: Position) -> RapInstance:
    """Enlarge the zero set by ``pos``; everything else unchanged."""
    r, c = pos
    if not (0 <= r < p.m and 0 <= c < p.n):
        raise InvalidInstanceError(f"position ({r},{c}) outside {p.m}x{p.n} grid")
    if (r, c) in p.pattern.zero_set:
        raise InvalidInstanceError(f"position ({r},{c}) is already a zero")
    return instance(p.m, p.n, p.k, p.zeros + ((r, c),))


# ---------------------------------------------------------------------------
# Instance document format
# ---------------------------------------------------------------------------
#
# Canonical document: UTF-8 JSON object
#   {"m": int, "n": int, "k": int, "zeros": [[r, c], ...]}
# with 0-indexed positions, zeros sorted lexicographically on output.


def parse_instance(text: str) -> RapInstance:
    """Parse and validate an instance document; round-trips with serialize_instance."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInstanceError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise InvalidInstanceError("instance document must be a JSON object")
    missing = {"m", "n", "k"} - doc.keys()
    if missing:
        raise InvalidInstanceError(f"missing required keys: {sorted(missing)}")
    for key in ("m", "n", "k"):
        if not isinstance(doc[key], int) or isinstance(doc[key], bool):
            raise InvalidInstanceError(f"key {key!r} must be an integer")
    raw_zeros = doc.get("zeros", [])
    if not isinstance(raw_zeros, list):
        raise InvalidInstanceError("key 'zeros' must be a list of [row, col] pairs")
    zeros: list[Position] = []
    for item in raw_zeros:
        if (
            not isinstance(item, list)
            or len(item) != 2
            or not all(isinstance(x, int) and not isinstance(x, bool) for x in item)
        ):
            raise InvalidInstanceError(f"malformed zero position {item!r}")
        zeros.append((item[0], item[1]))
    return instance(doc["m"], doc["n"], doc["k"], zeros)


def serialize_instance(p: RapInstance) -> str:
    """Emit the canonical JSON document for an instance."""
    doc = {"m": p.m, "n": p.n, "k": p.k, "zeros": [list(z) for z in p.zeros]}
    return json.dumps(doc)


def load_instance(path: str) -> RapInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


# ---------------------------------------------------------------------------
# Rational values on the wire
# ---------------------------------------------------------------------------
#
# Exact values are plain fractions.Fraction objects (arbitrary-precision,
# always reduced, positive denominator).  The wire format is
#   {"num": string, "den": string, "approx": decimal-string}
# with the approximation carrying 12 significant digits.

APPROX_DIGITS = 12


def rational_approx(value: Fraction, digits: int = APPROX_DIGITS) -> str:
    """Decimal string of ``value`` with the given number of significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(value.numerator) / Decimal(value.denominator))


def rational_to_json(value: Fraction) -> dict[str, str]:
    return {
        "num": str(value.numerator),
        "den": str(value.denominator),
        "approx": rational_approx(value),
    }


def rational_from_json(doc: dict) -> Fraction:
    try:
        return Fraction(int(doc["num"]), int(doc["den"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstanceError(f"malformed rational object: {doc!r}") from exc
