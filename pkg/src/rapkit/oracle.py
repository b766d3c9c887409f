"""Independent exact evaluator of E(P) by symbolic conditioning.

States carry an m x n matrix whose entries are linear combinations of
independent exponential variables with nonnegative rational
coefficients.  Three exact rewrites drive the evaluation:

* reduce: delete any line contained in every (k-1)-cover of the zeros
  (decrementing k), and stop a branch once k independent zeros exist.
  The deletion identity holds pointwise for every nonnegative matrix
  with that zero pattern, so it is valid for arbitrary entry
  distributions.
* pair conditioning: when no minimal non-covered nonstandard entry
  exists, pick the first two incomparable potentially minimal ones and
  condition on which of the two scaled disagreement variables is
  smaller, rewriting both through fresh variables Y, Z.
* minimum conditioning: when a minimal non-covered nonstandard entry
  exists (or none at all), condition on the minimum of one of its terms
  together with all non-covered standard entries; the minimum Y is
  subtracted from every non-covered entry and added to every doubly
  covered one, extracting expected cost (k - |cover|) * E[Y].

Every branch weight and every coefficient is an exact Fraction, so the
final value is an exact rational.  A lexicographic 5-part measure
(zeros, cover rows, potentially minimal count, disagreement variables,
variable count of the minimal entry) strictly decreases at every
branching step, which is asserted at runtime.

The evaluator never touches the cover-coefficient formula; it shares
only the Koenig machinery with the rest of the package, which is what
makes it an independent oracle for that formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import IO, Iterable, Mapping

from .covers import LineCover, forced_cover_lines, max_independent_zeros, row_maximal_cover
from .model import BudgetExceededError, Position, RapInstance, ZeroPattern

DEFAULT_NODE_BUDGET = 10**6
_CANONICAL_CANDIDATE_CAP = 4000


@dataclass(frozen=True)
class ExpVariable:
    """An exponential variable: opaque integer id and positive intensity."""

    id: int
    intensity: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "intensity", Fraction(self.intensity))
        if self.intensity <= 0:
            raise ValueError(f"intensity must be positive, got {self.intensity}")


@dataclass(frozen=True)
class LinearEntry:
    """A nonnegative rational linear combination of exponential variables.

    Stored sparsely as (variable id, coefficient) pairs sorted by id;
    zero coefficients are never stored, and the empty combination is the
    constant 0 (a matrix zero).
    """

    terms: tuple[tuple[int, Fraction], ...] = ()

    def __post_init__(self) -> None:
        normalized = tuple(sorted((v, Fraction(c)) for v, c in self.terms))
        object.__setattr__(self, "terms", normalized)
        for _, c in normalized:
            if c <= 0:
                raise ValueError(f"coefficients must be positive, got {c}")
        if len({v for v, _ in normalized}) != len(normalized):
            raise ValueError("duplicate variable in entry")

    @classmethod
    def of(cls, mapping: Mapping[int, Fraction]) -> "LinearEntry":
        return cls(tuple((v, c) for v, c in mapping.items() if c))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coeff(self, vid: int) -> Fraction:
        for v, c in self.terms:
            if v == vid:
                return c
        return Fraction(0)

    def variables(self) -> tuple[int, ...]:
        return tuple(v for v, _ in self.terms)

    def le(self, other: "LinearEntry") -> bool:
        """Componentwise comparison: every coefficient at most the other's."""
        theirs = dict(other.terms)
        return all(c <= theirs.get(v, Fraction(0)) for v, c in self.terms)

    def incomparable(self, other: "LinearEntry") -> bool:
        return not self.le(other) and not other.le(self)


@dataclass(frozen=True)
class ExpRapState:
    """A RAP over exponential linear-combination entries.

    `accumulated` is expected cost already extracted on the path from
    the root; the state's total value is accumulated plus the expected
    optimal k-assignment cost of the symbolic matrix.
    """

    k: int
    entries: tuple[tuple[LinearEntry, ...], ...]
    variables: tuple[ExpVariable, ...]
    accumulated: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "accumulated", Fraction(self.accumulated))
        if self.accumulated < 0:
            raise ValueError("accumulated cost must be nonnegative")
        ids = {v.id for v in self.variables}
        if len(ids) != len(self.variables):
            raise ValueError("duplicate variable id in table")
        for row in self.entries:
            for entry in row:
                for v in entry.variables():
                    if v not in ids:
                        raise ValueError(f"entry references unknown variable {v}")

    @property
    def m(self) -> int:
        return len(self.entries)

    @property
    def n(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    def intensity(self, vid: int) -> Fraction:
        for v in self.variables:
            if v.id == vid:
                return v.intensity
        raise KeyError(vid)

    def zero_pattern(self) -> ZeroPattern:
        zeros = tuple(
            (r, c)
            for r, row in enumerate(self.entries)
            for c, e in enumerate(row)
            if e.is_zero
        )
        return ZeroPattern(self.m, self.n, zeros)


@dataclass(frozen=True)
class EntryClassification:
    """Per-entry labels plus the bookkeeping the conditioning rules need."""

    labels: tuple[tuple[str, ...], ...]  # "zero" | "standard" | "nonstandard"
    cover: LineCover  # row-maximal optimal cover of the zeros
    non_covered_nonstandard: tuple[Position, ...]
    potentially_minimal: tuple[Position, ...]
    minimal: Position | None
    first_incomparable_pair: tuple[Position, Position] | None


def make_initial_state(p: RapInstance) -> ExpRapState:
    """The standard RAP as a symbolic state: one unit variable per nonzero."""
    zeros = set(p.zeros)
    variables = []
    rows = []
    vid = 0
    for r in range(p.m):
        row = []
        for c in range(p.n):
            if (r, c) in zeros:
                row.append(LinearEntry())
            else:
                variables.append(ExpVariable(vid, Fraction(1)))
                row.append(LinearEntry(((vid, Fraction(1)),)))
                vid += 1
        rows.append(tuple(row))
    return ExpRapState(p.k, tuple(rows), tuple(variables))


def _collect(entries: Iterable[Iterable[LinearEntry]]) -> set[int]:
    return {v for row in entries for e in row for v in e.variables()}


def _gc(
    entries: tuple[tuple[LinearEntry, ...], ...], variables: tuple[ExpVariable, ...]
) -> tuple[ExpVariable, ...]:
    used = _collect(entries)
    return tuple(v for v in variables if v.id in used)


def is_terminal(s: ExpRapState) -> bool:
    """True when k independent zeros exist; the branch value is `accumulated`."""
    return max_independent_zeros(s.zero_pattern()) >= s.k


def reduce_state(s: ExpRapState) -> ExpRapState:
    """Delete lines contained in every (k-1)-cover until a fixed point.

    Stops early when the state becomes terminal.  Deleting such a line
    and decrementing k leaves the optimal cost of every realization
    unchanged, so the expected value is preserved exactly.
    """
    while True:
        zp = s.zero_pattern()
        if max_independent_zeros(zp) >= s.k:
            return s
        rows, cols = forced_cover_lines(zp, s.k - 1)
        if rows:
            r0 = min(rows)
            entries = tuple(row for r, row in enumerate(s.entries) if r != r0)
        elif cols:
            c0 = min(cols)
            entries = tuple(
                tuple(e for c, e in enumerate(row) if c != c0) for row in s.entries
            )
        else:
            return s
        s = ExpRapState(s.k - 1, entries, _gc(entries, s.variables), s.accumulated)


def classify_entries(s: ExpRapState) -> EntryClassification:
    """Label entries and locate the structures driving the case split."""
    occurrences: dict[int, int] = {}
    for row in s.entries:
        for e in row:
            for v in e.variables():
                occurrences[v] = occurrences.get(v, 0) + 1

    def label(e: LinearEntry) -> str:
        if e.is_zero:
            return "zero"
        if (
            len(e.terms) == 1
            and e.terms[0][1] == 1
            and occurrences[e.terms[0][0]] == 1
            and s.intensity(e.terms[0][0]) == 1
        ):
            return "standard"
        return "nonstandard"

    labels = tuple(tuple(label(e) for e in row) for row in s.entries)
    cover = row_maximal_cover(s.zero_pattern())
    ncn = tuple(
        (r, c)
        for r in range(s.m)
        if r not in cover.rows
        for c in range(s.n)
        if c not in cover.cols and labels[r][c] == "nonstandard"
    )

    def entry(p: Position) -> LinearEntry:
        return s.entries[p[0]][p[1]]

    def strictly_below(a: LinearEntry, b: LinearEntry) -> bool:
        return a.le(b) and not b.le(a)

    pm = tuple(
        p for p in ncn if not any(strictly_below(entry(q), entry(p)) for q in ncn if q != p)
    )
    minimal = None
    for p in ncn:
        if all(entry(p).le(entry(q)) for q in ncn):
            minimal = p
            break
    pair = None
    if minimal is None:
        for i in range(len(pm)):
            for j in range(i + 1, len(pm)):
                if entry(pm[i]).incomparable(entry(pm[j])):
                    pair = (pm[i], pm[j])
                    break
            if pair:
                break
    return EntryClassification(labels, cover, ncn, pm, minimal, pair)


def induction_measure(s: ExpRapState) -> tuple[int, int, int, int, int]:
    """The 5-part lexicographic termination measure, smaller is simpler."""
    cls = classify_entries(s)
    disagreements = 0
    if cls.first_incomparable_pair is not None:
        (r1, c1), (r2, c2) = cls.first_incomparable_pair
        e1, e2 = s.entries[r1][c1], s.entries[r2][c2]
        allv = set(e1.variables()) | set(e2.variables())
        disagreements = sum(1 for v in allv if e1.coeff(v) != e2.coeff(v))
    minimal_vars = 0
    if cls.minimal is not None:
        minimal_vars = len(s.entries[cls.minimal[0]][cls.minimal[1]].terms)
    return (
        -max_independent_zeros(s.zero_pattern()),
        len(cls.cover.rows),
        len(cls.potentially_minimal),
        disagreements,
        minimal_vars,
    )


def _fresh_ids(s: ExpRapState, count: int) -> list[int]:
    start = max((v.id for v in s.variables), default=-1) + 1
    return list(range(start, start + count))


def _substitute(
    entries: tuple[tuple[LinearEntry, ...], ...],
    rules: Mapping[int, tuple[tuple[int, Fraction], ...]],
) -> tuple[tuple[LinearEntry, ...], ...]:
    """Replace each variable in `rules` by a nonnegative combination."""

    def rewrite(e: LinearEntry) -> LinearEntry:
        if not any(v in rules for v, _ in e.terms):
            return e
        acc: dict[int, Fraction] = {}
        for v, c in e.terms:
            if v in rules:
                for w, d in rules[v]:
                    acc[w] = acc.get(w, Fraction(0)) + c * d
            else:
                acc[v] = acc.get(v, Fraction(0)) + c
        return LinearEntry.of(acc)

    return tuple(tuple(rewrite(e) for e in row) for row in entries)


def condition_pair(
    s: ExpRapState, u1: Position, u2: Position
) -> tuple[tuple[Fraction, ExpRapState], tuple[Fraction, ExpRapState]]:
    """Split on which scaled disagreement variable of two entries is smaller.

    With e1 = a1*Xi + b1*Xj + ... and e2 = a2*Xi + b2*Xj + ... where
    a1 > a2 and b2 > b1, the events are (a1-a2)Xi < (b2-b1)Xj and its
    complement; in each child both variables are rewritten through the
    minimum Y and the residual Z, after which e1 and e2 share their
    Y-coefficient.  No cost is extracted.  Weights sum to 1.
    """
    e1 = s.entries[u1[0]][u1[1]]
    e2 = s.entries[u2[0]][u2[1]]
    if not e1.incomparable(e2):
        raise ValueError("entries must be incomparable to pair-condition")
    i = min(v for v in set(e1.variables()) | set(e2.variables()) if e1.coeff(v) > e2.coeff(v))
    j = min(v for v in set(e1.variables()) | set(e2.variables()) if e2.coeff(v) > e1.coeff(v))
    a = e1.coeff(i) - e2.coeff(i)  # scale of Xi's excess in e1
    b = e2.coeff(j) - e1.coeff(j)  # scale of Xj's excess in e2
    ia = s.intensity(i) / a  # intensity of a*Xi
    ib = s.intensity(j) / b  # intensity of b*Xj
    total = ia + ib
    y_id, z_id = _fresh_ids(s, 2)

    def child(first_is_i: bool) -> tuple[Fraction, ExpRapState]:
        # minimum Y of the two scaled variables, residual Z on the loser
        weight = (ia if first_is_i else ib) / total
        z_intensity = ib if first_is_i else ia
        y = ((y_id, Fraction(1)),)
        y_plus_z = ((y_id, Fraction(1)), (z_id, Fraction(1)))
        if first_is_i:
            rules = {
                i: tuple((w, c / a) for w, c in y),
                j: tuple((w, c / b) for w, c in y_plus_z),
            }
        else:
            rules = {
                j: tuple((w, c / b) for w, c in y),
                i: tuple((w, c / a) for w, c in y_plus_z),
            }
        entries = _substitute(s.entries, rules)
        variables = tuple(v for v in s.variables if v.id not in (i, j)) + (
            ExpVariable(y_id, total),
            ExpVariable(z_id, z_intensity),
        )
        return weight, ExpRapState(s.k, entries, _gc(entries, variables), s.accumulated)

    first, second = child(True), child(False)
    assert first[0] + second[0] == 1 and first[0] > 0 and second[0] > 0
    return first, second


def condition_minimum(
    s: ExpRapState,
) -> tuple[Fraction, list[tuple[Fraction, ExpRapState]]]:
    """Condition on the minimum of the candidate set S; extract expected cost.

    S holds one term a*Xi of the minimal non-covered nonstandard entry
    (when such an entry exists) and every non-covered standard entry.
    The minimum Y of S has intensity I = sum of member intensities, and
    by the cover recursion the expected cost (k - |cover|)/I is
    extracted.  Each child conditions on a member being the minimum,
    replaces the conditioned variables through Y and fresh residuals,
    subtracts Y from all non-covered entries, and adds Y to all doubly
    covered ones.  Weights sum to 1.
    """
    cls = classify_entries(s)
    cover = cls.cover
    size = len(cover)
    assert size < s.k, "caller must reduce the state first"
    if cls.non_covered_nonstandard and cls.minimal is None:
        raise ValueError("no minimal non-covered nonstandard entry; pair-condition instead")

    term: tuple[int, Fraction] | None = None
    if cls.minimal is not None:
        e = s.entries[cls.minimal[0]][cls.minimal[1]]
        term = min(e.terms)  # lexicographically smallest variable id
    std_positions = [
        (r, c)
        for r in range(s.m)
        if r not in cover.rows
        for c in range(s.n)
        if c not in cover.cols and cls.labels[r][c] == "standard"
    ]
    std_vars = [s.entries[r][c].terms[0][0] for r, c in std_positions]
    assert term is not None or std_vars, "reduced state must have a non-covered candidate"

    member_intensities: list[Fraction] = []
    if term is not None:
        vid, coeff = term
        member_intensities.append(s.intensity(vid) / coeff)
    member_intensities.extend(Fraction(1) for _ in std_vars)
    total = sum(member_intensities, Fraction(0))
    extracted = Fraction(s.k - size, 1) / total

    non_covered = [
        (r, c)
        for r in range(s.m)
        if r not in cover.rows
        for c in range(s.n)
        if c not in cover.cols
    ]
    doubly = [(r, c) for r in cover.rows for c in cover.cols]

    members: list[tuple[str, int]] = []
    if term is not None:
        members.append(("term", term[0]))
    members.extend(("std", v) for v in std_vars)

    children: list[tuple[Fraction, ExpRapState]] = []
    for idx, (kind, vid) in enumerate(members):
        weight = member_intensities[idx] / total
        fresh = _fresh_ids(s, len(members))
        y_id = fresh[0]
        new_vars: list[ExpVariable] = [ExpVariable(y_id, total)]
        rules: dict[int, tuple[tuple[int, Fraction], ...]] = {}
        for jdx, (okind, ovid) in enumerate(members):
            if jdx == idx:
                # the minimum itself: member value equals Y exactly
                if okind == "term":
                    a = term[1]
                    rules[ovid] = ((y_id, 1 / a),)
                else:
                    rules[ovid] = ((y_id, Fraction(1)),)
            else:
                z_id = fresh[1 + jdx - (1 if jdx > idx else 0)]
                if okind == "term":
                    a = term[1]
                    rules[ovid] = ((y_id, 1 / a), (z_id, 1 / a))
                    new_vars.append(ExpVariable(z_id, member_intensities[jdx]))
                else:
                    rules[ovid] = ((y_id, Fraction(1)), (z_id, Fraction(1)))
                    new_vars.append(ExpVariable(z_id, Fraction(1)))
        entries = _substitute(s.entries, rules)

        matrix = [list(row) for row in entries]
        for r, c in non_covered:
            e = matrix[r][c]
            cy = e.coeff(y_id)
            assert cy >= 1, "every non-covered entry must contain the minimum"
            acc = {v: x for v, x in e.terms}
            acc[y_id] = cy - 1
            matrix[r][c] = LinearEntry.of(acc)
        for r, c in doubly:
            e = matrix[r][c]
            acc = {v: x for v, x in e.terms}
            acc[y_id] = e.coeff(y_id) + 1
            matrix[r][c] = LinearEntry.of(acc)
        new_entries = tuple(tuple(row) for row in matrix)
        variables = tuple(v for v in s.variables if v.id not in rules) + tuple(new_vars)
        children.append(
            (
                weight,
                ExpRapState(
                    s.k, new_entries, _gc(new_entries, variables), s.accumulated + extracted
                ),
            )
        )
    assert sum(w for w, _ in children) == 1 and all(w > 0 for w, _ in children)
    return extracted, children


# ---------------------------------------------------------------------------
# Canonical form for memoization
# ---------------------------------------------------------------------------


def canonical_key(s: ExpRapState):
    """A hashable key equal for states identical up to row/column permutation
    and variable renaming; accumulated cost is excluded.

    Rows and columns are ordered by content signatures that ignore
    variable identity; signature ties are broken by trying every
    permutation of the tied blocks and keeping the lexicographically
    smallest encoding.  Equal keys imply identical value distributions;
    distinct keys for isomorphic states merely cost a cache miss.
    """
    intensity = {v.id: v.intensity for v in s.variables}

    def entry_sig(e: LinearEntry):
        return tuple(sorted((c, intensity[v]) for v, c in e.terms))

    sig = [[entry_sig(e) for e in row] for row in s.entries]
    row_keys = [tuple(sorted(row)) for row in sig]
    col_keys = [tuple(sorted(sig[r][c] for r in range(s.m))) for c in range(s.n)]

    def orders(keys):
        order = sorted(range(len(keys)), key=lambda i: keys[i])
        blocks: list[list[int]] = []
        for i in order:
            if blocks and keys[blocks[-1][0]] == keys[i]:
                blocks[-1].append(i)
            else:
                blocks.append([i])
        perms_count = 1
        for b in blocks:
            for x in range(2, len(b) + 1):
                perms_count *= x
        return blocks, perms_count

    row_blocks, nrow = orders(row_keys)
    col_blocks, ncol = orders(col_keys)

    def block_orders(blocks, cap_each):
        if cap_each:
            yield [i for b in blocks for i in b]
            return
        def rec(prefix, rest):
            if not rest:
                yield prefix
                return
            for perm in permutations(rest[0]):
                yield from rec(prefix + list(perm), rest[1:])
        yield from rec([], blocks)

    capped = nrow * ncol > _CANONICAL_CANDIDATE_CAP
    best = None
    for row_order in block_orders(row_blocks, capped):
        for col_order in block_orders(col_blocks, capped):
            rename: dict[int, int] = {}
            encoded = []
            ok = True
            for r in row_order:
                for c in col_order:
                    e = s.entries[r][c]
                    assigned = sorted(
                        (rename[v], c_) for v, c_ in e.terms if v in rename
                    )
                    fresh = sorted(
                        (c_, intensity[v], v) for v, c_ in e.terms if v not in rename
                    )
                    for c_, _, v in fresh:
                        rename[v] = len(rename)
                    cell = tuple(
                        sorted(assigned + [(rename[v], c_) for c_, _, v in fresh])
                    )
                    encoded.append(cell)
                    if best is not None and tuple(encoded) > best[0][: len(encoded)]:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            inv = sorted(rename, key=rename.get)
            candidate = (tuple(encoded), tuple(intensity[v] for v in inv))
            if best is None or candidate < best:
                best = candidate
    assert best is not None
    return (s.k, s.m, s.n) + best


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------


class _OracleRun:
    def __init__(self, budget: int, cache: dict | None, trace: IO[str] | None):
        self.budget = budget
        self.cache = {} if cache is None else cache
        self.trace = trace
        self.nodes = 0

    def emit(self, key, rule: str, weights: list[Fraction], extracted: Fraction) -> None:
        if self.trace is None:
            return
        line = {
            "node": self.nodes,
            "state": abs(hash(key)),
            "rule": rule,
            "weights": [str(w) for w in weights],
            "extracted": str(extracted),
        }
        self.trace.write(json.dumps(line) + "\n")


def _evaluate(s: ExpRapState, run: _OracleRun) -> Fraction:
    """Expected remaining cost of the state (ignores accumulated)."""
    s = reduce_state(s)
    if is_terminal(s):
        return Fraction(0)
    key = canonical_key(s)
    hit = run.cache.get(key)
    if hit is not None:
        return hit
    run.nodes += 1
    if run.nodes > run.budget:
        raise BudgetExceededError(
            f"oracle budget of {run.budget} recursion nodes exhausted", nodes=run.nodes
        )
    parent_measure = induction_measure(s)
    cls = classify_entries(s)
    if cls.non_covered_nonstandard and cls.minimal is None:
        assert cls.first_incomparable_pair is not None
        branches = list(condition_pair(s, *cls.first_incomparable_pair))
        extracted = Fraction(0)
        rule = "pair"
    else:
        extracted, branches = condition_minimum(s)
        rule = "minimum"
    run.emit(key, rule, [w for w, _ in branches], extracted)
    value = extracted
    for weight, child in branches:
        assert induction_measure(child) < parent_measure, "termination measure must drop"
        value += weight * _evaluate(child, run)
    run.cache[key] = value
    return value


def oracle_expected_value(
    p: RapInstance,
    budget: int = DEFAULT_NODE_BUDGET,
    cache: dict | None = None,
    trace: IO[str] | None = None,
) -> Fraction:
    """Exact E(P) for a standard RAP by symbolic conditioning.

    `budget` caps the number of evaluated recursion nodes (cache misses);
    `cache` may be shared across calls to reuse canonical subproblems;
    `trace` receives one JSON line per branching node.
    """
    if not isinstance(budget, int) or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget!r}")
    run = _OracleRun(budget, cache, trace)
    return _evaluate(make_initial_state(p), run)


def oracle_node_count(
    p: RapInstance,
    budget: int = DEFAULT_NODE_BUDGET,
    cache: dict | None = None,
    trace: IO[str] | None = None,
) -> tuple[Fraction, int]:
    """Value plus the number of evaluated nodes, for budget reporting."""
    if not isinstance(budget, int) or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget!r}")
    run = _OracleRun(budget, cache, trace)
    value = _evaluate(make_initial_state(p), run)
    return value, run.nodes
