"""Search for categorizations that maximize Category Utility.

The objective of a partitioning is the mean (or sum) over its blocks of the
block-versus-complement utility.  Quadratic utility is the default and is
compared exactly; entropy-based utility is compared with the relative tie
tolerance of :class:`~catutil.measures.MeasureOptions`.

Ties are broken lexicographically on sorted dataset positions, so results
do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from catutil import measures as m
from catutil.dataset import Category, Dataset, DatasetError, Hierarchy, Level, validate_hierarchy
from catutil.measures import DEFAULT_OPTIONS, MeasureOptions

MAX_EXHAUSTIVE = 20
OBJECTIVES = ("cu-quad", "cu-info")
AGGREGATES = ("mean", "sum")
_SCREEN_RTOL = 1e-9


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class MergeTrace:
    """Singleton start plus the ordered list of merges (each a pair of id sets)."""

    initial: tuple[frozenset, ...]
    merges: tuple[tuple[frozenset, frozenset], ...]


@dataclass(frozen=True)
class Partitioning:
    blocks: tuple[Category, ...]
    objective: float | Fraction
    trace: MergeTrace | None = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.blocks)


def block_utility(d: Dataset, members: frozenset, opts: MeasureOptions = DEFAULT_OPTIONS, objective: str = "cu-quad"):
    """Utility of one block against its complement; 0 when either side carries no weight."""
    w = d.weight_of(members)
    exact = objective == "cu-quad"
    if w == 0 or w == d.total_weight:
        return Fraction(0) if exact else 0.0
    if exact:
        return m.cu_quad_partition(d, members, opts)
    return m.cu_info_partition(d, members, opts)


def partition_objective(
    d: Dataset,
    blocks: Sequence,
    opts: MeasureOptions = DEFAULT_OPTIONS,
    objective: str = "cu-quad",
    aggregate: str = "mean",
):
    _check(objective, aggregate)
    sets = [frozenset(b.members if isinstance(b, Category) else b) for b in blocks]
    covered = frozenset().union(*sets)
    if covered != d.all_ids or sum(len(s) for s in sets) != len(d):
        raise DatasetError("blocks do not partition the dataset")
    vals = [block_utility(d, s, opts, objective) for s in sets]
    total = sum(vals, Fraction(0)) if objective == "cu-quad" else math.fsum(vals)
    return total / len(sets) if aggregate == "mean" else total


def _check(objective, aggregate):
    if objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {objective!r}")
    if aggregate not in AGGREGATES:
        raise ValueError(f"unknown aggregate {aggregate!r}")


def _positions(d: Dataset, members) -> tuple[int, ...]:
    return tuple(sorted(d.position[i] for i in members))


def _category(d: Dataset, positions, name=None) -> Category:
    return Category(frozenset(d.ids[p] for p in positions), name)


# -- exhaustive two-block search ----------------------------------------------------


def _integer_weights(d: Dataset) -> np.ndarray:
    den = 1
    for inst in d.instances:
        den = den * inst.weight.denominator // math.gcd(den, inst.weight.denominator)
    return np.array([float(inst.weight * den) for inst in d.instances])


def _xlogx(x: np.ndarray) -> np.ndarray:
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def _screen_scores(d: Dataset, masks: np.ndarray, w: np.ndarray, dims, objective: str) -> np.ndarray:
    """Float utility of block A (rows of ``masks``) against its complement, up to a positive factor."""
    total = w.sum()
    wa = masks @ w
    wb = total - wa
    score = np.zeros(len(masks))
    valid = (wa > 0) & (wb > 0)
    safe_a = np.where(valid, wa, 1.0)
    safe_b = np.where(valid, wb, 1.0)
    for j in dims:
        onehot = np.zeros((len(d), d.schema.dimensions[j].cardinality))
        onehot[np.arange(len(d)), [inst.values[j] for inst in d.instances]] = 1.0
        vw = onehot * w[:, None]
        a = masks @ vw
        b = vw.sum(axis=0) - a
        if objective == "cu-quad":
            score += (a * a).sum(axis=1) / safe_a + (b * b).sum(axis=1) / safe_b
        else:
            # total * MI, dropping terms that do not depend on the split
            score += _xlogx(a).sum(axis=1) + _xlogx(b).sum(axis=1)
    if objective == "cu-info":
        score -= _xlogx(wa) + _xlogx(wb)
    return np.where(valid, score, -np.inf)


def best_split_exhaustive(
    d: Dataset,
    opts: MeasureOptions = DEFAULT_OPTIONS,
    objective: str = "cu-quad",
) -> Partitioning:
    """The proper two-block split with the highest utility, by full enumeration.

    Every split is scored in floating point; those within a relative 1e-9 of
    the best are rescored with the exact measures.  Among exact ties the
    split whose first block (the one holding the first instance) has the
    lexicographically smallest sorted positions wins.
    """
    _check(objective, "mean")
    n = len(d)
    if n < 2:
        raise DatasetError("need at least two instances to split")
    if n > MAX_EXHAUSTIVE:
        raise DatasetError(f"exhaustive search is limited to {MAX_EXHAUSTIVE} instances, got {n}")
    dims = opts.selected(d)
    w = _integer_weights(d)
    # instance 0 always in block A; bits of the code choose the rest
    # a set bit moves that instance out of block A; code 0 (A = everything) is skipped
    codes = np.arange(1, 2 ** (n - 1), dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(n - 1)) & 1).astype(np.float64)
    masks = np.hstack([np.ones((len(codes), 1)), 1.0 - bits])
    scores = _screen_scores(d, masks, w, dims, objective)
    if np.all(np.isinf(scores)):
        # every split leaves a weightless side; all score 0
        candidates = np.arange(len(codes))
    else:
        best = scores.max()
        candidates = np.nonzero(scores >= best - _SCREEN_RTOL * max(abs(best), 1.0))[0]

    best_val = None
    best_key = None
    for idx in candidates:
        pos = tuple(int(p) for p in np.nonzero(masks[idx])[0])
        val = block_utility(d, frozenset(d.ids[p] for p in pos), opts, objective)
        if best_val is None or _better(val, pos, best_val, best_key, opts):
            best_val, best_key = val, pos
    rest = tuple(p for p in range(n) if p not in best_key)
    blocks = (_category(d, best_key, "B1"), _category(d, rest, "B2"))
    return Partitioning(blocks, best_val)


def _better(val, key, best_val, best_key, opts: MeasureOptions) -> bool:
    if isinstance(val, Fraction):
        if val != best_val:
            return val > best_val
    else:
        scale = max(abs(val), abs(best_val), 1.0)
        if abs(val - best_val) > opts.tie_epsilon * scale:
            return val > best_val
    return key < best_key


# -- greedy agglomeration ---------------------------------------------------------


def greedy_agglomerate(
    d: Dataset,
    k: int,
    opts: MeasureOptions = DEFAULT_OPTIONS,
    objective: str = "cu-quad",
    aggregate: str = "mean",
) -> Partitioning:
    """Merge blocks pairwise, starting from singletons, until ``k`` remain.

    Each step takes the merge giving the highest objective; ties go to the
    merged block with the lexicographically smallest sorted positions.
    """
    _check(objective, aggregate)
    n = len(d)
    if not 1 <= k <= n:
        raise ValueError(f"k must be between 1 and {n}, got {k}")
    cache: dict[tuple, object] = {}

    def util(block: tuple) -> object:
        if block not in cache:
            cache[block] = block_utility(d, frozenset(d.ids[p] for p in block), opts, objective)
        return cache[block]

    blocks = [(p,) for p in range(n)]
    total = sum((util(b) for b in blocks), Fraction(0) if objective == "cu-quad" else 0.0)
    merges = []
    while len(blocks) > k:
        best = None
        for i in range(len(blocks)):
            for j in range(i + 1, len(blocks)):
                merged = tuple(sorted(blocks[i] + blocks[j]))
                new_total = total - util(blocks[i]) - util(blocks[j]) + util(merged)
                if best is None or _better(new_total, merged, best[0], best[1], opts):
                    best = (new_total, merged, i, j)
        total, merged, i, j = best
        merges.append((frozenset(d.ids[p] for p in blocks[i]), frozenset(d.ids[p] for p in blocks[j])))
        blocks = [b for t, b in enumerate(blocks) if t not in (i, j)] + [merged]
        blocks.sort()
    objective_value = total / len(blocks) if aggregate == "mean" else total
    trace = MergeTrace(tuple(frozenset([i]) for i in d.ids), tuple(merges))
    cats = tuple(_category(d, b, f"B{t + 1}") for t, b in enumerate(blocks))
    return Partitioning(cats, objective_value, trace)


def _replay(trace: MergeTrace) -> dict[int, list[frozenset]]:
    """Partition after each merge, keyed by block count."""
    current = list(trace.initial)
    if any(len(b) != 1 for b in current):
        raise TraceError("trace must start from singletons")
    out = {len(current): list(current)}
    for step, (a, b) in enumerate(trace.merges, start=1):
        if a not in current or b not in current or a == b:
            raise TraceError(f"merge {step} joins blocks that are not both present")
        current = [blk for blk in current if blk not in (a, b)] + [a | b]
        out[len(current)] = list(current)
    return out


def hierarchy_from_merges(trace: MergeTrace, d: Dataset, block_counts: Sequence[int] | None = None) -> Hierarchy:
    """Nested levels from a merge trace: the population root plus the chosen block counts.

    By default the only level below the root is the final partitioning.
    """
    states = _replay(trace)
    if frozenset().union(*trace.initial) != d.all_ids:
        raise TraceError("trace does not cover the dataset")
    final = min(states)
    counts = {final} if block_counts is None else set(block_counts)
    counts.add(1)
    missing = [c for c in counts if c != 1 and c not in states]
    if missing:
        raise TraceError(f"block counts {sorted(missing)} do not occur in the trace")
    levels = []
    for count in sorted(counts):
        blocks = [d.all_ids] if count == 1 else states[count]
        blocks = sorted(blocks, key=lambda b: _positions(d, b))
        cats = tuple(Category(b, "root" if count == 1 else f"k{count}-{t + 1}") for t, b in enumerate(blocks))
        levels.append(Level(cats, "root" if count == 1 else f"k={count}"))
    return validate_hierarchy(Hierarchy(tuple(levels)), d)


def hierarchy_from_partitioning(p: Partitioning, d: Dataset) -> Hierarchy:
    """Root plus the partitioning's blocks (used for exhaustive splits)."""
    levels = [Level((Category(d.all_ids, "root"),), "root")]
    if len(p.blocks) > 1:
        levels.append(Level(p.blocks, f"k={len(p.blocks)}"))
    return validate_hierarchy(Hierarchy(tuple(levels)), d)
