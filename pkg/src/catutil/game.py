"""The attribute-guessing game behind quadratic Category Utility.

A sender draws an item (weight-proportional) and a receiver guesses its
value on every selected dimension, scoring one point per correct guess.
What the receiver knows is set by :class:`GameCondition`; how it guesses is
set by :class:`Strategy`.

Random streams
--------------
Trials are processed in chunks of ``CHUNK`` trials.  Chunk ``k`` of
substream ``s`` draws from ``Philox`` keyed by
``SeedSequence(seed, spawn_key=(s, k))``: first one uniform per trial for
the item, then one uniform per trial for each selected dimension in order
(matching strategy only).  Per-trial scores are small integers and are
summed exactly, so chunks may be evaluated in any order or in parallel.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from catutil.dataset import CategoryLike, Dataset, DatasetError
from catutil.measures import DEFAULT_OPTIONS, MeasureOptions, modal_value

CHUNK = 1 << 16
MAX_SEED = 2**64


class Strategy(str, Enum):
    PROBABILITY_MATCHING = "matching"
    MODAL = "modal"


class GameCondition(str, Enum):
    NONE = "none"
    PARTITION = "partition"
    CATEGORY_ONLY = "category-only"


@dataclass(frozen=True)
class ScoreEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stderr": self.stderr, "trials": self.trials, "seed": self.seed}


# receiver states: what the receiver believes the item's distribution is
_MARGINAL, _INSIDE, _OUTSIDE = 0, 1, 2


def _members(d: Dataset, c: CategoryLike | None, cond: GameCondition) -> frozenset | None:
    cond = GameCondition(cond)
    if cond is GameCondition.NONE:
        return None
    if c is None:
        raise DatasetError(f"condition {cond.value!r} needs a category")
    members = d.check_members(c)
    if not members:
        raise DatasetError("empty category")
    if d.weight_of(members) == 0:
        raise DatasetError("category has zero total weight")
    if cond is GameCondition.PARTITION and d.weight_of(d.all_ids - members) == 0:
        raise DatasetError("partition condition needs a category with a non-empty complement")
    return members


def _normalize(weights):
    total = sum(weights, Fraction(0))
    return [w / total for w in weights]


def _hit_rate(truth, belief, strat: Strategy) -> Fraction:
    """Expected score on one dimension when the item follows ``truth``."""
    if strat is Strategy.MODAL:
        return truth[modal_value(belief)]
    return sum((t * b for t, b in zip(truth, belief)), Fraction(0))


def closed_form_score(
    d: Dataset,
    c: CategoryLike | None,
    cond: GameCondition,
    strat: Strategy,
    opts: MeasureOptions = DEFAULT_OPTIONS,
) -> Fraction:
    """Exact expected score per trial, summed over dimensions.

    With the matching strategy and the partition condition the gain over
    ``NONE`` equals the quadratic partition utility.  Under
    ``CATEGORY_ONLY`` an item outside ``c`` is guessed from the population
    marginal, so that trial scores sum(P(f|not c) P(f)).
    """
    cond, strat = GameCondition(cond), Strategy(strat)
    members = _members(d, c, cond)
    total = 0
    for j in opts.selected(d):
        marg = _normalize(d.marginal_weights[j])
        if members is None:
            total += _hit_rate(marg, marg, strat)
            continue
        w_in = d.weight_of(members)
        p_c = w_in / d.total_weight
        inside = _normalize(d.value_weights(members)[j])
        score = p_c * _hit_rate(inside, inside, strat)
        if p_c < 1:
            outside = _normalize([m - i for m, i in zip(d.marginal_weights[j], d.value_weights(members)[j])])
            belief = outside if cond is GameCondition.PARTITION else marg
            score += (1 - p_c) * _hit_rate(outside, belief, strat)
        total += score
    return Fraction(total)


def _cumulative(probs) -> np.ndarray:
    """Float cumulative sums rounded from exact partial sums; last entry is exactly 1."""
    acc = Fraction(0)
    out = []
    for p in probs:
        acc += p
        out.append(float(acc))
    return np.array(out)


class _Tables:
    """Per-dimension guessing tables, indexed by receiver state."""

    def __init__(self, d: Dataset, members, cond: GameCondition, dims):
        self.item_cum = _cumulative(_normalize([inst.weight for inst in d.instances]))
        self.values = np.array([[inst.values[j] for j in dims] for inst in d.instances], dtype=np.int64)
        if members is None or cond is GameCondition.NONE:
            self.state = np.full(len(d), _MARGINAL)
        else:
            inside = np.array([inst.id in members for inst in d.instances])
            outside_state = _OUTSIDE if cond is GameCondition.PARTITION else _MARGINAL
            self.state = np.where(inside, _INSIDE, outside_state)
        self.cum = []
        self.modal = []
        for j in dims:
            rows = [_normalize(d.marginal_weights[j])]
            if members is not None:
                vin = d.value_weights(members)[j]
                rows.append(_normalize(vin))
                vout = [m - i for m, i in zip(d.marginal_weights[j], vin)]
                rows.append(_normalize(vout) if sum(vout) > 0 else rows[0])
            else:
                rows += [rows[0], rows[0]]
            self.cum.append(np.stack([_cumulative(r) for r in rows]))
            self.modal.append(np.array([modal_value(r) for r in rows]))


def _check_seed(seed: int) -> int:
    seed = int(seed)
    if not 0 <= seed < MAX_SEED:
        raise ValueError(f"seed must be in [0, 2**64), got {seed}")
    return seed


def _run_chunk(tables: _Tables, strat: Strategy, seed: int, stream: int, chunk: int, size: int) -> tuple[int, int]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream, chunk))))
    items = np.searchsorted(tables.item_cum, rng.random(size), side="right")
    items = np.minimum(items, len(tables.item_cum) - 1)
    state = tables.state[items]
    score = np.zeros(size, dtype=np.int64)
    for k, (cum, modal) in enumerate(zip(tables.cum, tables.modal)):
        truth = tables.values[items, k]
        if strat is Strategy.MODAL:
            guess = modal[state]
        else:
            u = rng.random(size)
            guess = (cum[state] <= u[:, None]).sum(axis=1)
        score += guess == truth
    return int(score.sum()), int((score * score).sum())


def _simulate(d, c, cond, strat, trials, seed, stream, opts, workers) -> ScoreEstimate:
    cond, strat = GameCondition(cond), Strategy(strat)
    if trials < 1:
        raise ValueError("trials must be at least 1")
    seed = _check_seed(seed)
    members = _members(d, c, cond)
    tables = _Tables(d, members, cond, opts.selected(d))
    sizes = [min(CHUNK, trials - start) for start in range(0, trials, CHUNK)]
    jobs = [(tables, strat, seed, stream, k, size) for k, size in enumerate(sizes)]
    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _run_chunk(*a), jobs))
    else:
        parts = [_run_chunk(*job) for job in jobs]
    s = sum(p[0] for p in parts)
    ss = sum(p[1] for p in parts)
    mean = Fraction(s, trials)
    if trials > 1:
        var = (Fraction(ss) - Fraction(s * s, trials)) / (trials - 1)
        stderr = math.sqrt(var / trials)
    else:
        stderr = 0.0
    return ScoreEstimate(float(mean), stderr, trials, seed)


def simulate(
    d: Dataset,
    c: CategoryLike | None,
    cond: GameCondition,
    strat: Strategy,
    trials: int,
    seed: int,
    opts: MeasureOptions = DEFAULT_OPTIONS,
    workers: int | None = None,
) -> ScoreEstimate:
    """Monte Carlo estimate of the expected score per trial.

    Output depends only on the inputs and ``seed``; ``workers`` changes
    nothing but wall time.
    """
    return _simulate(d, c, cond, strat, trials, seed, 0, opts, workers)


@dataclass(frozen=True)
class GainEstimate:
    gain: float
    stderr: float
    informed: ScoreEstimate
    baseline: ScoreEstimate

    def to_dict(self) -> dict:
        return {
            "gain": self.gain,
            "stderr": self.stderr,
            "informed": self.informed.to_dict(),
            "baseline": self.baseline.to_dict(),
        }


def empirical_gain(
    d: Dataset,
    c: CategoryLike | None,
    cond: GameCondition,
    strat: Strategy,
    trials: int,
    seed: int,
    opts: MeasureOptions = DEFAULT_OPTIONS,
    workers: int | None = None,
) -> GainEstimate:
    """Informed score minus the uninformed baseline, on independent substreams 1 and 2."""
    informed = _simulate(d, c, cond, strat, trials, seed, 1, opts, workers)
    baseline = _simulate(d, None, GameCondition.NONE, strat, trials, seed, 2, opts, workers)
    return GainEstimate(
        informed.mean - baseline.mean,
        math.hypot(informed.stderr, baseline.stderr),
        informed,
        baseline,
    )
