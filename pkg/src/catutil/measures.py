"""Category-goodness measures.

Two families of Category Utility are provided, each in a partition form
(``c`` against its complement) and a single-category form:

* entropy based, in units set by ``MeasureOptions.log_base`` (bits by default);
* quadratic, the expected gain in correct guesses of a probability-matching
  receiver.  These are computed exactly and returned as ``Fraction``.

Rival measures (cue validity, category validity, collocation) need a notion
of "the features of a category"; see :class:`FeatureRule`.

Multi-dimension values are sums over the selected dimensions.  The
``*_by_dimension`` functions return the per-dimension terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Sequence

from catutil.dataset import CategoryLike, Dataset, DatasetError, Distribution


class FeatureRule(str, Enum):
    MODAL = "modal"
    ALL_WEIGHTED = "all-weighted"


@dataclass(frozen=True)
class MeasureOptions:
    log_base: float = 2.0
    dimensions: tuple[int, ...] | None = None
    feature_rule: FeatureRule = FeatureRule.MODAL
    tie_epsilon: float = 1e-9

    def __post_init__(self):
        if not self.log_base > 1:
            raise ValueError(f"log base must exceed 1, got {self.log_base}")
        if self.dimensions is not None:
            dims = tuple(self.dimensions)
            if not dims:
                raise ValueError("dimension subset must be non-empty")
            object.__setattr__(self, "dimensions", dims)
        object.__setattr__(self, "feature_rule", FeatureRule(self.feature_rule))
        if self.tie_epsilon < 0:
            raise ValueError("tie epsilon must be non-negative")

    def selected(self, d: Dataset) -> tuple[int, ...]:
        if self.dimensions is None:
            return tuple(range(len(d.schema)))
        for j in self.dimensions:
            if not 0 <= j < len(d.schema):
                raise ValueError(f"dimension index {j} out of range")
        return self.dimensions


DEFAULT_OPTIONS = MeasureOptions()


class RivalMeasures(NamedTuple):
    cue_validity: Fraction
    category_validity: Fraction
    collocation: Fraction


# -- primitives -----------------------------------------------------------------


def _entropy(probs, base: float) -> float:
    h = 0.0
    for p in probs:
        if p > 0:
            p = float(p)
            h -= p * math.log(p)
    # the summation can leave -0.0 or a tiny negative for degenerate vectors
    return max(h, 0.0) / math.log(base)


def _entropy_of_weights(weights: Sequence, base: float) -> float:
    total = sum(weights)
    return _entropy([w / total for w in weights], base)


def _sum_squares(weights: Sequence) -> Fraction:
    """Sum of squared relative frequencies, exact for integer or rational weights."""
    total = sum(weights)
    return Fraction(sum(w * w for w in weights), total * total)


def uncertainty(p: Distribution | Sequence, opts: MeasureOptions = DEFAULT_OPTIONS) -> float:
    """Entropy of a value distribution, with 0 log 0 taken as 0."""
    if not isinstance(p, Distribution):
        p = Distribution(-1, tuple(p))
    return _entropy(p.probabilities, opts.log_base)


class _Split(NamedTuple):
    members: frozenset
    p_c: Fraction
    inside: tuple  # per-dimension value counts of c
    outside: tuple  # per-dimension value counts of not-c
    w_in: int
    w_out: int


def _split(d: Dataset, c: CategoryLike, proper: bool) -> _Split:
    members = d.check_members(c)
    if not members:
        raise DatasetError("empty category")
    if proper and members == d.all_ids:
        raise DatasetError("category covers the whole population; partition measures need a proper subset")
    # counts are weights in Dataset.scaled_weights units
    w_in = d.count_of(members)
    if w_in == 0:
        raise DatasetError("category has zero total weight")
    inside = d.value_counts(members)
    outside = tuple(
        tuple(m - i for m, i in zip(marg, row)) for marg, row in zip(d.marginal_counts, inside)
    )
    total = d.total_count
    return _Split(members, Fraction(w_in, total), inside, outside, w_in, total - w_in)


# -- entropy-based category utility ---------------------------------------------


def cu_info_partition_by_dimension(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> list[float]:
    s = _split(d, c, proper=True)
    base = opts.log_base
    p_c = float(s.p_c)
    out = []
    for j in opts.selected(d):
        h = _entropy_of_weights(d.marginal_counts[j], base)
        h_in = _entropy_of_weights(s.inside[j], base)
        h_out = _entropy_of_weights(s.outside[j], base) if s.w_out > 0 else h
        # written per block so that a block matching the marginal contributes exactly 0
        out.append(p_c * (h - h_in) + (1.0 - p_c) * (h - h_out))
    return out


def cu_info_partition(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> float:
    """Expected reduction in attribute uncertainty from learning c versus not-c."""
    return math.fsum(cu_info_partition_by_dimension(d, c, opts))


def cu_info_category_by_dimension(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> list[float]:
    s = _split(d, c, proper=False)
    base = opts.log_base
    p_c = float(s.p_c)
    out = []
    for j in opts.selected(d):
        h = _entropy_of_weights(d.marginal_counts[j], base)
        h_in = _entropy_of_weights(s.inside[j], base)
        out.append(p_c * (h - h_in))
    return out


def cu_info_category(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> float:
    """P(c) times the drop in uncertainty from the population to c.  May be negative."""
    return math.fsum(cu_info_category_by_dimension(d, c, opts))


# -- quadratic category utility -------------------------------------------------


def cu_quad_partition_by_dimension(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> list[Fraction]:
    s = _split(d, c, proper=True)
    out = []
    for j in opts.selected(d):
        inner = s.p_c * _sum_squares(s.inside[j])
        if s.w_out > 0:
            inner += (1 - s.p_c) * _sum_squares(s.outside[j])
        out.append(inner - _sum_squares(d.marginal_counts[j]))
    return out


def cu_quad_partition(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> Fraction:
    """Expected gain in correct guesses for a matching receiver told c or not-c."""
    return sum(cu_quad_partition_by_dimension(d, c, opts), Fraction(0))


def cu_quad_category_by_dimension(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> list[Fraction]:
    s = _split(d, c, proper=False)
    return [
        s.p_c * (_sum_squares(s.inside[j]) - _sum_squares(d.marginal_counts[j]))
        for j in opts.selected(d)
    ]


def cu_quad_category(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> Fraction:
    return sum(cu_quad_category_by_dimension(d, c, opts), Fraction(0))


# -- rival measures ---------------------------------------------------------------


def modal_value(weights: Sequence[Fraction]) -> int:
    """Index of the heaviest value; ties go to the lowest index."""
    best = 0
    for i, w in enumerate(weights):
        if w > weights[best]:
            best = i
    return best


def rival_measures_by_dimension(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> list[RivalMeasures]:
    s = _split(d, c, proper=False)
    w_in = s.w_in
    out = []
    for j in opts.selected(d):
        inside = s.inside[j]
        marginal = d.marginal_counts[j]
        if opts.feature_rule is FeatureRule.MODAL:
            f = modal_value(inside)
            cue = Fraction(inside[f], marginal[f])
            cat = Fraction(inside[f], w_in)
            out.append(RivalMeasures(cue, cat, cue * cat))
        else:
            cue = cat = col = Fraction(0)
            for w, m in zip(inside, marginal):
                if w == 0:
                    continue
                p_f_c = Fraction(w, w_in)
                p_c_f = Fraction(w, m)
                cue += p_f_c * p_c_f
                cat += p_f_c * p_f_c
                col += p_f_c * p_c_f * p_f_c
            out.append(RivalMeasures(cue, cat, col))
    return out


def rival_measures(d: Dataset, c: CategoryLike, opts: MeasureOptions = DEFAULT_OPTIONS) -> RivalMeasures:
    """Cue validity p(c|f), category validity p(f|c) and their product, averaged over dimensions."""
    per_dim = rival_measures_by_dimension(d, c, opts)
    n = len(per_dim)
    return RivalMeasures(*(sum(col, Fraction(0)) / n for col in zip(*per_dim)))
