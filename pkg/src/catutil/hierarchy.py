"""Per-level averages of every measure and basic-level prediction.

Levels are numbered from 1 (most general) in reports, orderings and
predictions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

from catutil import measures as m
from catutil.dataset import Category, Dataset, Hierarchy
from catutil.measures import DEFAULT_OPTIONS, MeasureOptions

MEASURE_IDS = (
    "cu-info-partition",
    "cu-info-category",
    "cu-quad-partition",
    "cu-quad-category",
    "cue-validity",
    "category-validity",
    "collocation",
)

# the other version of Category Utility, consulted to break ties
TIE_BREAKERS = {
    "cu-info-partition": "cu-quad-partition",
    "cu-quad-partition": "cu-info-partition",
    "cu-info-category": "cu-quad-category",
    "cu-quad-category": "cu-info-category",
}

SIGNIFICANT_DIGITS = 12


class UnknownMeasureError(KeyError):
    pass


def check_measure(measure: str) -> str:
    if measure not in MEASURE_IDS:
        raise UnknownMeasureError(f"unknown measure {measure!r}; choose from {', '.join(MEASURE_IDS)}")
    return measure


@dataclass(frozen=True)
class LevelRow:
    level: int
    name: str | None
    category_count: int
    means: dict  # measure id -> mean over the level's categories


@dataclass(frozen=True)
class MeasureReport:
    rows: tuple[LevelRow, ...]
    options: MeasureOptions = DEFAULT_OPTIONS
    weighted: bool = False

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, measure: str) -> list:
        check_measure(measure)
        return [row.means[measure] for row in self.rows]

    @classmethod
    def from_columns(cls, columns: dict, opts: MeasureOptions = DEFAULT_OPTIONS) -> MeasureReport:
        """Build a report directly from per-measure level means (for tests and tooling)."""
        n = len(next(iter(columns.values())))
        rows = tuple(
            LevelRow(k + 1, None, 0, {mid: columns[mid][k] for mid in columns}) for k in range(n)
        )
        return cls(rows, opts)


@dataclass(frozen=True)
class BasicLevelPrediction:
    level: int | None  # None when the tie could not be broken
    tied: tuple[int, ...]
    measure: str
    tie_break_used: bool


def category_measures(d: Dataset, c: Category, opts: MeasureOptions = DEFAULT_OPTIONS) -> dict:
    """All seven measures for one category.  Partition forms are 0 for the whole population."""
    members = d.check_members(c)
    full = members == d.all_ids or d.weight_of(members) == d.total_weight
    rival = m.rival_measures(d, members, opts)
    return {
        "cu-info-partition": 0.0 if full else m.cu_info_partition(d, members, opts),
        "cu-info-category": m.cu_info_category(d, members, opts),
        "cu-quad-partition": Fraction(0) if full else m.cu_quad_partition(d, members, opts),
        "cu-quad-category": m.cu_quad_category(d, members, opts),
        "cue-validity": rival.cue_validity,
        "category-validity": rival.category_validity,
        "collocation": rival.collocation,
    }


def level_report(d: Dataset, h: Hierarchy, opts: MeasureOptions = DEFAULT_OPTIONS, weighted: bool = False) -> MeasureReport:
    """Average each measure over the categories of every level.

    Means are unweighted by default; ``weighted=True`` weights each
    category by P(c) instead.
    """
    rows = []
    for k, level in enumerate(h.levels):
        per_cat = [category_measures(d, c, opts) for c in level.categories]
        if weighted:
            ps = [d.weight_of(c.members) / d.total_weight for c in level.categories]
        else:
            ps = [Fraction(1, len(per_cat))] * len(per_cat)
        means = {}
        for mid in MEASURE_IDS:
            vals = [row[mid] for row in per_cat]
            if isinstance(vals[0], float):
                means[mid] = sum(float(p) * v for p, v in zip(ps, vals))
            else:
                means[mid] = sum((p * v for p, v in zip(ps, vals)), Fraction(0))
        rows.append(LevelRow(k + 1, level.name, len(level), means))
    return MeasureReport(tuple(rows), opts, weighted)


def _tied(a, b, eps: float) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        diff = abs(a - b)
        return diff == 0 or diff <= Fraction(eps) * max(abs(a), abs(b), 1)
    a, b = float(a), float(b)
    return abs(a - b) <= eps * max(abs(a), abs(b), 1.0)


def _top(values: dict, eps: float) -> list[int]:
    best = max(values.values())
    return sorted(k for k, v in values.items() if _tied(v, best, eps))


def predict_basic_level(report: MeasureReport, measure: str, opts: MeasureOptions | None = None) -> BasicLevelPrediction:
    """Level with the highest mean of ``measure``.

    Levels within the relative tie tolerance of the maximum are tied.  A tie
    under one version of Category Utility is broken by the other version;
    rival measures have no tie-breaker.
    """
    check_measure(measure)
    if not report.rows:
        raise ValueError("empty report")
    eps = (opts or report.options).tie_epsilon
    column = {row.level: row.means[measure] for row in report.rows}
    tied = _top(column, eps)
    if len(tied) == 1:
        return BasicLevelPrediction(tied[0], tuple(tied), measure, False)
    other = TIE_BREAKERS.get(measure)
    if other is None:
        return BasicLevelPrediction(None, tuple(tied), measure, False)
    by_other = {row.level: row.means[other] for row in report.rows if row.level in tied}
    still = _top(by_other, eps)
    if len(still) == 1:
        return BasicLevelPrediction(still[0], tuple(tied), measure, True)
    return BasicLevelPrediction(None, tuple(still), measure, True)


def ordering(report: MeasureReport, measure: str, opts: MeasureOptions | None = None) -> list[list[int]]:
    """Levels by descending mean, grouped where tied."""
    check_measure(measure)
    if not report.rows:
        raise ValueError("empty report")
    eps = (opts or report.options).tie_epsilon
    ranked = sorted(report.rows, key=lambda r: (-r.means[measure], r.level))
    groups: list[list[int]] = []
    head = None
    for row in ranked:
        v = row.means[measure]
        if groups and _tied(v, head, eps):
            groups[-1].append(row.level)
        else:
            groups.append([row.level])
            head = v
    return groups


# -- serialization -------------------------------------------------------------


def format_number(x) -> str:
    return f"{float(x):.{SIGNIFICANT_DIGITS}g}"


def report_header(report: MeasureReport) -> list[str]:
    o = report.options
    dims = "all" if o.dimensions is None else ",".join(str(j) for j in o.dimensions)
    return [
        f"log-base={format_number(o.log_base)}",
        f"feature-rule={o.feature_rule.value}",
        f"dimensions={dims}",
        f"level-means={'weighted' if report.weighted else 'unweighted'}",
    ]


def report_to_tsv(report: MeasureReport) -> str:
    """Tab-separated table, one row per level.

    Columns: level, name, categories, then the measures in ``MEASURE_IDS``
    order.  A leading ``#`` line records the options used.
    """
    lines = ["# " + " ".join(report_header(report))]
    lines.append("\t".join(["level", "name", "categories", *MEASURE_IDS]))
    for row in report.rows:
        cells = [str(row.level), row.name or "", str(row.category_count)]
        cells += [format_number(row.means[mid]) for mid in MEASURE_IDS]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def report_to_dict(report: MeasureReport) -> dict:
    o = report.options
    return {
        "options": {
            "log_base": o.log_base,
            "feature_rule": o.feature_rule.value,
            "dimensions": None if o.dimensions is None else list(o.dimensions),
            "weighted": report.weighted,
        },
        "measures": list(MEASURE_IDS),
        "levels": [
            {
                "level": row.level,
                "name": row.name,
                "categories": row.category_count,
                "means": {mid: float(format_number(row.means[mid])) for mid in MEASURE_IDS},
            }
            for row in report.rows
        ],
    }


def report_to_json(report: MeasureReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
