"""Populations of items described by nominal attribute dimensions.

A :class:`Dataset` is a finite, optionally weighted population.  Every
probability used elsewhere in the package is a weighted relative frequency
over this population, kept as an exact :class:`fractions.Fraction` so that
ties between categories can be detected exactly.

Categories are sets of instance ids; a :class:`Hierarchy` is a list of
levels, each a partition of the population, strictly nested top-down.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

ID_COLUMN = "id"
WEIGHT_COLUMN = "weight"
DIST_TOLERANCE = 1e-9


class DatasetError(ValueError):
    """Malformed dataset input or violated dataset invariant."""


class HierarchyError(ValueError):
    """Malformed hierarchy input or violated hierarchy invariant."""


@dataclass(frozen=True)
class Dimension:
    name: str
    values: tuple[str, ...]

    @property
    def cardinality(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class AttributeSchema:
    dimensions: tuple[Dimension, ...]

    def __post_init__(self):
        if not self.dimensions:
            raise DatasetError("schema needs at least one dimension")
        names = [d.name for d in self.dimensions]
        if len(set(names)) != len(names):
            raise DatasetError(f"duplicate dimension names in {names}")
        for d in self.dimensions:
            if not d.values:
                raise DatasetError(f"dimension {d.name!r} has no values")
            if len(set(d.values)) != len(d.values):
                raise DatasetError(f"duplicate value labels in dimension {d.name!r}")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Sequence[str]]]) -> AttributeSchema:
        return cls(tuple(Dimension(name, tuple(values)) for name, values in pairs))

    def __len__(self) -> int:
        return len(self.dimensions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    def index_of(self, name: str) -> int:
        for i, d in enumerate(self.dimensions):
            if d.name == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class Instance:
    id: str
    values: tuple[int, ...]
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "weight", Fraction(self.weight))
        if self.weight < 0:
            raise DatasetError(f"instance {self.id!r}: negative weight {self.weight}")


@dataclass(frozen=True)
class Category:
    """A subset of a dataset's instances, identified by id."""

    members: frozenset[str]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, item) -> bool:
        return item in self.members


CategoryLike = Union[Category, Iterable[str]]


def as_members(c: CategoryLike) -> frozenset[str]:
    if isinstance(c, Category):
        return c.members
    if isinstance(c, str):
        raise TypeError("a category is a collection of ids, not a single string")
    return frozenset(c)


@dataclass(frozen=True)
class Distribution:
    """Probabilities of the values of one dimension."""

    dimension: int
    probabilities: tuple

    def __post_init__(self):
        probs = tuple(self.probabilities)
        object.__setattr__(self, "probabilities", probs)
        if any(p < 0 for p in probs):
            raise ValueError(f"negative probability in {probs}")
        if abs(float(sum(probs)) - 1.0) > DIST_TOLERANCE:
            raise ValueError(f"probabilities sum to {float(sum(probs))}, not 1")

    def __len__(self) -> int:
        return len(self.probabilities)

    def __getitem__(self, i):
        return self.probabilities[i]

    def __iter__(self):
        return iter(self.probabilities)


@dataclass(frozen=True)
class Dataset:
    schema: AttributeSchema
    instances: tuple[Instance, ...]

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(self.instances))
        if not self.instances:
            raise DatasetError("dataset has no instances")
        seen = set()
        ndim = len(self.schema)
        for inst in self.instances:
            if inst.id in seen:
                raise DatasetError(f"duplicate instance id {inst.id!r}")
            seen.add(inst.id)
            if len(inst.values) != ndim:
                raise DatasetError(
                    f"instance {inst.id!r} has {len(inst.values)} values, schema has {ndim} dimensions"
                )
            for dim, v in zip(self.schema.dimensions, inst.values):
                if not 0 <= v < dim.cardinality:
                    raise DatasetError(f"instance {inst.id!r}: value index {v} out of range for {dim.name!r}")
        if self.total_weight <= 0:
            raise DatasetError("total weight must be positive")

    @classmethod
    def from_rows(
        cls,
        names: Sequence[str],
        rows: Sequence[Sequence[str]],
        ids: Sequence[str] | None = None,
        weights: Sequence | None = None,
    ) -> Dataset:
        """Build a dataset from value labels; value order is first appearance."""
        values: list[list[str]] = [[] for _ in names]
        lookup: list[dict[str, int]] = [{} for _ in names]
        instances = []
        for r, row in enumerate(rows):
            if len(row) != len(names):
                raise DatasetError(f"row {r}: {len(row)} cells for {len(names)} dimensions")
            idx = []
            for j, cell in enumerate(row):
                if cell not in lookup[j]:
                    lookup[j][cell] = len(values[j])
                    values[j].append(cell)
                idx.append(lookup[j][cell])
            inst_id = str(r) if ids is None else ids[r]
            w = Fraction(1) if weights is None else Fraction(weights[r])
            instances.append(Instance(inst_id, tuple(idx), w))
        return cls(AttributeSchema.from_pairs(zip(names, values)), tuple(instances))

    def __len__(self) -> int:
        return len(self.instances)

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(inst.id for inst in self.instances)

    @cached_property
    def position(self) -> dict[str, int]:
        return {inst.id: i for i, inst in enumerate(self.instances)}

    @cached_property
    def all_ids(self) -> frozenset[str]:
        return frozenset(self.ids)

    @cached_property
    def total_weight(self) -> Fraction:
        return sum((inst.weight for inst in self.instances), Fraction(0))

    @cached_property
    def marginal_weights(self) -> tuple[tuple[Fraction, ...], ...]:
        return self.value_weights(self.ids)

    @cached_property
    def scaled_weights(self) -> tuple[int, ...]:
        """Weights times the least common denominator, as integers.

        Every probability is a ratio of weight sums, so measures can work on
        these counts and never touch fractions until the final ratio.
        """
        den = 1
        for inst in self.instances:
            den = den * inst.weight.denominator // math.gcd(den, inst.weight.denominator)
        return tuple(int(inst.weight * den) for inst in self.instances)

    @cached_property
    def total_count(self) -> int:
        return sum(self.scaled_weights)

    @cached_property
    def marginal_counts(self) -> tuple[tuple[int, ...], ...]:
        return self.value_counts(self.ids)

    def count_of(self, members: Iterable[str]) -> int:
        w = self.scaled_weights
        return sum(w[self.position[m]] for m in members)

    def value_counts(self, members: Iterable[str]) -> tuple[tuple[int, ...], ...]:
        """Like :meth:`value_weights` but in :attr:`scaled_weights` units."""
        table = [[0] * d.cardinality for d in self.schema.dimensions]
        w = self.scaled_weights
        for m in members:
            p = self.position[m]
            for row, v in zip(table, self.instances[p].values):
                row[v] += w[p]
        return tuple(tuple(row) for row in table)

    def instance(self, inst_id: str) -> Instance:
        return self.instances[self.position[inst_id]]

    def check_members(self, c: CategoryLike) -> frozenset[str]:
        members = as_members(c)
        unknown = members - self.all_ids
        if unknown:
            raise DatasetError(f"unknown instance ids: {sorted(unknown)}")
        return members

    def weight_of(self, members: Iterable[str]) -> Fraction:
        return sum((self.instances[self.position[m]].weight for m in members), Fraction(0))

    def value_weights(self, members: Iterable[str]) -> tuple[tuple[Fraction, ...], ...]:
        """Per dimension, the total weight of ``members`` carrying each value."""
        table = [[Fraction(0)] * d.cardinality for d in self.schema.dimensions]
        for m in members:
            inst = self.instances[self.position[m]]
            for j, v in enumerate(inst.values):
                table[j][v] += inst.weight
        return tuple(tuple(row) for row in table)

    def complement(self, c: CategoryLike) -> frozenset[str]:
        return self.all_ids - self.check_members(c)

    def label(self, inst_id: str, dim: int) -> str:
        return self.schema.dimensions[dim].values[self.instance(inst_id).values[dim]]

    def rescaled(self, factor) -> Dataset:
        factor = Fraction(factor)
        return Dataset(
            self.schema,
            tuple(Instance(i.id, i.values, i.weight * factor) for i in self.instances),
        )


def conditional_distribution(d: Dataset, dim: int, c: CategoryLike | None = None) -> Distribution:
    """P(value | c) on dimension ``dim``; the marginal when ``c`` is None."""
    if c is None:
        weights = d.marginal_weights[dim]
        total = d.total_weight
    else:
        members = d.check_members(c)
        if not members:
            raise DatasetError("empty category")
        total = d.weight_of(members)
        if total == 0:
            raise DatasetError("category has zero total weight")
        weights = d.value_weights(members)[dim]
    return Distribution(dim, tuple(w / total for w in weights))


# -- CSV ----------------------------------------------------------------------


def parse_dataset(text: str) -> Dataset:
    """Parse comma-separated text with a header row.

    The optional ``id`` and ``weight`` columns are reserved; every other
    column is a nominal dimension.  Quoting is not supported.
    """
    lines = [(n, line) for n, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not lines:
        raise DatasetError("empty file")
    header_line, header = lines[0]
    columns = [h.strip() for h in header.split(",")]
    if any(not h for h in columns):
        raise DatasetError(f"line {header_line}: empty column name in header")
    if len(set(columns)) != len(columns):
        raise DatasetError(f"line {header_line}: duplicate column names")
    id_col = columns.index(ID_COLUMN) if ID_COLUMN in columns else None
    weight_col = columns.index(WEIGHT_COLUMN) if WEIGHT_COLUMN in columns else None
    dim_cols = [j for j, h in enumerate(columns) if j not in (id_col, weight_col)]
    if not dim_cols:
        raise DatasetError("no attribute columns")
    if len(lines) == 1:
        raise DatasetError("empty body: header has no data rows")

    rows, ids, weights = [], [], []
    for r, (n, line) in enumerate(lines[1:]):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != len(columns):
            raise DatasetError(f"line {n}: ragged row, {len(cells)} cells under {len(columns)} headers")
        for j, cell in enumerate(cells):
            if not cell:
                raise DatasetError(f"line {n}: empty cell in column {columns[j]!r}")
        ids.append(cells[id_col] if id_col is not None else str(r))
        if weight_col is not None:
            try:
                w = Fraction(cells[weight_col])
            except (ValueError, ZeroDivisionError):
                raise DatasetError(f"line {n}: bad weight {cells[weight_col]!r}") from None
            if w < 0:
                raise DatasetError(f"line {n}: negative weight {cells[weight_col]}")
            weights.append(w)
        rows.append([cells[j] for j in dim_cols])

    seen: dict[str, int] = {}
    for (n, _), inst_id in zip(lines[1:], ids):
        if inst_id in seen:
            raise DatasetError(f"line {n}: duplicate id {inst_id!r}")
        seen[inst_id] = n
    return Dataset.from_rows(
        [columns[j] for j in dim_cols], rows, ids, weights if weight_col is not None else None
    )


def _format_weight(w: Fraction) -> str:
    return str(w.numerator) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"


def dataset_to_csv(d: Dataset) -> str:
    """Serialize with explicit ``id`` and ``weight`` columns; weights stay exact."""
    header = [ID_COLUMN, *d.schema.names, WEIGHT_COLUMN]
    out = [",".join(header)]
    for inst in d.instances:
        labels = [dim.values[v] for dim, v in zip(d.schema.dimensions, inst.values)]
        out.append(",".join([inst.id, *labels, _format_weight(inst.weight)]))
    return "\n".join(out) + "\n"


# -- hierarchies --------------------------------------------------------------


@dataclass(frozen=True)
class Level:
    categories: tuple[Category, ...]
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "categories", tuple(self.categories))

    def __len__(self) -> int:
        return len(self.categories)

    def __iter__(self):
        return iter(self.categories)


@dataclass(frozen=True)
class Hierarchy:
    """Levels ordered most general first.  Use :func:`make_hierarchy` to validate."""

    levels: tuple[Level, ...]

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))

    def __len__(self) -> int:
        return len(self.levels)

    def __iter__(self):
        return iter(self.levels)


def _level_label(k: int, level: Level) -> str:
    return f"level {k + 1}" + (f" ({level.name!r})" if level.name else "")


def validate_hierarchy(h: Hierarchy, d: Dataset) -> Hierarchy:
    if not h.levels:
        raise HierarchyError("hierarchy has no levels")
    owner_prev: dict[str, int] | None = None
    prev_size = 0
    for k, level in enumerate(h.levels):
        where = _level_label(k, level)
        if not level.categories:
            raise HierarchyError(f"{where}: no categories")
        owner: dict[str, int] = {}
        for ci, cat in enumerate(level.categories):
            cname = cat.name or f"#{ci + 1}"
            if not cat.members:
                raise HierarchyError(f"{where}: category {cname!r} is empty")
            unknown = cat.members - d.all_ids
            if unknown:
                raise HierarchyError(f"{where}: category {cname!r} has unknown instance ids {sorted(unknown)}")
            for m in cat.members:
                if m in owner:
                    raise HierarchyError(
                        f"{where}: not a partition, instance {m!r} appears in more than one category"
                    )
                owner[m] = ci
        missing = d.all_ids - owner.keys()
        if missing:
            raise HierarchyError(f"{where}: not a partition, missing instances {sorted(missing)}")
        if owner_prev is not None:
            for ci, cat in enumerate(level.categories):
                parents = {owner_prev[m] for m in cat.members}
                if len(parents) != 1:
                    cname = cat.name or f"#{ci + 1}"
                    raise HierarchyError(
                        f"{where}: nesting violation, category {cname!r} spans {len(parents)} categories of the level above"
                    )
        if len(level) <= prev_size:
            raise HierarchyError(
                f"{where}: has {len(level)} categories, must have more than the level above ({prev_size})"
            )
        owner_prev = owner
        prev_size = len(level)
    return h


def make_hierarchy(levels: Sequence, d: Dataset, names: Sequence[str] | None = None) -> Hierarchy:
    """Build and validate a hierarchy from nested collections of ids."""
    built = []
    for k, level in enumerate(levels):
        if isinstance(level, Level):
            built.append(level)
            continue
        cats = tuple(c if isinstance(c, Category) else Category(frozenset(c)) for c in level)
        built.append(Level(cats, names[k] if names else None))
    return validate_hierarchy(Hierarchy(tuple(built)), d)


def parse_hierarchy(text: str, d: Dataset) -> Hierarchy:
    """Parse ``{"levels": [{"name", "categories": [{"name", "members"}]}]}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise HierarchyError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("levels"), list):
        raise HierarchyError('expected an object with a "levels" array')
    levels = []
    for k, raw in enumerate(doc["levels"]):
        if not isinstance(raw, dict) or not isinstance(raw.get("categories"), list):
            raise HierarchyError(f'level {k + 1}: expected an object with a "categories" array')
        cats = []
        for ci, rc in enumerate(raw["categories"]):
            if not isinstance(rc, dict) or not isinstance(rc.get("members"), list):
                raise HierarchyError(f'level {k + 1}, category {ci + 1}: expected an object with a "members" array')
            members = [str(m) for m in rc["members"]]
            if len(set(members)) != len(members):
                raise HierarchyError(f"level {k + 1}, category {ci + 1}: duplicate member ids")
            cats.append(Category(frozenset(members), rc.get("name")))
        levels.append(Level(tuple(cats), raw.get("name")))
    return validate_hierarchy(Hierarchy(tuple(levels)), d)


def parse_category(text: str, d: Dataset) -> Category:
    """A category file is either a JSON id array or ``{"name", "members"}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DatasetError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    name = None
    if isinstance(doc, dict):
        name = doc.get("name")
        doc = doc.get("members")
    if not isinstance(doc, list):
        raise DatasetError('category file must be an id array or an object with "members"')
    cat = Category(frozenset(str(m) for m in doc), name)
    d.check_members(cat)
    return cat


def _sorted_members(members: Iterable[str], d: Dataset) -> list[str]:
    return sorted(members, key=d.position.__getitem__)


def hierarchy_to_dict(h: Hierarchy, d: Dataset) -> dict:
    levels = []
    for k, level in enumerate(h.levels):
        cats = []
        for ci, cat in enumerate(level.categories):
            cats.append({"name": cat.name or f"L{k + 1}C{ci + 1}", "members": _sorted_members(cat.members, d)})
        levels.append({"name": level.name or f"level-{k + 1}", "categories": cats})
    return {"levels": levels}


def hierarchy_to_json(h: Hierarchy, d: Dataset) -> str:
    return json.dumps(hierarchy_to_dict(h, d), indent=2) + "\n"
