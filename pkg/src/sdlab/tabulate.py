"""Exact tabulations of a world.

A TableSpec names a geography level (block or region) and an ordered margin
drawn from {sex, age_bin, race, ethnicity}; tabulate() produces the dense
cross product per geography unit with explicit zeros, sorted canonically so
two equal tables serialize byte-identically.

Released (protected) tables reuse the same Table type: suppressed cells have
count None, and noisy counts may be negative.  Tables produced by tabulate()
itself are always nonnegative integers.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping

from .worldmodel import AgeBinSystem, Dataset, Person
from .worldmodel import _age_bins_from_json, _age_bins_to_json

__all__ = [
    "TableSpec",
    "Table",
    "tabulate",
    "invariant_totals",
    "VOTING_AGE",
    "table_to_json",
    "table_from_json",
    "table_spec_to_json_obj",
    "table_spec_from_json_obj",
]

MARGIN_ATTRIBUTES = ("sex", "age_bin", "race", "ethnicity")
GEOGRAPHY_LEVELS = ("block", "region")
VOTING_AGE = 18


@dataclass(frozen=True)
class TableSpec:
    """What to tabulate: geography level, margin attributes, age binning."""

    name: str
    group_by: str
    margin: tuple[str, ...]
    age_bins: AgeBinSystem | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "margin", tuple(self.margin))
        if self.group_by not in GEOGRAPHY_LEVELS:
            raise ValueError(f"group_by must be one of {GEOGRAPHY_LEVELS}, got {self.group_by!r}")
        seen = set()
        for attr in self.margin:
            if attr not in MARGIN_ATTRIBUTES:
                raise ValueError(f"unknown margin attribute {attr!r}")
            if attr in seen:
                raise ValueError(f"duplicate margin attribute {attr!r}")
            seen.add(attr)
        if "age_bin" in self.margin and self.age_bins is None:
            raise ValueError("margin uses age_bin but no age bin system given")


@dataclass(frozen=True)
class Table:
    """Dense counts keyed by (geography unit, margin value tuple)."""

    spec: TableSpec
    cells: tuple[tuple[str, tuple[int, ...], int | None], ...]

    def __post_init__(self) -> None:
        cells = tuple(
            (str(geo), tuple(int(v) for v in margin), None if count is None else int(count))
            for geo, margin, count in self.cells
        )
        object.__setattr__(self, "cells", tuple(sorted(cells, key=lambda c: (c[0], c[1]))))
        keys = [(geo, margin) for geo, margin, _ in self.cells]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate table cell key")

    def count(self, geo: str, margin: tuple[int, ...]) -> int | None:
        for g, m, c in self.cells:
            if g == geo and m == tuple(margin):
                return c
        raise KeyError((geo, margin))

    def as_mapping(self) -> dict[tuple[str, tuple[int, ...]], int | None]:
        return {(g, m): c for g, m, c in self.cells}

    def total(self) -> int:
        """Sum of published counts; suppressed cells are an error."""
        if any(c is None for _, _, c in self.cells):
            raise ValueError("table has suppressed cells; no exact total")
        return sum(c for _, _, c in self.cells)  # type: ignore[misc]

    def geos(self) -> tuple[str, ...]:
        return tuple(sorted({g for g, _, _ in self.cells}))


def _margin_domain(spec: TableSpec, race_levels: int, ethnicity_levels: int) -> list[tuple[int, ...]]:
    sizes = []
    for attr in spec.margin:
        if attr == "sex":
            sizes.append(2)
        elif attr == "age_bin":
            assert spec.age_bins is not None
            sizes.append(len(spec.age_bins))
        elif attr == "race":
            sizes.append(race_levels)
        elif attr == "ethnicity":
            sizes.append(ethnicity_levels)
    return [tuple(v) for v in itertools.product(*(range(s) for s in sizes))]


def _margin_value(spec: TableSpec, person: Person) -> tuple[int, ...]:
    values = []
    for attr in spec.margin:
        if attr == "age_bin":
            assert spec.age_bins is not None
            values.append(spec.age_bins.index_of(person.age))
        else:
            values.append(person.attribute(attr))
    return tuple(values)


def _attribute_levels(dataset: Dataset) -> tuple[int, int]:
    """Race/ethnicity domain sizes inferred as 1 + max observed level.

    tabulate() does not receive a Schema, so the dense margin domain covers
    every level that occurs; callers wanting wider explicit-zero domains
    tabulate a schema-complete dataset or pass levels via TableSpec margins.
    """
    real = [p for p in dataset.persons if not p.is_blank]
    race = 1 + max((p.race for p in real), default=0)
    ethnicity = 1 + max((p.ethnicity for p in real), default=0)
    return race, ethnicity


def tabulate(
    dataset: Dataset,
    spec: TableSpec,
    race_levels: int | None = None,
    ethnicity_levels: int | None = None,
) -> Table:
    """Count persons per (geography unit, margin tuple), zeros explicit."""
    inferred_race, inferred_eth = _attribute_levels(dataset)
    race_levels = inferred_race if race_levels is None else race_levels
    ethnicity_levels = inferred_eth if ethnicity_levels is None else ethnicity_levels

    if spec.group_by == "block":
        geos = list(dataset.blocks)
        geo_of = lambda p: p.block  # noqa: E731
    else:
        geos = list(dataset.regions)
        geo_of = lambda p: dataset.region_of(p.block)  # noqa: E731

    domain = _margin_domain(spec, race_levels, ethnicity_levels)
    counts: dict[tuple[str, tuple[int, ...]], int] = {
        (geo, margin): 0 for geo in geos for margin in domain
    }
    for person in dataset.persons:
        if person.is_blank and spec.margin:
            continue  # blank rows count only toward pure population totals
        key = (geo_of(person), _margin_value(spec, person))
        if key not in counts:
            raise ValueError(f"person {person.id} falls outside the declared margin domain: {key}")
        counts[key] += 1
    cells = tuple((geo, margin, n) for (geo, margin), n in counts.items())
    return Table(spec=spec, cells=cells)


def invariant_totals(dataset: Dataset, voting_age: int = VOTING_AGE) -> dict[str, tuple[int, int]]:
    """Per-block (population, voting-age population) held invariant by policy."""
    out: dict[str, tuple[int, int]] = {b: (0, 0) for b in dataset.blocks}
    for p in dataset.persons:
        pop, voting = out[p.block]
        out[p.block] = (pop + 1, voting + (1 if p.age >= voting_age else 0))
    return out


# --- serialization ---------------------------------------------------------


def table_spec_to_json_obj(spec: TableSpec) -> dict:
    return {
        "name": spec.name,
        "group_by": spec.group_by,
        "margin": list(spec.margin),
        "age_bins": None if spec.age_bins is None else _age_bins_to_json(spec.age_bins),
    }


def table_spec_from_json_obj(obj: Mapping) -> TableSpec:
    return TableSpec(
        name=obj["name"],
        group_by=obj["group_by"],
        margin=tuple(obj["margin"]),
        age_bins=None if obj.get("age_bins") is None else _age_bins_from_json(obj["age_bins"]),
    )


def table_to_json(table: Table) -> str:
    doc = {
        "spec": table_spec_to_json_obj(table.spec),
        "cells": [
            {"geo": geo, "margin": list(margin), "count": count}
            for geo, margin, count in table.cells
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def table_from_json(text: str) -> Table:
    doc = json.loads(text)
    return Table(
        spec=table_spec_from_json_obj(doc["spec"]),
        cells=tuple(
            (c["geo"], tuple(int(v) for v in c["margin"]), None if c["count"] is None else int(c["count"]))
            for c in doc["cells"]
        ),
    )
