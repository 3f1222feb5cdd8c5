"""Tiny synthetic census worlds.

A world is a handful of blocks, each holding a handful of persons with a
fixed attribute schema: sex, single-year age, race, ethnicity, plus an
abstract ``sensitive`` attribute that is never published and an ``imputed``
flag marking records whose attributes were filled in rather than collected.
Worlds are deliberately small enough that every downstream probability can
be brute-force enumerated.

Generation is deterministic: a PopulationSpec with seed s always produces
byte-identical microdata.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .rational import format_fraction, parse_fraction
from .rng import categorical, derived_rng

__all__ = [
    "AgeBinSystem",
    "Schema",
    "Person",
    "Dataset",
    "BlockSpec",
    "PopulationSpec",
    "generate",
    "with_imputed",
    "bin_age",
    "cell_of",
    "MICRODATA_HEADER",
    "write_microdata_csv",
    "read_microdata_csv",
    "population_spec_to_json",
    "population_spec_from_json",
]

DEFAULT_MAX_AGE = 115
SEX_LEVELS = 2

SCHEMA_ATTRIBUTES = ("block", "sex", "age", "race", "ethnicity")
PERSON_ATTRIBUTES = SCHEMA_ATTRIBUTES + ("sensitive",)

MICRODATA_HEADER = ("id", "block", "sex", "age", "race", "ethnicity", "sensitive", "imputed")

# Counterfactual "blank record" marker: the record still exists (it counts in
# pure population totals) but carries no usable attribute values.
BLANK = -1


@dataclass(frozen=True)
class AgeBinSystem:
    """Disjoint, contiguous, inclusive age ranges covering [0, max_age].

    Attributes:
        name: label used in serialized table specs.
        bins: ordered (lo, hi) inclusive ranges.
        max_age: top of the covered range (115 by default; configurable so
            desk examples can shrink the age domain).
    """

    name: str
    bins: tuple[tuple[int, int], ...]
    max_age: int = DEFAULT_MAX_AGE

    def __post_init__(self) -> None:
        if not self.bins:
            raise ValueError("age bin system needs at least one bin")
        object.__setattr__(self, "bins", tuple((int(lo), int(hi)) for lo, hi in self.bins))
        expect = 0
        for lo, hi in self.bins:
            if lo != expect or hi < lo:
                raise ValueError(f"bins must tile [0,{self.max_age}] contiguously; bad bin ({lo},{hi})")
            expect = hi + 1
        if expect != self.max_age + 1:
            raise ValueError(f"bins cover [0,{expect - 1}], expected [0,{self.max_age}]")

    def __len__(self) -> int:
        return len(self.bins)

    def index_of(self, age: int) -> int:
        """Bin index holding ``age``."""
        if not 0 <= age <= self.max_age:
            raise ValueError(f"age {age} outside [0,{self.max_age}]")
        for i, (lo, hi) in enumerate(self.bins):
            if lo <= age <= hi:
                return i
        raise AssertionError("unreachable: bins tile the range")

    def representative(self, index: int) -> int:
        """Canonical single age for a bin (its lower bound)."""
        return self.bins[index][0]

    def refines(self, coarser: "AgeBinSystem") -> bool:
        """True when every bin of self lies inside one bin of ``coarser``."""
        if self.max_age != coarser.max_age:
            return False
        return all(coarser.index_of(lo) == coarser.index_of(hi) for lo, hi in self.bins)

    @staticmethod
    def desk_default(max_age: int = DEFAULT_MAX_AGE) -> "AgeBinSystem":
        """Four coarse bins that do not straddle voting age."""
        return AgeBinSystem(
            name="desk4",
            bins=((0, 17), (18, 44), (45, 64), (65, max_age)),
            max_age=max_age,
        )

    @staticmethod
    def mini_sf1(max_age: int = DEFAULT_MAX_AGE) -> "AgeBinSystem":
        """Single-year bins through 19, five-year bands to 64, then 65+."""
        bins: list[tuple[int, int]] = [(a, a) for a in range(20)]
        lo = 20
        while lo + 4 <= 64:
            bins.append((lo, lo + 4))
            lo += 5
        bins.append((65, max_age))
        return AgeBinSystem(name="mini_sf1", bins=tuple(bins), max_age=max_age)

    @staticmethod
    def single_year(max_age: int) -> "AgeBinSystem":
        return AgeBinSystem(
            name=f"year0_{max_age}",
            bins=tuple((a, a) for a in range(max_age + 1)),
            max_age=max_age,
        )


@dataclass(frozen=True)
class Schema:
    """Attribute domain of one world: sex x age bins x race x ethnicity.

    ``cells`` enumerates the cross product; ``cell_of`` maps a concrete
    attribute tuple into [0, cells) bijectively (mixed-radix order with sex
    slowest, ethnicity fastest).
    """

    age_bins: AgeBinSystem
    race_levels: int = 3
    ethnicity_levels: int = 2

    def __post_init__(self) -> None:
        if self.race_levels < 1 or self.ethnicity_levels < 1:
            raise ValueError("race/ethnicity need at least one level")

    @property
    def cells(self) -> int:
        return SEX_LEVELS * len(self.age_bins) * self.race_levels * self.ethnicity_levels

    def cell_of(self, sex: int, age: int, race: int, ethnicity: int) -> int:
        self._check(sex, race, ethnicity)
        a = self.age_bins.index_of(age)
        return ((sex * len(self.age_bins) + a) * self.race_levels + race) * self.ethnicity_levels + ethnicity

    def cell_key(self, cell: int) -> tuple[int, int, int, int]:
        """Inverse of cell_of up to age binning: (sex, age_bin, race, ethnicity)."""
        if not 0 <= cell < self.cells:
            raise ValueError(f"cell {cell} outside [0,{self.cells})")
        cell, ethnicity = divmod(cell, self.ethnicity_levels)
        cell, race = divmod(cell, self.race_levels)
        sex, age_bin = divmod(cell, len(self.age_bins))
        return sex, age_bin, race, ethnicity

    def _check(self, sex: int, race: int, ethnicity: int) -> None:
        if not 0 <= sex < SEX_LEVELS:
            raise ValueError(f"sex {sex} outside [0,{SEX_LEVELS})")
        if not 0 <= race < self.race_levels:
            raise ValueError(f"race {race} outside [0,{self.race_levels})")
        if not 0 <= ethnicity < self.ethnicity_levels:
            raise ValueError(f"ethnicity {ethnicity} outside [0,{self.ethnicity_levels})")

    @staticmethod
    def desk_default() -> "Schema":
        """2 x 4 x 3 x 2 = 48 cells; small enough for exhaustive checks."""
        return Schema(age_bins=AgeBinSystem.desk_default())


@dataclass(frozen=True)
class Person:
    """One confidential record."""

    id: str
    block: str
    sex: int
    age: int
    race: int
    ethnicity: int
    sensitive: int = 0
    imputed: bool = False

    def attribute(self, name: str):
        if name not in PERSON_ATTRIBUTES:
            raise KeyError(name)
        return getattr(self, name)

    def schema_tuple(self) -> tuple:
        return tuple(getattr(self, a) for a in SCHEMA_ATTRIBUTES)

    @property
    def is_blank(self) -> bool:
        return self.sex == BLANK


def blank_person(person: Person) -> Person:
    """Blanking counterfactual: the row stays (same id and block) but every
    attribute value is wiped.  Blank rows count toward pure population totals
    and disappear from any tabulation that needs an attribute."""
    return replace(
        person, sex=BLANK, age=BLANK, race=BLANK, ethnicity=BLANK, sensitive=BLANK
    )


@dataclass(frozen=True)
class Dataset:
    """Confidential microdata plus its two-level geography (block -> region)."""

    persons: tuple[Person, ...]
    geography: tuple[tuple[str, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "persons", tuple(self.persons))
        geo = tuple(sorted((str(b), str(r)) for b, r in dict(self.geography).items()))
        object.__setattr__(self, "geography", geo)
        known = {b for b, _ in self.geography}
        ids = set()
        for p in self.persons:
            if p.block not in known:
                raise ValueError(f"person {p.id} lives in unmapped block {p.block}")
            if p.id in ids:
                raise ValueError(f"duplicate person id {p.id}")
            ids.add(p.id)

    @property
    def blocks(self) -> tuple[str, ...]:
        return tuple(b for b, _ in self.geography)

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(sorted({r for _, r in self.geography}))

    def region_of(self, block: str) -> str:
        for b, r in self.geography:
            if b == block:
                return r
        raise KeyError(block)

    def persons_in(self, block: str) -> tuple[Person, ...]:
        return tuple(p for p in self.persons if p.block == block)

    def person(self, person_id: str) -> Person:
        for p in self.persons:
            if p.id == person_id:
                return p
        raise KeyError(person_id)

    def without(self, person_id: str) -> "Dataset":
        """Removal counterfactual: the person never responded."""
        self.person(person_id)
        return Dataset(tuple(p for p in self.persons if p.id != person_id), self.geography)

    def replace_person(self, person: Person) -> "Dataset":
        return Dataset(
            tuple(person if p.id == person.id else p for p in self.persons),
            self.geography,
        )


@dataclass(frozen=True)
class BlockSpec:
    name: str
    size: int
    region: str = "R0"

    def __post_init__(self) -> None:
        if self.size < 0:
            raise ValueError("block size must be >= 0")


@dataclass(frozen=True)
class PopulationSpec:
    """Recipe for a synthetic world.

    Attributes:
        schema: attribute domain; per-cell weights are indexed by its cells.
        blocks: target block sizes (hit exactly) and their regions.
        attribute_distribution: categorical weight per schema cell.
        homogeneity: optional per-block (dominant cell, weight w) pairs; that
            block draws the dominant cell with probability w plus whatever
            the base distribution also gives it.
        seed: master seed; all generation randomness derives from it.
    """

    schema: Schema
    blocks: tuple[BlockSpec, ...]
    attribute_distribution: tuple[Fraction, ...]
    homogeneity: tuple[tuple[str, tuple[int, Fraction]], ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        weights = tuple(Fraction(w) for w in self.attribute_distribution)
        object.__setattr__(self, "attribute_distribution", weights)
        if len(weights) != self.schema.cells:
            raise ValueError(
                f"attribute_distribution has {len(weights)} weights, schema has {self.schema.cells} cells"
            )
        if any(w < 0 for w in weights) or sum(weights) == 0:
            raise ValueError("weights must be nonnegative and not all zero")
        if len({b.name for b in self.blocks}) != len(self.blocks):
            raise ValueError("duplicate block names")
        if self.homogeneity is not None:
            homog = tuple((str(b), (int(c), Fraction(w))) for b, (c, w) in self.homogeneity)
            object.__setattr__(self, "homogeneity", homog)
            names = {b.name for b in self.blocks}
            for b, (cell, w) in homog:
                if b not in names:
                    raise ValueError(f"homogeneity names unknown block {b}")
                if not 0 <= cell < self.schema.cells:
                    raise ValueError(f"homogeneity cell {cell} outside schema")
                if not 0 <= w <= 1:
                    raise ValueError("homogeneity weight must be in [0,1]")

    def block_weights(self, block: str) -> tuple[Fraction, ...]:
        """Per-cell weights for one block, normalized to sum to 1."""
        base = self.attribute_distribution
        total = sum(base)
        probs = [w / total for w in base]
        if self.homogeneity is not None:
            for b, (cell, w) in self.homogeneity:
                if b == block:
                    probs = [(1 - w) * p for p in probs]
                    probs[cell] += w
                    break
        return tuple(probs)


def bin_age(system: AgeBinSystem, age: int) -> int:
    return system.index_of(age)


def cell_of(schema: Schema, person: Person) -> int:
    return schema.cell_of(person.sex, person.age, person.race, person.ethnicity)


def generate(spec: PopulationSpec) -> Dataset:
    """Materialize a world: exact per-block sizes, seed-deterministic draws."""
    persons: list[Person] = []
    for block in spec.blocks:
        rng = derived_rng(spec.seed, f"generate:{block.name}")
        weights = spec.block_weights(block.name)
        for k in range(block.size):
            cell = categorical(rng, weights)
            sex, age_bin, race, ethnicity = spec.schema.cell_key(cell)
            lo, hi = spec.schema.age_bins.bins[age_bin]
            age = lo + rng.randrange(hi - lo + 1)
            persons.append(
                Person(
                    id=f"{block.name}-{k:04d}",
                    block=block.name,
                    sex=sex,
                    age=age,
                    race=race,
                    ethnicity=ethnicity,
                )
            )
    geography = tuple((b.name, b.region) for b in spec.blocks)
    return Dataset(tuple(persons), geography)


def with_imputed(dataset: Dataset, fraction: Fraction, seed: int) -> Dataset:
    """Mark a fraction of each block as imputed, copying a donor's attributes.

    Per block of size n, floor(fraction*n) persons are chosen; each copies
    sex/age/race/ethnicity from a uniformly chosen other person of the same
    block and is flagged imputed. Blocks of size 1 are left alone.
    """
    fraction = Fraction(fraction)
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must be in [0,1]")
    out = {p.id: p for p in dataset.persons}
    for block in dataset.blocks:
        members = dataset.persons_in(block)
        if len(members) < 2:
            continue
        rng = derived_rng(seed, f"impute:{block}")
        k = int(fraction * len(members))
        chosen = rng.sample(range(len(members)), k)
        for idx in sorted(chosen):
            victim = members[idx]
            donor_idx = rng.randrange(len(members) - 1)
            if donor_idx >= idx:
                donor_idx += 1
            donor = members[donor_idx]
            out[victim.id] = replace(
                victim,
                sex=donor.sex,
                age=donor.age,
                race=donor.race,
                ethnicity=donor.ethnicity,
                imputed=True,
            )
    return Dataset(tuple(out[p.id] for p in dataset.persons), dataset.geography)


# --- serialization ---------------------------------------------------------


def write_microdata_csv(dataset: Dataset, stream: io.TextIOBase | None = None) -> str:
    """Microdata CSV: fixed header, LF newlines, imputed as 0/1."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MICRODATA_HEADER)
    for p in dataset.persons:
        writer.writerow(
            [p.id, p.block, p.sex, p.age, p.race, p.ethnicity, p.sensitive, int(p.imputed)]
        )
    text = buf.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def read_microdata_csv(
    text: str, geography: Mapping[str, str] | None = None
) -> Dataset:
    """Parse microdata CSV; geography defaults to every block in region R0."""
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows or tuple(rows[0]) != MICRODATA_HEADER:
        raise ValueError(f"bad microdata header: {rows[0] if rows else 'empty file'}")
    persons = []
    for row in rows[1:]:
        if not row:
            continue
        pid, block, sex, age, race, eth, sens, imp = row
        persons.append(
            Person(
                id=pid,
                block=block,
                sex=int(sex),
                age=int(age),
                race=int(race),
                ethnicity=int(eth),
                sensitive=int(sens),
                imputed=bool(int(imp)),
            )
        )
    if geography is None:
        geography = {p.block: "R0" for p in persons}
    return Dataset(tuple(persons), tuple(geography.items()))


def _age_bins_to_json(system: AgeBinSystem) -> dict:
    return {"name": system.name, "bins": [list(b) for b in system.bins], "max_age": system.max_age}


def _age_bins_from_json(obj: dict) -> AgeBinSystem:
    return AgeBinSystem(
        name=obj["name"],
        bins=tuple((int(lo), int(hi)) for lo, hi in obj["bins"]),
        max_age=int(obj["max_age"]),
    )


def _schema_to_json(schema: Schema) -> dict:
    return {
        "age_bins": _age_bins_to_json(schema.age_bins),
        "race_levels": schema.race_levels,
        "ethnicity_levels": schema.ethnicity_levels,
    }


def _schema_from_json(obj: dict) -> Schema:
    return Schema(
        age_bins=_age_bins_from_json(obj["age_bins"]),
        race_levels=int(obj["race_levels"]),
        ethnicity_levels=int(obj["ethnicity_levels"]),
    )


def population_spec_to_json(spec: PopulationSpec) -> str:
    doc = {
        "schema": _schema_to_json(spec.schema),
        "blocks": [{"name": b.name, "size": b.size, "region": b.region} for b in spec.blocks],
        "attribute_distribution": [format_fraction(w) for w in spec.attribute_distribution],
        "homogeneity": None
        if spec.homogeneity is None
        else {b: {"cell": cell, "weight": format_fraction(w)} for b, (cell, w) in spec.homogeneity},
        "seed": spec.seed,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def population_spec_from_json(text: str) -> PopulationSpec:
    doc = json.loads(text)
    homogeneity = None
    if doc.get("homogeneity") is not None:
        homogeneity = tuple(
            sorted(
                (b, (int(v["cell"]), parse_fraction(v["weight"])))
                for b, v in doc["homogeneity"].items()
            )
        )
    return PopulationSpec(
        schema=_schema_from_json(doc["schema"]),
        blocks=tuple(
            BlockSpec(name=b["name"], size=int(b["size"]), region=b.get("region", "R0"))
            for b in doc["blocks"]
        ),
        attribute_distribution=tuple(parse_fraction(w) for w in doc["attribute_distribution"]),
        homogeneity=homogeneity,
        seed=int(doc["seed"]),
    )
