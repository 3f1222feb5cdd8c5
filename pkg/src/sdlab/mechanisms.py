"""Protection mechanisms and their exact likelihoods.

Six mechanism kinds: Identity, GeometricNoise, Swap, Suppress, Coarsen,
PerturbedTotal.  apply() is deterministic given the spec seed.  likelihood()
marginalizes over the mechanism's randomness and never looks at the seed;
it returns an exact Fraction, or Unavailable when the configuration space
of a Swap is too large to enumerate.

Noise is the two-sided geometric distribution P(k) = ((1-a)/(1+a)) * a**|k|
with rational decay a, so every mass, tail, and likelihood ratio is an exact
rational.  The privacy loss of a noisy release is recorded as the exact
ratio bound (1/a)**Delta (equal to e**epsilon with epsilon = Delta*ln(1/a));
the float epsilon exists only for display.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

from .rational import format_fraction, fraction_to_float, parse_fraction
from .rng import derived_rng, two_sided_geometric
from .tabulate import Table, TableSpec, table_spec_from_json_obj, table_spec_to_json_obj, tabulate
from .worldmodel import SCHEMA_ATTRIBUTES, Dataset, Person

__all__ = [
    "MECHANISM_KINDS",
    "Microdata",
    "MechanismSpec",
    "RecordList",
    "CountProduct",
    "PrivacyLoss",
    "Release",
    "Unavailable",
    "UNAVAILABLE",
    "RatioBoundCheck",
    "CompositionLedger",
    "apply",
    "likelihood",
    "dp_ratio_bound_check",
    "compose",
    "geometric_mass",
    "geometric_tail_ge",
    "record_for",
    "record_vector",
    "release_to_json",
    "release_from_json",
    "mechanism_spec_to_json",
    "mechanism_spec_from_json",
]

MECHANISM_KINDS = ("Identity", "GeometricNoise", "Swap", "Suppress", "Coarsen", "PerturbedTotal")

SWAP_ENUMERATION_CAP = 10**6


class Unavailable:
    """Sentinel: the exact likelihood exists but is not enumerable here."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unavailable"


UNAVAILABLE = Unavailable()


@dataclass(frozen=True)
class Microdata:
    """Record-list target; ``attributes`` picks the released columns."""

    attributes: tuple[str, ...] = SCHEMA_ATTRIBUTES

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        for a in self.attributes:
            if a not in SCHEMA_ATTRIBUTES:
                raise ValueError(f"microdata cannot release attribute {a!r}")
        if not self.attributes:
            raise ValueError("microdata target needs at least one attribute")


Target = TableSpec | Microdata


@dataclass(frozen=True)
class MechanismSpec:
    """Mechanism kind plus kind-specific parameters and a seed.

    Parameters by kind:
        GeometricNoise: alpha (rational decay in (0,1)), sensitivity Delta.
        PerturbedTotal: alpha, sensitivity (noise on one national count).
        Swap: swap_rate in [0,1], swap_keys (partner-agreement attributes).
        Suppress: threshold t (suppress 0 < count < t), complementary flag.
        Coarsen: age_bins (the coarser system).
        Identity: none.
    """

    kind: str
    seed: int = 0
    alpha: Fraction | None = None
    sensitivity: int | None = None
    swap_rate: Fraction | None = None
    swap_keys: tuple[str, ...] | None = None
    threshold: int | None = None
    complementary: bool = False
    age_bins: object | None = None  # AgeBinSystem for Coarsen

    def __post_init__(self) -> None:
        if self.kind not in MECHANISM_KINDS:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        if self.kind in ("GeometricNoise", "PerturbedTotal"):
            if self.alpha is None:
                raise ValueError(f"{self.kind} requires alpha")
            object.__setattr__(self, "alpha", Fraction(self.alpha))
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must be a rational in (0,1)")
            object.__setattr__(self, "sensitivity", 1 if self.sensitivity is None else int(self.sensitivity))
            if self.sensitivity < 1:
                raise ValueError("sensitivity must be >= 1")
        if self.kind == "Swap":
            if self.swap_rate is None or self.swap_keys is None:
                raise ValueError("Swap requires swap_rate and swap_keys")
            object.__setattr__(self, "swap_rate", Fraction(self.swap_rate))
            if not 0 <= self.swap_rate <= 1:
                raise ValueError("swap_rate must be in [0,1]")
            keys = tuple(self.swap_keys)
            for k in keys:
                if k not in ("sex", "age", "race", "ethnicity"):
                    raise ValueError(f"swap key {k!r} must be a non-geography attribute")
            object.__setattr__(self, "swap_keys", keys)
        if self.kind == "Suppress":
            if self.threshold is None or int(self.threshold) < 1:
                raise ValueError("Suppress requires threshold >= 1")
            object.__setattr__(self, "threshold", int(self.threshold))
        if self.kind == "Coarsen" and self.age_bins is None:
            raise ValueError("Coarsen requires age_bins")


@dataclass(frozen=True)
class RecordList:
    """Released microdata: a canonically sorted multiset of value tuples."""

    attributes: tuple[str, ...]
    records: tuple[tuple, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        object.__setattr__(self, "records", tuple(sorted(tuple(r) for r in self.records)))


@dataclass(frozen=True)
class CountProduct:
    """A single released count (possibly noisy, possibly negative)."""

    label: str
    value: int


Product = Table | RecordList | CountProduct


@dataclass(frozen=True)
class PrivacyLoss:
    """Exact privacy accounting for one noisy release.

    ratio_bound is the exact rational worst-case likelihood ratio
    (1/alpha)**sensitivity between neighboring inputs; epsilon is its
    natural log, provided as a float for reports only.
    """

    alpha: Fraction
    sensitivity: int

    @property
    def ratio_bound(self) -> Fraction:
        return (1 / Fraction(self.alpha)) ** self.sensitivity

    @property
    def epsilon(self) -> float:
        return self.sensitivity * math.log(1 / Fraction(self.alpha))


@dataclass(frozen=True)
class Release:
    """What went out the door: products, the spec that made them, the loss."""

    products: tuple[Product, ...]
    mechanism: MechanismSpec
    targets: tuple[Target, ...]
    privacy_loss: PrivacyLoss | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "products", tuple(self.products))
        object.__setattr__(self, "targets", tuple(self.targets))


@dataclass(frozen=True)
class CompositionLedger:
    """Sequential composition account.

    The exact quantity is the product of per-release ratio bounds, which is
    e**(sum of epsilons); total_epsilon floats it for display.
    """

    entries: tuple[tuple[str, PrivacyLoss], ...] = ()

    @property
    def total_ratio_bound(self) -> Fraction:
        total = Fraction(1)
        for _, loss in self.entries:
            total *= loss.ratio_bound
        return total

    @property
    def total_epsilon(self) -> float:
        return sum(loss.epsilon for _, loss in self.entries)


def compose(ledger: CompositionLedger, release: Release, label: str | None = None) -> CompositionLedger:
    """Append a release's privacy loss; releases without one are an error."""
    if release.privacy_loss is None:
        raise ValueError(f"release from {release.mechanism.kind} carries no privacy loss; cannot compose")
    if label is None:
        label = f"release-{len(ledger.entries)}"
    return CompositionLedger(entries=ledger.entries + ((label, release.privacy_loss),))


# --- geometric noise, exactly ----------------------------------------------


def geometric_mass(k: int, alpha: Fraction) -> Fraction:
    """P(noise == k) for the two-sided geometric with decay alpha."""
    alpha = Fraction(alpha)
    return (1 - alpha) / (1 + alpha) * alpha ** abs(k)


def geometric_tail_ge(k: int, alpha: Fraction) -> Fraction:
    """P(noise >= k), closed form (no truncation anywhere)."""
    alpha = Fraction(alpha)
    if k >= 1:
        return alpha**k / (1 + alpha)
    # symmetry: P(noise >= k) = 1 - P(noise >= 1-k) for k <= 0
    return 1 - alpha ** (1 - k) / (1 + alpha)


# --- record lists -----------------------------------------------------------


def record_for(person: Person, target: Microdata, spec: MechanismSpec) -> tuple:
    """Released record for one person (deterministic kinds only)."""
    values = []
    for attr in target.attributes:
        v = person.attribute(attr)
        if attr == "age" and spec.kind == "Coarsen" and not person.is_blank:
            bins = spec.age_bins
            v = bins.representative(bins.index_of(v))
        values.append(v)
    return tuple(values)


def record_vector(dataset: Dataset, target: Microdata, spec: MechanismSpec) -> tuple[tuple, ...]:
    """Per-person released records, aligned with dataset.persons."""
    if spec.kind not in ("Identity", "Coarsen"):
        raise ValueError(f"{spec.kind} has no deterministic per-person record vector")
    return tuple(record_for(p, target, spec) for p in dataset.persons)


# --- apply ------------------------------------------------------------------


def apply(data: Dataset, spec: MechanismSpec, targets: Sequence[Target]) -> Release:
    """Run the mechanism. Deterministic for a given spec.seed."""
    targets = tuple(targets)
    if spec.kind == "Identity":
        return Release(_exact_products(data, spec, targets), spec, targets)

    if spec.kind == "Coarsen":
        coarse_targets = tuple(_coarsen_target(t, spec) for t in targets)
        return Release(_exact_products(data, spec, coarse_targets), spec, targets)

    if spec.kind == "Suppress":
        products = []
        for t in targets:
            if not isinstance(t, TableSpec):
                raise ValueError("Suppress applies to tables only")
            products.append(_suppress_table(tabulate(data, t), spec.threshold, spec.complementary))
        return Release(tuple(products), spec, targets)

    if spec.kind == "GeometricNoise":
        products = []
        for t in targets:
            if not isinstance(t, TableSpec):
                raise ValueError("GeometricNoise applies to tables only")
            exact = tabulate(data, t)
            rng = derived_rng(spec.seed, f"geom:{t.name}")
            noisy = tuple(
                (geo, margin, count + two_sided_geometric(rng, spec.alpha))
                for geo, margin, count in exact.cells
            )
            products.append(Table(spec=exact.spec, cells=noisy))
        loss = PrivacyLoss(alpha=spec.alpha, sensitivity=spec.sensitivity)
        return Release(tuple(products), spec, targets, privacy_loss=loss)

    if spec.kind == "PerturbedTotal":
        if targets:
            raise ValueError("PerturbedTotal takes no targets; it perturbs the national count")
        rng = derived_rng(spec.seed, "perturbed_total")
        noisy = len(data.persons) + two_sided_geometric(rng, spec.alpha)
        loss = PrivacyLoss(alpha=spec.alpha, sensitivity=spec.sensitivity)
        return Release((CountProduct("national_population", noisy),), spec, targets, privacy_loss=loss)

    if spec.kind == "Swap":
        swapped = _apply_swap(data, spec)
        return Release(_exact_products(swapped, spec, targets), spec, targets)

    raise AssertionError("unreachable")


def _coarsen_target(target: Target, spec: MechanismSpec) -> Target:
    if isinstance(target, Microdata):
        return target
    if "age_bin" not in target.margin:
        return target
    if not target.age_bins.refines(spec.age_bins):
        raise ValueError(
            f"table {target.name!r} bins do not nest inside the coarsening system"
        )
    return replace(target, age_bins=spec.age_bins)


def _exact_products(
    data: Dataset,
    spec: MechanismSpec,
    targets: tuple[Target, ...],
    race_levels: int | None = None,
    ethnicity_levels: int | None = None,
) -> tuple[Product, ...]:
    products: list[Product] = []
    for t in targets:
        if isinstance(t, Microdata):
            products.append(RecordList(t.attributes, record_vector(data, t, _record_spec(spec))))
        else:
            products.append(tabulate(data, t, race_levels=race_levels, ethnicity_levels=ethnicity_levels))
    return tuple(products)


def _record_spec(spec: MechanismSpec) -> MechanismSpec:
    # Swap emits plain (Identity-shaped) records of the already swapped data.
    if spec.kind == "Swap":
        return MechanismSpec(kind="Identity", seed=spec.seed)
    return spec


def _suppress_table(table: Table, threshold: int, complementary: bool) -> Table:
    """Primary: hide 0 < count < t. Complementary: per geo row with a primary
    hit, also hide the smallest remaining cell with count >= t (ties by lowest
    margin tuple); zeros are never complementary-suppressed (vacuous)."""
    suppressed: set[tuple[str, tuple[int, ...]]] = set()
    for geo, margin, count in table.cells:
        if count is not None and 0 < count < threshold:
            suppressed.add((geo, margin))
    if complementary:
        for geo in table.geos():
            row = [(margin, count) for g, margin, count in table.cells if g == geo]
            hit = any((geo, m) in suppressed for m, _ in row)
            if not hit:
                continue
            eligible = [
                (count, margin)
                for margin, count in row
                if (geo, margin) not in suppressed and count is not None and count >= threshold
            ]
            if eligible:
                _, margin = min(eligible)
                suppressed.add((geo, margin))
    cells = tuple(
        (geo, margin, None if (geo, margin) in suppressed else count)
        for geo, margin, count in table.cells
    )
    return Table(spec=table.spec, cells=cells)


def _eligible_swap_pairs(persons: tuple[Person, ...], keys: tuple[str, ...]) -> list[tuple[int, int]]:
    pairs = []
    for i in range(len(persons)):
        for j in range(i + 1, len(persons)):
            a, b = persons[i], persons[j]
            if a.block == b.block:
                continue
            if all(a.attribute(k) == b.attribute(k) for k in keys):
                pairs.append((i, j))
    return pairs


def _swap_configs(
    persons: tuple[Person, ...], keys: tuple[str, ...], k: int, cap: int
) -> list[tuple[tuple[int, int], ...]] | None:
    """All sets of exactly k disjoint eligible pairs, or None above cap."""
    pairs = _eligible_swap_pairs(persons, keys)
    configs: list[tuple[tuple[int, int], ...]] = []

    def extend(start: int, used: set[int], acc: list[tuple[int, int]]) -> bool:
        if len(acc) == k:
            configs.append(tuple(acc))
            return len(configs) <= cap
        for idx in range(start, len(pairs)):
            i, j = pairs[idx]
            if i in used or j in used:
                continue
            acc.append((i, j))
            used.update((i, j))
            ok = extend(idx + 1, used, acc)
            acc.pop()
            used.difference_update((i, j))
            if not ok:
                return False
        return True

    if not extend(0, set(), []):
        return None
    return configs


def _swap_plan(data: Dataset, spec: MechanismSpec, cap: int = SWAP_ENUMERATION_CAP):
    """(configs, k): enumerated configuration space, shrinking k when the
    requested pair count is unattainable. configs is None above cap."""
    n = len(data.persons)
    k = int(spec.swap_rate * n / 2)
    while k >= 0:
        configs = _swap_configs(data.persons, spec.swap_keys, k, cap)
        if configs is None:
            return None, k
        if configs:
            return configs, k
        k -= 1
    return [()], 0


def _swapped_dataset(data: Dataset, config: tuple[tuple[int, int], ...]) -> Dataset:
    persons = list(data.persons)
    for i, j in config:
        a, b = persons[i], persons[j]
        persons[i] = replace(a, block=b.block)
        persons[j] = replace(b, block=a.block)
    return Dataset(tuple(persons), data.geography)


def _apply_swap(data: Dataset, spec: MechanismSpec) -> Dataset:
    configs, k = _swap_plan(data, spec)
    rng = derived_rng(spec.seed, "swap")
    if configs is not None:
        config = configs[rng.randrange(len(configs))] if configs else ()
        return _swapped_dataset(data, config)
    # cap exceeded: greedy seeded pairing; likelihood() will be Unavailable
    order = list(range(len(data.persons)))
    rng.shuffle(order)
    eligible = set(_eligible_swap_pairs(data.persons, spec.swap_keys))
    used: set[int] = set()
    config = []
    for i in order:
        if len(config) == k:
            break
        if i in used:
            continue
        for j in order:
            if j == i or j in used:
                continue
            if (min(i, j), max(i, j)) in eligible:
                config.append((min(i, j), max(i, j)))
                used.update((i, j))
                break
    return _swapped_dataset(data, tuple(config))


# --- likelihood -------------------------------------------------------------


def likelihood(release: Release, candidate: Dataset) -> Fraction | Unavailable:
    """P(release | candidate dataset), marginal over mechanism randomness."""
    spec = release.mechanism
    if spec.kind in ("Identity", "Coarsen", "Suppress"):
        return Fraction(1) if _deterministic_match(release, candidate) else Fraction(0)

    if spec.kind == "GeometricNoise":
        prob = Fraction(1)
        for product in release.products:
            assert isinstance(product, Table)
            counts = _counts_against(product, candidate)
            if counts is None:
                return Fraction(0)
            for geo, margin, observed in product.cells:
                prob *= geometric_mass(observed - counts[(geo, margin)], spec.alpha)
        return prob

    if spec.kind == "PerturbedTotal":
        (product,) = release.products
        assert isinstance(product, CountProduct)
        return geometric_mass(product.value - len(candidate.persons), spec.alpha)

    if spec.kind == "Swap":
        configs, _ = _swap_plan(candidate, spec)
        if configs is None:
            return UNAVAILABLE
        if not configs:
            configs = [()]
        hits = sum(
            1
            for config in configs
            if _deterministic_match(release, _swapped_dataset(candidate, config))
        )
        return Fraction(hits, len(configs))

    raise AssertionError("unreachable")


def _deterministic_match(release: Release, candidate: Dataset) -> bool:
    """Would the deterministic part of the release come out of `candidate`?

    Table comparisons run over the released table's own cell domain: the
    margin domain is schema information fixed at release time, not evidence
    about the data, so two worlds agreeing on every released count match even
    if one of them uses fewer attribute levels.
    """
    spec = release.mechanism
    for product, target in zip(release.products, release.targets):
        if isinstance(product, RecordList):
            assert isinstance(target, Microdata)
            mine = RecordList(product.attributes, record_vector(candidate, target, _record_spec(spec)))
            if mine.records != product.records:
                return False
        elif isinstance(product, Table):
            counts = _counts_against(product, candidate)
            if counts is None:
                return False
            if spec.kind == "Suppress":
                full = Table(
                    spec=product.spec,
                    cells=tuple((g, m, counts[(g, m)]) for g, m, _ in product.cells),
                )
                mine = _suppress_table(full, spec.threshold, spec.complementary)
                if mine.cells != product.cells:
                    return False
            else:
                if any(c != counts[(g, m)] for g, m, c in product.cells):
                    return False
        else:
            raise ValueError(f"unexpected product for {spec.kind}: {product!r}")
    return True


def _counts_against(
    table: Table, candidate: Dataset
) -> dict[tuple[str, tuple[int, ...]], int] | None:
    """Candidate counts over the released table's own cell domain.

    The released cells define the dense margin domain fixed at apply time; a
    candidate person falling outside it could not have produced this table,
    so None is returned (meaning likelihood zero).
    """
    keys = {(g, m) for g, m, _ in table.cells}
    counts = {k: 0 for k in keys}
    spec = table.spec
    for person in candidate.persons:
        if person.is_blank and spec.margin:
            continue  # blank rows count only toward pure population totals
        geo = person.block if spec.group_by == "block" else candidate.region_of(person.block)
        margin = []
        for attr in spec.margin:
            if attr == "age_bin":
                margin.append(spec.age_bins.index_of(person.age))
            else:
                margin.append(person.attribute(attr))
        key = (geo, tuple(margin))
        if key not in counts:
            return None
        counts[key] += 1
    return counts


# --- declared-bound verification --------------------------------------------


@dataclass(frozen=True)
class RatioBoundCheck:
    """Worst-case likelihood ratio between two inputs vs the declared bound.

    worst_ratio is None when the ratio is unbounded (an output possible under
    d1 is impossible under d2). Outputs impossible under both are skipped.
    """

    worst_ratio: Fraction | None
    bound: Fraction | None
    satisfied: bool

    @property
    def unbounded(self) -> bool:
        return self.worst_ratio is None


def dp_ratio_bound_check(
    spec: MechanismSpec, targets: Sequence[Target], d1: Dataset, d2: Dataset
) -> RatioBoundCheck:
    """sup over outputs of P(o|d1)/P(o|d2), exact, vs (1/alpha)**sensitivity.

    For geometric kinds the supremum collapses in closed form: the ratio at
    output o is alpha**(|o-c1|_1 - |o-c2|_1), maximized at o = c1, giving
    (1/alpha)**L1(c1,c2); the geometric tails contribute nothing beyond it.
    """
    targets = tuple(targets)
    if spec.kind in ("GeometricNoise", "PerturbedTotal"):
        l1 = _l1_distance(spec, targets, d1, d2)
        worst = (1 / spec.alpha) ** l1
        bound = (1 / spec.alpha) ** spec.sensitivity
        return RatioBoundCheck(worst_ratio=worst, bound=bound, satisfied=worst <= bound)

    if spec.kind in ("Identity", "Coarsen", "Suppress"):
        products1 = apply(d1, spec, targets).products
        products2 = apply(d2, spec, targets).products
        if products1 == products2:
            return RatioBoundCheck(worst_ratio=Fraction(1), bound=None, satisfied=True)
        return RatioBoundCheck(worst_ratio=None, bound=None, satisfied=False)

    if spec.kind == "Swap":
        race = 1 + max((p.race for d in (d1, d2) for p in d.persons), default=0)
        eth = 1 + max((p.ethnicity for d in (d1, d2) for p in d.persons), default=0)
        dist1 = _swap_output_distribution(spec, targets, d1, race, eth)
        dist2 = _swap_output_distribution(spec, targets, d2, race, eth)
        if dist1 is None or dist2 is None:
            raise ValueError("swap configuration space exceeds the enumeration cap")
        worst: Fraction | None = Fraction(0)
        for output, p1 in dist1.items():
            p2 = dist2.get(output, Fraction(0))
            if p2 == 0:
                worst = None
                break
            ratio = p1 / p2
            if worst is not None and ratio > worst:
                worst = ratio
        return RatioBoundCheck(worst_ratio=worst, bound=None, satisfied=worst is not None)

    raise AssertionError("unreachable")


def _l1_distance(spec: MechanismSpec, targets: tuple[Target, ...], d1: Dataset, d2: Dataset) -> int:
    if spec.kind == "PerturbedTotal":
        return abs(len(d1.persons) - len(d2.persons))
    total = 0
    for t in targets:
        assert isinstance(t, TableSpec)
        race = 1 + max((p.race for d in (d1, d2) for p in d.persons), default=0)
        eth = 1 + max((p.ethnicity for d in (d1, d2) for p in d.persons), default=0)
        t1 = tabulate(d1, t, race_levels=race, ethnicity_levels=eth).as_mapping()
        t2 = tabulate(d2, t, race_levels=race, ethnicity_levels=eth).as_mapping()
        for key in set(t1) | set(t2):
            total += abs((t1.get(key) or 0) - (t2.get(key) or 0))
    return total


def _swap_output_distribution(
    spec: MechanismSpec,
    targets: tuple[Target, ...],
    data: Dataset,
    race_levels: int,
    ethnicity_levels: int,
) -> dict[tuple[Product, ...], Fraction] | None:
    configs, _ = _swap_plan(data, spec)
    if configs is None:
        return None
    if not configs:
        configs = [()]
    dist: dict[tuple[Product, ...], Fraction] = {}
    share = Fraction(1, len(configs))
    for config in configs:
        products = _exact_products(
            _swapped_dataset(data, config), spec, targets, race_levels, ethnicity_levels
        )
        dist[products] = dist.get(products, Fraction(0)) + share
    return dist


# --- serialization ----------------------------------------------------------


def mechanism_spec_to_json(spec: MechanismSpec) -> dict:
    from .worldmodel import _age_bins_to_json

    return {
        "kind": spec.kind,
        "seed": spec.seed,
        "alpha": None if spec.alpha is None else format_fraction(spec.alpha),
        "sensitivity": spec.sensitivity,
        "swap_rate": None if spec.swap_rate is None else format_fraction(spec.swap_rate),
        "swap_keys": None if spec.swap_keys is None else list(spec.swap_keys),
        "threshold": spec.threshold,
        "complementary": spec.complementary,
        "age_bins": None if spec.age_bins is None else _age_bins_to_json(spec.age_bins),
    }


def mechanism_spec_from_json(obj: dict) -> MechanismSpec:
    from .worldmodel import _age_bins_from_json

    return MechanismSpec(
        kind=obj["kind"],
        seed=int(obj.get("seed", 0)),
        alpha=None if obj.get("alpha") is None else parse_fraction(obj["alpha"]),
        sensitivity=obj.get("sensitivity"),
        swap_rate=None if obj.get("swap_rate") is None else parse_fraction(obj["swap_rate"]),
        swap_keys=None if obj.get("swap_keys") is None else tuple(obj["swap_keys"]),
        threshold=obj.get("threshold"),
        complementary=bool(obj.get("complementary", False)),
        age_bins=None if obj.get("age_bins") is None else _age_bins_from_json(obj["age_bins"]),
    )


def _target_to_json(target: Target) -> dict:
    if isinstance(target, Microdata):
        return {"type": "microdata", "attributes": list(target.attributes)}
    return {"type": "table", **table_spec_to_json_obj(target)}


def _target_from_json(obj: dict) -> Target:
    if obj["type"] == "microdata":
        return Microdata(attributes=tuple(obj["attributes"]))
    return table_spec_from_json_obj(obj)


def _product_to_json(product: Product) -> dict:
    if isinstance(product, Table):
        return {
            "type": "table",
            "spec": table_spec_to_json_obj(product.spec),
            "cells": [
                {"geo": g, "margin": list(m), "count": c} for g, m, c in product.cells
            ],
        }
    if isinstance(product, RecordList):
        return {
            "type": "records",
            "attributes": list(product.attributes),
            "records": [list(r) for r in product.records],
        }
    return {"type": "count", "label": product.label, "value": product.value}


def _product_from_json(obj: dict) -> Product:
    if obj["type"] == "table":
        return Table(
            spec=table_spec_from_json_obj(obj["spec"]),
            cells=tuple(
                (c["geo"], tuple(int(v) for v in c["margin"]), None if c["count"] is None else int(c["count"]))
                for c in obj["cells"]
            ),
        )
    if obj["type"] == "records":
        return RecordList(
            attributes=tuple(obj["attributes"]),
            records=tuple(tuple(r) for r in obj["records"]),
        )
    return CountProduct(label=obj["label"], value=int(obj["value"]))


def release_to_json(release: Release) -> str:
    loss = release.privacy_loss
    doc = {
        "mechanism": mechanism_spec_to_json(release.mechanism),
        "targets": [_target_to_json(t) for t in release.targets],
        "products": [_product_to_json(p) for p in release.products],
        "epsilon": None
        if loss is None
        else {
            "e_epsilon": format_fraction(loss.ratio_bound),
            "epsilon": loss.epsilon,
            "alpha": format_fraction(loss.alpha),
            "sensitivity": loss.sensitivity,
        },
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def release_from_json(text: str) -> Release:
    doc = json.loads(text)
    loss = None
    if doc.get("epsilon") is not None:
        loss = PrivacyLoss(
            alpha=parse_fraction(doc["epsilon"]["alpha"]),
            sensitivity=int(doc["epsilon"]["sensitivity"]),
        )
    return Release(
        products=tuple(_product_from_json(p) for p in doc["products"]),
        mechanism=mechanism_spec_from_json(doc["mechanism"]),
        targets=tuple(_target_from_json(t) for t in doc["targets"]),
        privacy_loss=loss,
    )
