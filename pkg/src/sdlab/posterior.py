"""Exact attacker posteriors by brute-force enumeration of candidate worlds.

An AttackerModel lists every person the attacker can imagine, what the
attacker already knows about each, a categorical prior over each unknown
attribute, and an inclusion probability.  A candidate world picks, for each
person, whether they are in the data and which values their unknown
attributes take; the posterior reweights candidate worlds by the mechanism's
exact likelihood of the observed release.  All arithmetic is rational; the
posterior sums to exactly 1 or enumeration fails loudly.

Only independent per-person priors are supported (the independence flag must
be set); correlated attackers are out of scope and rejected at construction.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .mechanisms import Microdata, RecordList, Release, UNAVAILABLE, record_vector, _record_spec
from .rational import format_fraction, parse_fraction
from .worldmodel import Dataset, PERSON_ATTRIBUTES, Person

__all__ = [
    "PersonModel",
    "AttackerModel",
    "CandidateWorld",
    "WorldPosterior",
    "LinkagePosterior",
    "ZeroMassError",
    "EnumerationCapError",
    "ENUMERATION_CAP",
    "enumerate_worlds",
    "enumerate_posterior",
    "marginal",
    "prior_marginal",
    "linkage_posterior",
    "attacker_model_to_json",
    "attacker_model_from_json",
]

ENUMERATION_CAP = 10**6


class ZeroMassError(ValueError):
    """Every candidate world assigns the release probability zero."""


class EnumerationCapError(ValueError):
    """The candidate world space is too large to enumerate exactly."""


@dataclass(frozen=True)
class PersonModel:
    """One person's entry in the attacker's head.

    Attributes:
        person_id: stable identifier, matched against Dataset person ids.
        known: attribute -> value pairs the attacker is certain of.
        priors: attribute -> ((value, probability), ...) for the unknowns;
            each prior sums to exactly 1.
        inclusion: rational probability the person is in the data.
    """

    person_id: str
    known: tuple[tuple[str, object], ...]
    priors: tuple[tuple[str, tuple[tuple[object, Fraction], ...]], ...]
    inclusion: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        known = tuple(sorted((str(a), v) for a, v in dict(self.known).items()))
        object.__setattr__(self, "known", known)
        priors = tuple(
            sorted(
                (str(a), tuple((v, Fraction(p)) for v, p in dist))
                for a, dist in dict(self.priors).items()
            )
        )
        object.__setattr__(self, "priors", priors)
        object.__setattr__(self, "inclusion", Fraction(self.inclusion))
        if not 0 <= self.inclusion <= 1:
            raise ValueError(f"{self.person_id}: inclusion must be in [0,1]")
        covered = {a for a, _ in self.known} | {a for a, _ in self.priors}
        if {a for a, _ in self.known} & {a for a, _ in self.priors}:
            raise ValueError(f"{self.person_id}: attribute both known and uncertain")
        missing = set(PERSON_ATTRIBUTES) - covered
        if missing:
            raise ValueError(f"{self.person_id}: attributes not modeled: {sorted(missing)}")
        for attr, dist in self.priors:
            if not dist:
                raise ValueError(f"{self.person_id}: empty prior for {attr}")
            if any(p < 0 for _, p in dist):
                raise ValueError(f"{self.person_id}: negative prior mass for {attr}")
            if sum(p for _, p in dist) != 1:
                raise ValueError(f"{self.person_id}: prior over {attr} does not sum to 1 exactly")
            if len({v for v, _ in dist}) != len(dist):
                raise ValueError(f"{self.person_id}: duplicate value in prior over {attr}")

    def known_value(self, attr: str):
        for a, v in self.known:
            if a == attr:
                return v
        raise KeyError(attr)

    def prior_over(self, attr: str) -> tuple[tuple[object, Fraction], ...]:
        for a, dist in self.priors:
            if a == attr:
                return dist
        raise KeyError(attr)

    def is_known(self, attr: str) -> bool:
        return any(a == attr for a, _ in self.known)

    def prior_of_value(self, attr: str, value) -> Fraction:
        """Prior P(attr == value), treating known attributes as point masses."""
        if self.is_known(attr):
            return Fraction(1) if self.known_value(attr) == value else Fraction(0)
        return next((p for v, p in self.prior_over(attr) if v == value), Fraction(0))


@dataclass(frozen=True)
class AttackerModel:
    persons: tuple[PersonModel, ...]
    geography: tuple[tuple[str, str], ...]
    independent: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "persons", tuple(self.persons))
        object.__setattr__(self, "geography", tuple(sorted(dict(self.geography).items())))
        if not self.independent:
            raise ValueError("only independent per-person priors are supported")
        ids = [p.person_id for p in self.persons]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate person ids in attacker model")

    def person(self, person_id: str) -> PersonModel:
        for p in self.persons:
            if p.person_id == person_id:
                return p
        raise KeyError(person_id)


@dataclass(frozen=True)
class CandidateWorld:
    """One fully concrete hypothesis: who is in the data, with which values."""

    dataset: Dataset
    included: tuple[str, ...]
    weight: Fraction


@dataclass(frozen=True)
class WorldPosterior:
    """Posterior over candidate worlds; weights sum to exactly 1."""

    worlds: tuple[CandidateWorld, ...]
    release: Release
    attacker: AttackerModel

    @property
    def support(self) -> tuple[tuple[Dataset, Fraction], ...]:
        return tuple((w.dataset, w.weight) for w in self.worlds if w.weight > 0)

    def total(self) -> Fraction:
        return sum((w.weight for w in self.worlds), Fraction(0))


def _branches(model: PersonModel):
    """(included, attrs-or-None, weight) branches for one person."""
    out = []
    if model.inclusion < 1:
        out.append((False, None, 1 - model.inclusion))
    if model.inclusion > 0:
        unknown = [(a, dist) for a, dist in model.priors]
        names = [a for a, _ in unknown]
        for combo in itertools.product(*(dist for _, dist in unknown)):
            weight = model.inclusion
            values = dict(model.known)
            for name, (value, p) in zip(names, combo):
                values[name] = value
                weight *= p
            if weight > 0:
                out.append((True, values, weight))
    return out


def _world_size(attacker: AttackerModel) -> int:
    total = 1
    for model in attacker.persons:
        branches = 0
        if model.inclusion < 1:
            branches += 1
        if model.inclusion > 0:
            combos = 1
            for _, dist in model.priors:
                combos *= len(dist)
            branches += combos
        total *= branches
    return total


def enumerate_worlds(attacker: AttackerModel, cap: int = ENUMERATION_CAP) -> tuple[CandidateWorld, ...]:
    """All candidate worlds with their prior weights (which sum to 1)."""
    if _world_size(attacker) > cap:
        raise EnumerationCapError(
            f"{_world_size(attacker)} candidate worlds exceed the cap of {cap}"
        )
    per_person = [_branches(m) for m in attacker.persons]
    worlds = []
    for combo in itertools.product(*per_person):
        weight = Fraction(1)
        persons = []
        included = []
        for model, (is_in, values, w) in zip(attacker.persons, combo):
            weight *= w
            if is_in:
                included.append(model.person_id)
                persons.append(
                    Person(
                        id=model.person_id,
                        block=str(values["block"]),
                        sex=int(values["sex"]),
                        age=int(values["age"]),
                        race=int(values["race"]),
                        ethnicity=int(values["ethnicity"]),
                        sensitive=int(values["sensitive"]),
                    )
                )
        worlds.append(
            CandidateWorld(
                dataset=Dataset(tuple(persons), attacker.geography),
                included=tuple(included),
                weight=weight,
            )
        )
    return tuple(worlds)


def enumerate_posterior(
    attacker: AttackerModel, release: Release, cap: int = ENUMERATION_CAP
) -> WorldPosterior:
    """Reweight candidate worlds by the release's exact likelihood."""
    from .mechanisms import likelihood

    worlds = enumerate_worlds(attacker, cap)
    weighted = []
    total = Fraction(0)
    for world in worlds:
        like = likelihood(release, world.dataset)
        if like is UNAVAILABLE:
            raise EnumerationCapError("mechanism likelihood unavailable for a candidate world")
        mass = world.weight * like
        weighted.append((world, mass))
        total += mass
    if total == 0:
        raise ZeroMassError("release has probability zero under every candidate world")
    posterior = tuple(
        CandidateWorld(w.dataset, w.included, mass / total) for w, mass in weighted
    )
    return WorldPosterior(worlds=posterior, release=release, attacker=attacker)


def _world_attr(world: CandidateWorld, person_id: str, attr: str):
    """Value of attr for person in this world, or None if not included."""
    if person_id not in world.included:
        return None
    return world.dataset.person(person_id).attribute(attr)


def marginal(
    posterior: WorldPosterior,
    person_id: str,
    value,
    attribute: str = "sensitive",
    require_inclusion: bool = True,
) -> Fraction:
    """P(person's attribute == value [and person in data] | release).

    With require_inclusion, this is the joint event "value is right and the
    person participated".  Without it, worlds where the person is absent
    contribute their prior belief about the attribute, since nothing in such
    a world can teach the attacker about a non-participant's value.
    """
    model = posterior.attacker.person(person_id)
    total = Fraction(0)
    for world in posterior.worlds:
        if world.weight == 0:
            continue
        observed = _world_attr(world, person_id, attribute)
        if observed is None:
            if not require_inclusion:
                total += world.weight * model.prior_of_value(attribute, value)
        elif observed == value:
            total += world.weight
    return total


def prior_marginal(
    attacker: AttackerModel,
    person_id: str,
    value,
    attribute: str = "sensitive",
    require_inclusion: bool = True,
) -> Fraction:
    """Same event as marginal(), before seeing any release."""
    model = attacker.person(person_id)
    p_value = model.prior_of_value(attribute, value)
    if require_inclusion:
        return model.inclusion * p_value
    return p_value


@dataclass(frozen=True)
class LinkagePosterior:
    """Joint posterior over worlds and record-to-person assignments.

    Record-to-person assignment is uniform over the bijections consistent
    with a world, which collapses to: released slot i maps to person j with
    probability 1/multiplicity(value_i) whenever j's record equals value_i.
    That closed form equals brute-force enumeration of consistent bijections
    (the test suite cross-checks it) without the factorial blowup.
    """

    posterior: WorldPosterior
    records: tuple[tuple, ...]
    per_world_links: tuple[tuple[tuple[tuple[str, Fraction], ...], ...], ...]

    def link_probability(self, slot: int, person_id: str) -> Fraction:
        """P(released record `slot` belongs to person | release)."""
        total = Fraction(0)
        for world, links in zip(self.posterior.worlds, self.per_world_links):
            if world.weight == 0:
                continue
            total += world.weight * _lookup(links[slot], person_id)
        return total

    def joint(self, slot: int, person_id: str, value, attribute: str = "sensitive") -> Fraction:
        """P(attribute == value and record `slot` belongs to person | release)."""
        self.posterior.attacker.person(person_id)
        total = Fraction(0)
        for world, links in zip(self.posterior.worlds, self.per_world_links):
            if world.weight == 0:
                continue
            observed = _world_attr(world, person_id, attribute)
            if observed is None or observed != value:
                continue
            total += world.weight * _lookup(links[slot], person_id)
        return total


def _lookup(pairs: tuple[tuple[str, Fraction], ...], person_id: str) -> Fraction:
    for pid, p in pairs:
        if pid == person_id:
            return p
    return Fraction(0)


def linkage_posterior(
    attacker: AttackerModel, release: Release, cap: int = ENUMERATION_CAP
) -> LinkagePosterior:
    """Posterior over (world, record-to-person assignment) pairs.

    Requires exactly one released record list produced by a mechanism with
    deterministic per-person records (Identity or Coarsen).
    """
    record_products = [p for p in release.products if isinstance(p, RecordList)]
    if len(record_products) != 1:
        raise ValueError("linkage needs exactly one released record list")
    product = record_products[0]
    target = next(t for t in release.targets if isinstance(t, Microdata))
    spec = _record_spec(release.mechanism)
    if spec.kind not in ("Identity", "Coarsen"):
        raise ValueError(f"{release.mechanism.kind} records are not per-person deterministic")

    posterior = enumerate_posterior(attacker, release, cap)
    multiplicity = {v: product.records.count(v) for v in set(product.records)}

    per_world = []
    for world in posterior.worlds:
        links: list[tuple[tuple[str, Fraction], ...]] = [() for _ in product.records]
        if world.weight > 0:
            vector = record_vector(world.dataset, target, spec)
            ids = [p.id for p in world.dataset.persons]
            for slot, released_value in enumerate(product.records):
                share = Fraction(1, multiplicity[released_value])
                links[slot] = tuple(
                    (pid, share) for pid, rec in zip(ids, vector) if rec == released_value
                )
        per_world.append(tuple(links))

    return LinkagePosterior(
        posterior=posterior, records=product.records, per_world_links=tuple(per_world)
    )


# --- serialization ------------------------------------------------------------


def attacker_model_to_json(attacker: AttackerModel) -> str:
    doc = {
        "independent": attacker.independent,
        "geography": {b: r for b, r in attacker.geography},
        "persons": [
            {
                "person_id": m.person_id,
                "inclusion": format_fraction(m.inclusion),
                "known": {a: v for a, v in m.known},
                "priors": {
                    a: [[v, format_fraction(p)] for v, p in dist] for a, dist in m.priors
                },
            }
            for m in attacker.persons
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def attacker_model_from_json(text: str) -> AttackerModel:
    doc = json.loads(text)
    persons = tuple(
        PersonModel(
            person_id=str(p["person_id"]),
            known=tuple(p.get("known", {}).items()),
            priors=tuple(
                (a, tuple((v, parse_fraction(q)) for v, q in dist))
                for a, dist in p.get("priors", {}).items()
            ),
            inclusion=parse_fraction(p.get("inclusion", 1)),
        )
        for p in doc["persons"]
    )
    return AttackerModel(
        persons=persons,
        geography=tuple(doc["geography"].items()),
        independent=bool(doc.get("independent", True)),
    )
