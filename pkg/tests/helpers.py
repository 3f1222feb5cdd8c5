"""Shared builders for the test suite.

Worlds here are constructed directly rather than generated, so every test
quantity can be derived by hand."""

from __future__ import annotations

import random
from fractions import Fraction

from sdlab.posterior import AttackerModel, PersonModel
from sdlab.worldmodel import AgeBinSystem, Dataset, Person, Schema

ONE = Fraction(1)
HALF = Fraction(1, 2)

TWO_BINS = AgeBinSystem("two-bins", ((0, 39), (40, 115)))
ONE_BIN = AgeBinSystem("all-ages", ((0, 115),))

SMALL_SCHEMA = Schema(age_bins=TWO_BINS, race_levels=2, ethnicity_levels=1)
TWO_CELL_SCHEMA = Schema(age_bins=ONE_BIN, race_levels=1, ethnicity_levels=1)

PERSON_ATTRIBUTES = ("block", "sex", "age", "race", "ethnicity", "sensitive")


def person(pid, block, sex=0, age=30, race=0, ethnicity=0, sensitive=0, imputed=False):
    return Person(
        id=pid,
        block=block,
        sex=sex,
        age=age,
        race=race,
        ethnicity=ethnicity,
        sensitive=sensitive,
        imputed=imputed,
    )


def dataset(persons, geography=None):
    if geography is None:
        blocks = []
        for p in persons:
            if p.block not in blocks:
                blocks.append(p.block)
        geography = tuple((b, "r0") for b in blocks)
    return Dataset(tuple(persons), tuple(geography))


def model_knowing(p, unknown=None, inclusion=ONE, priors=None):
    """Attacker knows every attribute of `p` except `unknown`, which gets
    `priors` (default uniform over {0,1})."""
    known = {a: getattr(p, a) for a in PERSON_ATTRIBUTES if a != unknown}
    pr = {}
    if unknown is not None:
        pr[unknown] = priors if priors is not None else ((0, HALF), (1, HALF))
    return PersonModel(person_id=p.id, known=known, priors=pr, inclusion=inclusion)


def attacker_for(persons, geography=None, models=None, independent=True):
    data = dataset(persons, geography)
    if models is None:
        models = tuple(model_knowing(p) for p in persons)
    return AttackerModel(persons=tuple(models), geography=data.geography, independent=independent)


def naive_branches(model: PersonModel):
    """Independent re-derivation of a person's world branches.

    Yields (included, values, weight) with values a dict over all six
    attributes when included, None when out."""
    if model.inclusion < 1:
        yield (False, None, ONE - model.inclusion)
    if model.inclusion == 0:
        return
    import itertools

    unknown = list(model.priors)
    for combo in itertools.product(*(dist for _, dist in unknown)):
        weight = model.inclusion
        values = dict(model.known)
        for (name, _), (value, p) in zip(unknown, combo):
            values[name] = value
            weight *= p
        yield (True, values, weight)


def naive_world_weights(attacker: AttackerModel):
    """Prior over world signatures by direct product enumeration.

    A signature fixes, for every modeled person in order, either None (out)
    or their six attribute values."""
    import itertools

    out: dict[tuple, Fraction] = {}
    for combo in itertools.product(*(tuple(naive_branches(m)) for m in attacker.persons)):
        weight = ONE
        sig = []
        for included, values, w in combo:
            weight *= w
            sig.append(
                None
                if not included
                else tuple(values[a] for a in PERSON_ATTRIBUTES)
            )
        key = tuple(sig)
        out[key] = out.get(key, Fraction(0)) + weight
    return out


def world_signature(attacker: AttackerModel, world) -> tuple:
    sig = []
    for model in attacker.persons:
        if model.person_id not in world.included:
            sig.append(None)
        else:
            p = world.dataset.person(model.person_id)
            sig.append(tuple(getattr(p, a) for a in PERSON_ATTRIBUTES))
    return tuple(sig)


def naive_posterior_weights(attacker: AttackerModel, release):
    """Bayes by brute force: prior weight times likelihood, normalized.

    Returns None when every world has zero mass."""
    from sdlab.mechanisms import likelihood
    from sdlab.worldmodel import Person

    weights: dict[tuple, Fraction] = {}
    total = Fraction(0)
    for sig, prior_w in naive_world_weights(attacker).items():
        persons = tuple(
            Person(
                id=model.person_id,
                block=entry[0],
                sex=entry[1],
                age=entry[2],
                race=entry[3],
                ethnicity=entry[4],
                sensitive=entry[5],
            )
            for model, entry in zip(attacker.persons, sig)
            if entry is not None
        )
        like = likelihood(release, Dataset(persons, attacker.geography))
        mass = prior_w * like
        weights[sig] = weights.get(sig, Fraction(0)) + mass
        total += mass
    if total == 0:
        return None
    return {sig: w / total for sig, w in weights.items()}


def random_attacker(rng: random.Random, max_persons=4):
    """Random belief state over a world of ≤ max_persons in ≤ 2 blocks.

    Ages stay in {25, 50}, races in {0,1,2}, ethnicity pinned to 0, so the
    schema behind any released table has at most 6 cells."""
    geography = (("b0", "r0"), ("b1", "r0"))
    persons = []
    for i in range(rng.randrange(1, max_persons + 1)):
        known = {
            "block": rng.choice(("b0", "b1")),
            "sex": rng.randrange(2),
            "age": rng.choice((25, 50)),
            "ethnicity": 0,
        }
        priors = {}
        if rng.random() < 0.5:
            known["race"] = rng.randrange(3)
        else:
            v = rng.randrange(3)
            a = rng.randrange(1, 4)
            priors["race"] = ((v, Fraction(a, 4)), ((v + 1) % 3, Fraction(4 - a, 4)))
        if rng.random() < 0.5:
            known["sensitive"] = rng.randrange(2)
        else:
            a = rng.randrange(1, 4)
            priors["sensitive"] = ((0, Fraction(a, 4)), (1, Fraction(4 - a, 4)))
        inclusion = rng.choice((ONE, ONE, ONE, Fraction(1, 2), Fraction(3, 4)))
        if i == 0:
            inclusion = ONE
        persons.append(
            PersonModel(person_id=f"p{i}", known=known, priors=priors, inclusion=inclusion)
        )
    return AttackerModel(persons=tuple(persons), geography=geography, independent=True)


def sample_true_world(rng: random.Random, attacker: AttackerModel) -> Dataset:
    """A nonempty positive-prior world drawn from the attacker's support."""
    from sdlab.worldmodel import Person

    weights = naive_world_weights(attacker)
    support = [sig for sig, w in weights.items() if w > 0 and any(e is not None for e in sig)]
    sig = rng.choice(sorted(support, key=repr))
    persons = tuple(
        Person(
            id=model.person_id,
            block=entry[0],
            sex=entry[1],
            age=entry[2],
            race=entry[3],
            ethnicity=entry[4],
            sensitive=entry[5],
        )
        for model, entry in zip(attacker.persons, sig)
        if entry is not None
    )
    return Dataset(persons, attacker.geography)


def random_release(rng: random.Random, attacker: AttackerModel):
    """A release whose posterior has positive mass under the attacker."""
    from sdlab.mechanisms import MechanismSpec, Microdata, apply
    from sdlab.tabulate import TableSpec

    truth = sample_true_world(rng, attacker)
    race_table = TableSpec("race", "block", ("race",))
    kind = rng.randrange(5)
    if kind == 0:
        return apply(truth, MechanismSpec(kind="Identity", seed=0), (race_table,))
    if kind == 1:
        return apply(
            truth, MechanismSpec(kind="Identity", seed=0), (Microdata(("block", "sex", "race")),)
        )
    if kind == 2:
        return apply(truth, MechanismSpec(kind="Suppress", seed=0, threshold=2), (race_table,))
    if kind == 3:
        spec = MechanismSpec(kind="GeometricNoise", seed=rng.randrange(10**6), alpha=Fraction(1, 2))
        return apply(truth, spec, (race_table,))
    spec = MechanismSpec(kind="PerturbedTotal", seed=rng.randrange(10**6), alpha=Fraction(1, 2))
    return apply(truth, spec, ())


def random_person(rng: random.Random, pid, blocks, max_age=79):
    return person(
        pid,
        rng.choice(blocks),
        sex=rng.randrange(2),
        age=rng.randrange(max_age + 1),
        race=rng.randrange(2),
        ethnicity=rng.randrange(2),
        sensitive=rng.randrange(2),
    )


def random_dataset(rng: random.Random, n_persons, blocks=("b0", "b1"), regions=None, max_age=79):
    persons = tuple(random_person(rng, f"p{i}", list(blocks), max_age) for i in range(n_persons))
    if regions is None:
        regions = {b: "r0" for b in blocks}
    geography = tuple((b, regions[b]) for b in blocks)
    return Dataset(persons, geography)


def brute_max_matching(lefts, rights, agrees):
    """Bitmask DP over the right side: maximum bipartite matching size."""
    n = len(rights)
    best = {0: 0}
    for l in lefts:
        nxt = dict(best)
        for mask, size in best.items():
            for j in range(n):
                if mask & (1 << j) or not agrees(l, rights[j]):
                    continue
                m2 = mask | (1 << j)
                if nxt.get(m2, -1) < size + 1:
                    nxt[m2] = size + 1
        best = nxt
    return max(best.values())


def brute_force_solutions(system):
    """Independent enumerator: bound each variable by its smallest covering
    equation, filter the full product against every equation."""
    import itertools

    n = len(system.variables)
    highs = [None] * n
    for eq in system.equations:
        for v in eq.variables:
            if highs[v] is None or eq.total < highs[v]:
                highs[v] = eq.total
    assert all(h is not None for h in highs)
    space = 1
    for h in highs:
        space *= h + 1
    assert space <= 300_000, "test instance too large to brute force"
    out = []
    for assignment in itertools.product(*(range(h + 1) for h in highs)):
        if all(sum(assignment[v] for v in eq.variables) == eq.total for eq in system.equations):
            out.append(assignment)
    return sorted(out)
