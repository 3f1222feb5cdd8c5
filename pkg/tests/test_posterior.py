"""The posterior engine against a from-scratch Bayes computation.

The oracle in helpers.py re-derives world enumeration, prior weighting, and
normalization independently; only the likelihood function is shared, and that
is oracle-tested on its own in test_mechanisms.py."""

import itertools
import random
from fractions import Fraction as F

import pytest

from helpers import (
    HALF,
    attacker_for,
    dataset,
    model_knowing,
    naive_posterior_weights,
    naive_world_weights,
    person,
    random_attacker,
    random_release,
    world_signature,
)
from sdlab.mechanisms import MechanismSpec, Microdata, apply
from sdlab.posterior import (
    AttackerModel,
    EnumerationCapError,
    PersonModel,
    ZeroMassError,
    attacker_model_from_json,
    attacker_model_to_json,
    enumerate_posterior,
    enumerate_worlds,
    linkage_posterior,
    marginal,
    prior_marginal,
)
from sdlab.tabulate import TableSpec

RACE_TABLE = TableSpec("race", "block", ("race",))


def posterior_by_signature(attacker, release):
    post = enumerate_posterior(attacker, release)
    out = {}
    for world in post.worlds:
        sig = world_signature(attacker, world)
        out[sig] = out.get(sig, F(0)) + world.weight
    return out


def test_world_prior_weights_sum_to_one_and_match_naive():
    rng = random.Random(100)
    for _ in range(30):
        attacker = random_attacker(rng)
        worlds = enumerate_worlds(attacker)
        assert sum(w.weight for w in worlds) == 1
        grouped = {}
        for w in worlds:
            sig = world_signature(attacker, w)
            grouped[sig] = grouped.get(sig, F(0)) + w.weight
        naive = naive_world_weights(attacker)
        for sig in set(grouped) | set(naive):
            assert grouped.get(sig, F(0)) == naive.get(sig, F(0))


def test_posterior_matches_naive_bayes_on_random_instances():
    rng = random.Random(200)
    checked = 0
    while checked < 60:
        attacker = random_attacker(rng)
        release = random_release(rng, attacker)
        naive = naive_posterior_weights(attacker, release)
        if naive is None:
            with pytest.raises(ZeroMassError):
                enumerate_posterior(attacker, release)
            continue
        engine = posterior_by_signature(attacker, release)
        assert sum(engine.values()) == 1
        for sig in set(engine) | set(naive):
            assert engine.get(sig, F(0)) == naive.get(sig, F(0))
        checked += 1


def test_marginal_matches_naive_in_both_inclusion_semantics():
    rng = random.Random(300)
    for _ in range(25):
        attacker = random_attacker(rng)
        release = random_release(rng, attacker)
        naive = naive_posterior_weights(attacker, release)
        if naive is None:
            continue
        post = enumerate_posterior(attacker, release)
        for idx, model in enumerate(attacker.persons):
            pid = model.person_id
            for value in (0, 1):
                joint = sum(
                    w for sig, w in naive.items() if sig[idx] is not None and sig[idx][5] == value
                )
                assert marginal(post, pid, value) == joint
                absent = sum(w for sig, w in naive.items() if sig[idx] is None)
                p_value = model.prior_of_value("sensitive", value)
                assert marginal(post, pid, value, require_inclusion=False) == joint + absent * p_value
                assert prior_marginal(attacker, pid, value) == model.inclusion * p_value
                assert prior_marginal(attacker, pid, value, require_inclusion=False) == p_value


def test_zero_mass_release_raises():
    p = person("p0", "b0", race=1)
    attacker = attacker_for([p], models=[model_knowing(p, unknown="sensitive")])
    impossible = apply(dataset([person("x", "b0", race=0)]), MechanismSpec(kind="Identity", seed=0), (RACE_TABLE,))
    with pytest.raises(ZeroMassError):
        enumerate_posterior(attacker, impossible)


def test_enumeration_cap_is_enforced():
    persons = [person(f"p{i}", "b0") for i in range(3)]
    attacker = attacker_for(
        persons, models=[model_knowing(p, unknown="sensitive") for p in persons]
    )
    release = apply(dataset(persons), MechanismSpec(kind="Identity", seed=0), (RACE_TABLE,))
    with pytest.raises(EnumerationCapError):
        enumerate_posterior(attacker, release, cap=7)
    enumerate_posterior(attacker, release, cap=8)


def test_person_model_validation():
    base = dict(block="b0", sex=0, age=30, race=0, ethnicity=0)
    with pytest.raises(ValueError):
        PersonModel("p0", known=base, priors={"sensitive": ((0, F(1, 3)), (1, F(1, 3)))})
    with pytest.raises(ValueError):
        PersonModel("p0", known=dict(base, sensitive=1), priors={"sensitive": ((0, HALF), (1, HALF))})
    with pytest.raises(ValueError):
        PersonModel("p0", known=base, priors={})
    with pytest.raises(ValueError):
        PersonModel(
            "p0", known=base, priors={"sensitive": ((0, HALF), (0, HALF))}
        )
    with pytest.raises(ValueError):
        PersonModel(
            "p0",
            known=base,
            priors={"sensitive": ((0, HALF), (1, HALF))},
            inclusion=F(3, 2),
        )


def test_attacker_model_validation():
    p = person("p0", "b0")
    m = model_knowing(p)
    with pytest.raises(ValueError):
        AttackerModel(persons=(m, m), geography=(("b0", "r0"),))
    with pytest.raises(ValueError):
        AttackerModel(persons=(m,), geography=(("b0", "r0"),), independent=False)


def test_linkage_closed_form_equals_bijection_enumeration():
    # Two clones share a record; one person is distinct.
    persons = [
        person("c0", "b0", race=1),
        person("c1", "b0", race=1),
        person("d0", "b0", race=0),
    ]
    attacker = attacker_for(
        persons, models=[model_knowing(p, unknown="sensitive") for p in persons]
    )
    target = Microdata(("block", "sex", "age", "race", "ethnicity"))
    release = apply(dataset(persons), MechanismSpec(kind="Identity", seed=0), (target,))
    linked = linkage_posterior(attacker, release)

    (records,) = [p.records for p in release.products]
    for world, links in zip(linked.posterior.worlds, linked.per_world_links):
        if world.weight == 0:
            continue
        ids = [q.id for q in world.dataset.persons]
        vector = [
            tuple(q.attribute(a) for a in target.attributes) for q in world.dataset.persons
        ]
        consistent = [
            perm
            for perm in itertools.permutations(range(len(ids)))
            if all(vector[perm[slot]] == records[slot] for slot in range(len(records)))
        ]
        assert consistent
        for slot in range(len(records)):
            for j, pid in enumerate(ids):
                brute = F(sum(1 for perm in consistent if perm[slot] == j), len(consistent))
                share = dict(links[slot]).get(pid, F(0))
                assert share == brute


def test_linkage_rejects_releases_without_a_single_record_list():
    persons = [person("p0", "b0")]
    attacker = attacker_for(persons, models=[model_knowing(p, unknown="sensitive") for p in persons])
    tables_only = apply(dataset(persons), MechanismSpec(kind="Identity", seed=0), (RACE_TABLE,))
    with pytest.raises(ValueError):
        linkage_posterior(attacker, tables_only)


def test_attacker_model_json_round_trip():
    rng = random.Random(400)
    for _ in range(10):
        attacker = random_attacker(rng)
        assert attacker_model_from_json(attacker_model_to_json(attacker)) == attacker
