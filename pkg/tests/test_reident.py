import random
from fractions import Fraction as F

import pytest

from helpers import TWO_BINS, brute_max_matching, dataset, person
from sdlab.reident import (
    HOMOGENEITY_BINS,
    SIZE_BINS,
    KeySpec,
    block_homogeneity,
    confirm_matches,
    group_rates,
    match_one_to_one,
)
from sdlab.worldmodel import Dataset


def key_world(values, prefix, block="b0"):
    """One person per entry, race carrying the key letter (A=0, B=1, ...)."""
    return dataset(
        [person(f"{prefix}{i}", block, race=v) for i, v in enumerate(values)],
        (("b0", "r0"),),
    )


RACE_KEY = KeySpec(attributes=("race",))


def test_worked_example_two_of_four_match():
    # attacker file {A, A, B, C} vs released {A, B, D, D}
    known = key_world([0, 0, 1, 2], "k")
    candidates = key_world([0, 1, 3, 3], "c")
    result = match_one_to_one(known, candidates, RACE_KEY)
    assert result.matched == 2
    assert {(p.known_id, p.candidate_id) for p in result.pairs} == {("k0", "c0"), ("k2", "c1")}
    assert result.match_rate == F(2, 4)


def random_file(rng, prefix, size, block="b0"):
    return dataset(
        [
            person(
                f"{prefix}{i}",
                block,
                sex=rng.randrange(2),
                age=rng.randrange(20, 30),
                race=rng.randrange(3),
            )
            for i in range(size)
        ],
        (("b0", "r0"),),
    )


def test_exact_key_match_count_is_sum_of_minima():
    rng = random.Random(71)
    key = KeySpec(attributes=("sex", "race"))
    for _ in range(100):
        known = random_file(rng, "k", rng.randrange(0, 12))
        candidates = random_file(rng, "c", rng.randrange(0, 12))
        result = match_one_to_one(known, candidates, key)
        by_key = {}
        for p in known.persons:
            by_key.setdefault(key.exact_tuple(p), [0, 0])[0] += 1
        for p in candidates.persons:
            by_key.setdefault(key.exact_tuple(p), [0, 0])[1] += 1
        assert result.matched == sum(min(a, b) for a, b in by_key.values())


def test_fuzzy_age_matching_equals_brute_force_maximum():
    rng = random.Random(72)
    key = KeySpec(attributes=("sex", "age"), age_rule="plus_minus_one")
    for _ in range(60):
        known = random_file(rng, "k", rng.randrange(0, 8))
        candidates = random_file(rng, "c", rng.randrange(0, 8))
        result = match_one_to_one(known, candidates, key)
        brute = brute_max_matching(
            list(known.persons), list(candidates.persons), key.agrees
        )
        assert result.matched == brute
        for pair in result.pairs:
            assert key.agrees(known.person(pair.known_id), candidates.person(pair.candidate_id))
        assert len({p.candidate_id for p in result.pairs}) == len(result.pairs)


def test_fuzzy_matching_is_lexicographically_deterministic():
    known = dataset([person("k0", "b0", age=30), person("k1", "b0", age=31)])
    candidates = dataset([person("c0", "b0", age=31), person("c1", "b0", age=30)])
    key = KeySpec(attributes=("age",), age_rule="plus_minus_one")
    result = match_one_to_one(known, candidates, key)
    # Both assignments are maximal; the smallest pair list wins.
    assert [(p.known_id, p.candidate_id) for p in result.pairs] == [("k0", "c0"), ("k1", "c1")]
    assert result == match_one_to_one(known, candidates, key)


def test_binned_age_rule_partitions_by_bin():
    known = dataset([person("k0", "b0", age=35)])
    candidates = dataset([person("c0", "b0", age=5), person("c1", "b0", age=44)])
    binned = KeySpec(attributes=("age",), age_rule="binned", age_bins=TWO_BINS)
    result = match_one_to_one(known, candidates, binned)
    assert [(p.known_id, p.candidate_id) for p in result.pairs] == [("k0", "c0")]


def test_key_spec_validation():
    with pytest.raises(ValueError):
        KeySpec(attributes=("sensitive",))
    with pytest.raises(ValueError):
        KeySpec(attributes=("age", "age"))
    with pytest.raises(ValueError):
        KeySpec(attributes=("age",), age_rule="fuzzy")
    with pytest.raises(ValueError):
        KeySpec(attributes=("age",), age_rule="binned")


def test_confirmation_checks_claims_against_truth():
    truth = dataset(
        [person("k0", "b0", race=1, ethnicity=1), person("k1", "b0", race=0)]
    )
    known = dataset([person("k0", "b0"), person("k1", "b0")])
    candidates = dataset(
        [person("c0", "b0", race=1, ethnicity=1), person("c1", "b0", race=1)]
    )
    key = KeySpec(attributes=("block", "sex"))
    result = match_one_to_one(known, candidates, key)
    assert result.matched == 2
    report = confirm_matches(result, candidates, truth, key)
    # c-records claim (race, ethnicity); only k0's claim is right.
    assert len(report.confirmed) == 1
    assert report.confirmed[0].known_id == "k0"
    assert report.precision == F(1, 2)


def test_imputed_persons_never_confirm_when_data_defined_only():
    truth = dataset([person("k0", "b0", race=1, imputed=True)])
    known = dataset([person("k0", "b0")])
    candidates = dataset([person("c0", "b0", race=1)])
    key = KeySpec(attributes=("block",))
    result = match_one_to_one(known, candidates, key)
    strict = confirm_matches(result, candidates, truth, key, claim_attributes=("race",))
    assert strict.confirmed == ()
    lax = confirm_matches(
        result, candidates, truth, key, claim_attributes=("race",), data_defined_only=False
    )
    assert len(lax.confirmed) == 1


def test_empty_putative_set_has_undefined_precision():
    known = dataset([person("k0", "b0", race=0)])
    candidates = dataset([person("c0", "b0", race=1)])
    result = match_one_to_one(known, candidates, RACE_KEY)
    report = confirm_matches(result, candidates, known, RACE_KEY)
    assert result.matched == 0
    assert report.precision is None


def test_block_homogeneity_is_the_modal_share():
    truth = dataset(
        [person(f"p{i}", "b0", race=1) for i in range(3)]
        + [person("p3", "b0", race=0)]
        + [person("p4", "b1", race=2)]
    )
    assert block_homogeneity(truth, "b0") == F(3, 4)
    assert block_homogeneity(truth, "b1") == 1


def test_group_rates_partition_putative_and_confirmed_counts():
    rng = random.Random(73)
    persons = []
    geography = (("b0", "r0"), ("b1", "r0"), ("b2", "r0"))
    n = 0
    for block, size in (("b0", 3), ("b1", 12), ("b2", 5)):
        for _ in range(size):
            persons.append(
                person(
                    f"p{n}",
                    block,
                    sex=rng.randrange(2),
                    age=rng.randrange(20, 40),
                    race=rng.randrange(2),
                )
            )
            n += 1
    truth = Dataset(tuple(persons), geography)
    known = truth
    candidates = Dataset(
        tuple(
            person(f"c{i}", p.block, sex=p.sex, age=p.age, race=p.race, ethnicity=p.ethnicity)
            for i, p in enumerate(persons)
        ),
        geography,
    )
    key = KeySpec(attributes=("block", "sex", "age"))
    result = match_one_to_one(known, candidates, key)
    report = confirm_matches(result, candidates, truth, key)
    rates = group_rates(result, report, truth)
    assert sum(r.population for r in rates) == len(truth.persons)
    assert sum(r.putative for r in rates) == result.matched
    assert sum(r.confirmed for r in rates) == len(report.confirmed)
    for r in rates:
        lo, hi = r.size_range
        assert (lo, hi) in SIZE_BINS
        assert r.homogeneity_range in HOMOGENEITY_BINS
        assert r.confirmed <= r.putative <= r.population
