import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import ONE_BIN, SMALL_SCHEMA, TWO_BINS, dataset, person, random_dataset
from sdlab.worldmodel import (
    BLANK,
    AgeBinSystem,
    BlockSpec,
    Dataset,
    PopulationSpec,
    Schema,
    bin_age,
    blank_person,
    cell_of,
    generate,
    population_spec_from_json,
    population_spec_to_json,
    read_microdata_csv,
    with_imputed,
    write_microdata_csv,
)

DECADES = AgeBinSystem("decades", tuple((lo, lo + 9) for lo in range(0, 110, 10)) + ((110, 115),))


# --- age bins -------------------------------------------------------------------


def test_age_bins_must_tile_the_age_range():
    with pytest.raises(ValueError):
        AgeBinSystem("gap", ((0, 10), (12, 115)))
    with pytest.raises(ValueError):
        AgeBinSystem("overlap", ((0, 10), (10, 115)))
    with pytest.raises(ValueError):
        AgeBinSystem("short", ((0, 100),))


@given(st.integers(min_value=0, max_value=115))
def test_bin_age_returns_the_covering_bin(age):
    for system in (ONE_BIN, TWO_BINS, DECADES):
        idx = bin_age(system, age)
        lo, hi = system.bins[idx]
        assert lo <= age <= hi


def test_bin_age_rejects_out_of_range():
    with pytest.raises(ValueError):
        bin_age(TWO_BINS, -1)
    with pytest.raises(ValueError):
        bin_age(TWO_BINS, 116)


# --- schema cells ----------------------------------------------------------------


def test_schema_cell_count():
    assert SMALL_SCHEMA.cells == 2 * 2 * 2 * 1
    assert Schema(age_bins=DECADES, race_levels=3, ethnicity_levels=2).cells == 2 * 12 * 3 * 2


def test_cell_of_round_trips_through_cell_key():
    schema = Schema(age_bins=TWO_BINS, race_levels=3, ethnicity_levels=2)
    rng = random.Random(5)
    for i in range(200):
        p = person(
            f"p{i}",
            "b0",
            sex=rng.randrange(2),
            age=rng.randrange(116),
            race=rng.randrange(3),
            ethnicity=rng.randrange(2),
        )
        cell = cell_of(schema, p)
        assert 0 <= cell < schema.cells
        assert schema.cell_key(cell) == (p.sex, bin_age(TWO_BINS, p.age), p.race, p.ethnicity)


def test_cell_of_rejects_out_of_schema_person():
    with pytest.raises(ValueError):
        cell_of(SMALL_SCHEMA, person("p0", "b0", race=5))


# --- persons and datasets ---------------------------------------------------------


def test_blank_person_wipes_every_attribute_but_keeps_identity():
    p = person("p0", "b7", sex=1, age=44, race=2, ethnicity=1, sensitive=1)
    b = blank_person(p)
    assert (b.id, b.block) == ("p0", "b7")
    assert (b.sex, b.age, b.race, b.ethnicity, b.sensitive) == (BLANK,) * 5
    assert b.is_blank and not p.is_blank


def test_person_attribute_lookup():
    p = person("p0", "b0", age=61)
    assert p.attribute("age") == 61
    with pytest.raises(KeyError):
        p.attribute("shoe_size")


def test_dataset_rejects_unmapped_blocks_and_duplicate_ids():
    with pytest.raises(ValueError):
        Dataset((person("p0", "nowhere"),), (("b0", "r0"),))
    with pytest.raises(ValueError):
        Dataset((person("p0", "b0"), person("p0", "b0")), (("b0", "r0"),))


def test_dataset_geography_is_normalized():
    d = Dataset(
        (person("p0", "b1"),),
        (("b1", "r0"), ("b0", "r1"), ("b1", "r0")),
    )
    assert d.geography == (("b0", "r1"), ("b1", "r0"))
    assert d.blocks == ("b0", "b1")
    assert d.regions == ("r0", "r1")
    assert d.region_of("b1") == "r0"


def test_dataset_without_drops_exactly_one_person():
    d = dataset([person("p0", "b0"), person("p1", "b0")])
    assert tuple(p.id for p in d.without("p0").persons) == ("p1",)
    with pytest.raises(KeyError):
        d.without("p9")


# --- synthetic population generator ------------------------------------------------


def _spec(seed=3):
    w = Fraction(1, SMALL_SCHEMA.cells)
    return PopulationSpec(
        schema=SMALL_SCHEMA,
        blocks=(BlockSpec("b0", 6, "r0"), BlockSpec("b1", 4, "r1")),
        attribute_distribution=(w,) * SMALL_SCHEMA.cells,
        seed=seed,
    )


def test_generate_is_deterministic_and_respects_sizes():
    d1 = generate(_spec())
    d2 = generate(_spec())
    assert d1 == d2
    assert len(d1.persons_in("b0")) == 6
    assert len(d1.persons_in("b1")) == 4
    assert d1.geography == (("b0", "r0"), ("b1", "r1"))
    assert generate(_spec(seed=4)) != d1


def test_generate_ids_are_block_scoped_and_stable():
    d = generate(_spec())
    assert [p.id for p in d.persons_in("b0")] == [f"b0-{k:04d}" for k in range(6)]


def test_generate_respects_distribution_support():
    weights = [Fraction(0)] * SMALL_SCHEMA.cells
    weights[3] = Fraction(1, 2)
    weights[5] = Fraction(1, 2)
    spec = PopulationSpec(
        schema=SMALL_SCHEMA,
        blocks=(BlockSpec("b0", 30, "r0"),),
        attribute_distribution=tuple(weights),
        seed=9,
    )
    cells = {cell_of(SMALL_SCHEMA, p) for p in generate(spec).persons}
    assert cells <= {3, 5}


def test_generate_homogeneity_weight_one_pins_the_block_cell():
    spec = PopulationSpec(
        schema=SMALL_SCHEMA,
        blocks=(BlockSpec("b0", 10, "r0"), BlockSpec("b1", 10, "r0")),
        attribute_distribution=(Fraction(1, SMALL_SCHEMA.cells),) * SMALL_SCHEMA.cells,
        homogeneity=(("b0", (3, Fraction(1))), ("b1", (5, Fraction(1)))),
        seed=2,
    )
    d = generate(spec)
    assert {cell_of(SMALL_SCHEMA, p) for p in d.persons_in("b0")} == {3}
    assert {cell_of(SMALL_SCHEMA, p) for p in d.persons_in("b1")} == {5}


def test_homogeneity_validation():
    base = dict(
        schema=SMALL_SCHEMA,
        blocks=(BlockSpec("b0", 2, "r0"),),
        attribute_distribution=(Fraction(1, SMALL_SCHEMA.cells),) * SMALL_SCHEMA.cells,
    )
    with pytest.raises(ValueError):
        PopulationSpec(homogeneity=(("bogus", (0, Fraction(1, 2))),), **base)
    with pytest.raises(ValueError):
        PopulationSpec(homogeneity=(("b0", (99, Fraction(1, 2))),), **base)
    with pytest.raises(ValueError):
        PopulationSpec(homogeneity=(("b0", (0, Fraction(3, 2))),), **base)


def test_population_spec_json_round_trip():
    spec = _spec()
    again = population_spec_from_json(population_spec_to_json(spec))
    assert again == spec
    assert generate(again) == generate(spec)


# --- imputation -------------------------------------------------------------------


def test_with_imputed_zero_fraction_is_identity():
    d = random_dataset(random.Random(1), 8)
    assert with_imputed(d, Fraction(0), seed=5) == d


def test_with_imputed_full_fraction_copies_donors_in_block():
    d = random_dataset(random.Random(2), 9, blocks=("b0", "b1", "b2"))
    out = with_imputed(d, Fraction(1), seed=5)
    assert out == with_imputed(d, Fraction(1), seed=5)
    by_id = {p.id: p for p in d.persons}
    for q in out.persons:
        block = [p for p in d.persons_in(q.block)]
        if len(block) < 2:
            assert q == by_id[q.id]
            continue
        assert q.imputed
        assert q.sensitive == by_id[q.id].sensitive
        donors = [
            p
            for p in block
            if p.id != q.id
            and (p.sex, p.age, p.race, p.ethnicity) == (q.sex, q.age, q.race, q.ethnicity)
        ]
        assert donors, f"{q.id} matches no donor in its block"


def test_with_imputed_rejects_bad_fraction():
    d = random_dataset(random.Random(3), 4)
    with pytest.raises(ValueError):
        with_imputed(d, Fraction(3, 2), seed=0)


# --- microdata serialization --------------------------------------------------------


def test_microdata_csv_round_trip_preserves_blanks_and_flags():
    base = random_dataset(random.Random(4), 6)
    persons = list(base.persons)
    persons[0] = blank_person(persons[0])
    persons[1] = person("p1", persons[1].block, imputed=True)
    d = Dataset(tuple(persons), base.geography)
    geography = dict(d.geography)
    again = read_microdata_csv(write_microdata_csv(d), geography)
    assert again == d


def test_microdata_csv_default_geography_is_one_region():
    d = dataset([person("p0", "b0"), person("p1", "b1")], (("b0", "r0"), ("b1", "r1")))
    again = read_microdata_csv(write_microdata_csv(d))
    assert again.regions == ("R0",)


def test_microdata_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        read_microdata_csv("id,block\n")
