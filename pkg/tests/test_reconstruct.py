import random
from fractions import Fraction

import pytest

from helpers import ONE_BIN, TWO_CELL_SCHEMA, brute_force_solutions, dataset, person
from sdlab.reconstruct import (
    Equation,
    UnboundedSystemError,
    build_constraints,
    constraint_system_from_json,
    constraint_system_to_json,
    microdata_from_solution,
    solve_all,
    variability_report,
)
from sdlab.tabulate import TableSpec, invariant_totals, tabulate
from sdlab.worldmodel import AgeBinSystem, Dataset, Schema, cell_of

FOUR_CELL_SCHEMA = Schema(age_bins=ONE_BIN, race_levels=2, ethnicity_levels=1)
VOTING_BINS = AgeBinSystem("voting", ((0, 17), (18, 115)))
VOTING_SCHEMA = Schema(age_bins=VOTING_BINS, race_levels=1, ethnicity_levels=1)

POP = TableSpec("pop", "block", ())
BY_SEX = TableSpec("sex", "block", ("sex",))
BY_RACE = TableSpec("race", "block", ("race",))
FULL = TableSpec("full", "block", ("sex", "age_bin", "race", "ethnicity"), ONE_BIN)
REGION_POP = TableSpec("region-pop", "region", ())


def random_world(rng, schema, blocks, max_block=2):
    persons = []
    k = 0
    for b in blocks:
        for _ in range(rng.randrange(0, max_block + 1)):
            cell = rng.randrange(schema.cells)
            sex, age_bin, race, eth = schema.cell_key(cell)
            lo, hi = schema.age_bins.bins[age_bin]
            persons.append(
                person(f"p{k}", b, sex=sex, age=lo, race=race, ethnicity=eth)
            )
            k += 1
    geography = tuple((b, "r0" if b != "b2" else "r1") for b in blocks)
    return Dataset(tuple(persons), geography)


def tables_for(data, specs, schema):
    return [
        tabulate(data, spec, race_levels=schema.race_levels, ethnicity_levels=schema.ethnicity_levels)
        for spec in specs
    ]


FAMILIES = [
    (POP,),
    (BY_SEX,),
    (POP, BY_SEX),
    (BY_SEX, BY_RACE),
    (REGION_POP, BY_SEX),
    (FULL,),
]


def test_solver_equals_brute_force_on_small_systems():
    rng = random.Random(61)
    for trial in range(40):
        family = FAMILIES[trial % len(FAMILIES)]
        blocks = ("b0", "b1") if trial % 2 else ("b0", "b1", "b2")
        schema = TWO_CELL_SCHEMA if len(blocks) == 3 else FOUR_CELL_SCHEMA
        data = random_world(rng, schema, blocks)
        try:
            system = build_constraints(schema, data.geography, tables_for(data, family, schema))
        except UnboundedSystemError:
            continue
        assert len(system.variables) <= 12
        found = solve_all(system)
        assert found.count_is_exact
        assert sorted(found.solutions) == brute_force_solutions(system)


def test_full_cross_tab_reconstructs_uniquely():
    rng = random.Random(62)
    for _ in range(20):
        data = random_world(rng, FOUR_CELL_SCHEMA, ("b0", "b1"), max_block=3)
        system = build_constraints(
            FOUR_CELL_SCHEMA, data.geography, tables_for(data, (FULL,), FOUR_CELL_SCHEMA)
        )
        found = solve_all(system)
        assert len(found.solutions) == 1
        (solution,) = found.solutions
        for i, (block, cell) in enumerate(system.variables):
            truth = sum(
                1 for p in data.persons_in(block) if cell_of(FOUR_CELL_SCHEMA, p) == cell
            )
            assert solution[i] == truth


@pytest.mark.parametrize("n", [0, 1, 4, 9])
def test_population_total_alone_leaves_n_plus_one_worlds(n):
    data = dataset([person(f"p{i}", "b0") for i in range(n)])
    system = build_constraints(
        TWO_CELL_SCHEMA, data.geography, tables_for(data, (POP,), TWO_CELL_SCHEMA)
    )
    found = solve_all(system)
    assert len(found.solutions) == n + 1


def test_adding_tables_never_adds_solutions():
    rng = random.Random(63)
    nested = [(POP,), (POP, BY_SEX), (POP, BY_SEX, BY_RACE), (POP, BY_SEX, BY_RACE, FULL)]
    for _ in range(10):
        data = random_world(rng, FOUR_CELL_SCHEMA, ("b0", "b1"))
        counts = []
        for family in nested:
            system = build_constraints(
                FOUR_CELL_SCHEMA, data.geography, tables_for(data, family, FOUR_CELL_SCHEMA)
            )
            counts.append(len(solve_all(system).solutions))
        assert counts == sorted(counts, reverse=True)
        solutions = solve_all(
            build_constraints(
                FOUR_CELL_SCHEMA, data.geography, tables_for(data, nested[-1], FOUR_CELL_SCHEMA)
            )
        ).solutions
        assert len(solutions) == 1


def test_uncovered_variables_are_rejected_as_unbounded():
    data = dataset([person("p0", "b0")])
    with pytest.raises(UnboundedSystemError):
        build_constraints(TWO_CELL_SCHEMA, data.geography, [])


def test_suppressed_cells_publish_nothing():
    # Four race-0 persons and one race-1: suppression hides the small cell,
    # and without a population total the hidden cell is unconstrained.
    persons = [person(f"p{i}", "b0", race=0) for i in range(4)] + [person("p4", "b0", race=1)]
    data = dataset(persons)
    table = tabulate(data, BY_RACE)
    suppressed = type(table)(
        spec=table.spec,
        cells=tuple((g, m, None if m == (1,) else c) for g, m, c in table.cells),
    )
    with pytest.raises(UnboundedSystemError):
        build_constraints(FOUR_CELL_SCHEMA, data.geography, [suppressed])
    # A population total restores a finite (but not unique) solution set.
    system = build_constraints(
        FOUR_CELL_SCHEMA, data.geography, [suppressed] + tables_for(data, (POP,), FOUR_CELL_SCHEMA)
    )
    found = solve_all(system)
    assert found.count_is_exact
    # race-1 mass is pinned to 1 in aggregate, spread over its two sex cells.
    for solution in found.solutions:
        race1 = sum(
            solution[i]
            for i, (b, c) in enumerate(system.variables)
            if FOUR_CELL_SCHEMA.cell_key(c)[2] == 1
        )
        assert race1 == 1


def test_invariants_pin_population_and_voting_age():
    persons = [
        person("p0", "b0", age=10),
        person("p1", "b0", age=40),
        person("p2", "b0", age=70),
    ]
    data = dataset(persons)
    system = build_constraints(VOTING_SCHEMA, data.geography, [], invariants=invariant_totals(data))
    found = solve_all(system)
    for solution in found.solutions:
        total = sum(solution)
        adults = sum(
            solution[i]
            for i, (b, c) in enumerate(system.variables)
            if VOTING_SCHEMA.cell_key(c)[1] == 1
        )
        assert total == 3 and adults == 2


def test_invariants_reject_straddling_age_bins():
    data = dataset([person("p0", "b0")])
    with pytest.raises(ValueError):
        build_constraints(
            TWO_CELL_SCHEMA, data.geography, [], invariants={"b0": (1, 1)}
        )


def test_variability_report_matches_direct_scan():
    data = dataset([person(f"p{i}", "b0", sex=i % 2) for i in range(3)])
    system = build_constraints(
        FOUR_CELL_SCHEMA, data.geography, tables_for(data, (POP, BY_RACE), FOUR_CELL_SCHEMA)
    )
    found = solve_all(system)
    report = variability_report(system, found)
    assert len(report) == len(system.variables)
    for i, summary in enumerate(report):
        values = [s[i] for s in found.solutions]
        assert summary.low == min(values)
        assert summary.high == max(values)
        assert summary.pinned == (min(values) == max(values))
        block, cell = system.variables[i]
        assert (summary.block, summary.cell) == (block, FOUR_CELL_SCHEMA.cell_key(cell))


def test_reconstructed_microdata_reproduces_the_tables():
    rng = random.Random(64)
    data = random_world(rng, FOUR_CELL_SCHEMA, ("b0", "b1"), max_block=3)
    tables = tables_for(data, (POP, BY_SEX, BY_RACE), FOUR_CELL_SCHEMA)
    system = build_constraints(FOUR_CELL_SCHEMA, data.geography, tables)
    found = solve_all(system)
    for solution in list(found.solutions)[:5]:
        rebuilt = microdata_from_solution(system, solution)
        for spec, table in zip((POP, BY_SEX, BY_RACE), tables):
            again = tabulate(
                rebuilt,
                spec,
                race_levels=FOUR_CELL_SCHEMA.race_levels,
                ethnicity_levels=FOUR_CELL_SCHEMA.ethnicity_levels,
            )
            assert again == table


def test_solution_cap_marks_counts_inexact():
    data = dataset([person(f"p{i}", "b0") for i in range(9)])
    system = build_constraints(
        TWO_CELL_SCHEMA, data.geography, tables_for(data, (POP,), TWO_CELL_SCHEMA)
    )
    capped = solve_all(system, solution_cap=4)
    assert not capped.count_is_exact
    assert len(capped.solutions) == 4


def test_equation_rejects_negative_totals():
    with pytest.raises(ValueError):
        Equation(label="bad", variables=(0,), total=-1)


def test_constraint_system_json_round_trip():
    data = dataset([person("p0", "b0", sex=1), person("p1", "b1")])
    system = build_constraints(
        FOUR_CELL_SCHEMA, data.geography, tables_for(data, (POP, BY_SEX), FOUR_CELL_SCHEMA)
    )
    assert constraint_system_from_json(constraint_system_to_json(system)) == system
