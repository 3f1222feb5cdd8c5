"""Build a tiny synthetic census world and tabulate it.

Everything downstream (protection, attacks, risk scores) starts from a
Dataset like the one constructed here.  Run: python3 demos/01_tiny_census.py
"""

from fractions import Fraction

from sdlab import (
    AgeBinSystem,
    BlockSpec,
    PopulationSpec,
    Schema,
    TableSpec,
    generate,
    invariant_totals,
    tabulate,
    write_microdata_csv,
)

bins = AgeBinSystem("two-bins", ((0, 39), (40, 115)))
schema = Schema(age_bins=bins, race_levels=3, ethnicity_levels=2)

# One block is made almost homogeneous on purpose; small-area homogeneity is
# what makes disclosure interesting later.
spec = PopulationSpec(
    schema=schema,
    blocks=(BlockSpec("maple", 7, "north"), BlockSpec("oak", 5, "south")),
    attribute_distribution=tuple(Fraction(1, schema.cells) for _ in range(schema.cells)),
    homogeneity=(("oak", (0, Fraction(3, 4))),),
    seed=2026,
)

world = generate(spec)
print(f"generated {len(world.persons)} persons in blocks {world.blocks}")
print()
print(write_microdata_csv(world))

by_race = tabulate(world, TableSpec("race-by-block", "block", ("race",)))
print("race counts per block:")
for geo, margin, count in by_race.cells:
    print(f"  {geo:>6} race={margin[0]}  {count}")

by_region = tabulate(world, TableSpec("population", "region", ()))
print("\nregion totals:")
for geo, _margin, count in by_region.cells:
    print(f"  {geo:>6}  {count}")

print("\npolicy invariants (held exactly by every mechanism that honors them):")
for block, (population, voting) in invariant_totals(world).items():
    print(f"  {block:>6}  population={population}  voting_age={voting}")
