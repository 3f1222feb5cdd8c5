"""Why attack metrics need baselines and hygiene.

Three small exhibits: a guessing game scored by block-level credit rewards a
constant guess far beyond the guess's real prevalence; a naive percentage
change blows up on zero baselines where the arc version stays bounded; and a
leave-one-out check separates "the block told me" from "this record told me".
Run: python3 demos/06_baseline_critiques.py
"""

from fractions import Fraction

from sdlab import (
    NO_CHANGE,
    UNDEFINED,
    ConstantGuess,
    arc_pct_change,
    degenerate_exhibit,
    loo_gap,
    naive_pct_change,
    rvr_analytic,
    rvr_simulate,
)
from sdlab.worldmodel import Dataset, Person


def person(pid, block, sex=0, age=30, race=0, ethnicity=0):
    return Person(
        id=pid, block=block, sex=sex, age=age, race=race, ethnicity=ethnicity, sensitive=0
    )


# --- the inflated guessing game -------------------------------------------------

persons = []
for b, lo in (("big0", 0), ("big1", 20), ("big2", 40)):
    persons.append(person(f"{b}-star", b, sex=1, age=77))
    persons.extend(person(f"{b}-{i}", b, sex=i % 2, age=lo + i % 20) for i in range(59))
for b in ("small0", "small1"):
    persons.extend(person(f"{b}-{i}", b, sex=i % 2, age=80 + i) for i in range(20))
world = Dataset(tuple(persons), tuple((b, "r") for b in ("big0", "big1", "big2", "small0", "small1")))

total = len(world.persons)
holders = sum(1 for p in world.persons if (p.sex, p.age) == (1, 77))
strategy = ConstantGuess((1, 77), ("sex", "age"))
print(f"combo (sex=1, age=77) describes {holders} of {total} persons "
      f"({float(Fraction(holders, total)):.1%})")
print(f"anyone-in-block credit scores it at {rvr_analytic(world, strategy)} "
      f"({float(rvr_analytic(world, strategy)):.1%})")
sim = rvr_simulate(world, strategy, trials=20_000, seed=1)
print(f"simulated over {sim.trials} trials: {float(sim.hit_rate):.1%}")

exhibit = degenerate_exhibit(world, 20_000, 1, ("sex", "age"))
print(f"the same claims matched one-to-one: {exhibit.one_to_one_matches} matches, "
      f"rate {exhibit.one_to_one_rate}")

# --- percentage-change hygiene ---------------------------------------------------

print("\npercentage change on small counts (before -> after):")
for before, after in ((0, 0), (0, 5), (3, 1), (1, 3)):
    naive = naive_pct_change(before, after)
    arc = arc_pct_change(before, after)
    naive_s = "undefined" if naive is UNDEFINED else str(naive)
    arc_s = "no change" if arc is NO_CHANGE else str(arc)
    print(f"  {before} -> {after}:  naive {naive_s:>10}   arc {arc_s:>7}")
print("the arc version is antisymmetric and bounded by 200 either way")

# --- leave-one-out: block knowledge vs record knowledge -------------------------

uniform = Dataset(tuple(person(f"u{i}", "b0", race=1, ethnicity=1) for i in range(5)), (("b0", "r"),))
solo = Dataset((person("solo", "b0", race=1, ethnicity=0),), (("b0", "r"),))
print(f"\nhomogeneous block of 5: loo gap = {loo_gap(uniform).gap} "
      "(the block mode predicts each member without their record)")
print(f"singleton block: loo gap = {loo_gap(solo).gap} "
      "(remove the record and nothing predicts it)")
