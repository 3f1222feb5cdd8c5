"""Score releases under the four risk methodologies.

A nosy neighbor knows everything about three residents except the target's
race and watches releases about the block.  The methodologies ask different
questions about the same release and are allowed to disagree; inapplicable
ones say so instead of emitting a number.
Run: python3 demos/03_attacker_posteriors.py
"""

from fractions import Fraction

from sdlab import (
    AttackerModel,
    MechanismSpec,
    Microdata,
    PersonModel,
    TableSpec,
    abs_risk_with_linking,
    abs_risk_without_linking,
    apply,
    counterfactual_bayes,
    enumerate_posterior,
    marginal,
    prior_marginal,
    prior_to_posterior,
)
from sdlab.worldmodel import Dataset, Person

HALF = Fraction(1, 2)


def person(pid, race):
    return Person(id=pid, block="elm", sex=0, age=40, race=race, ethnicity=0, sensitive=0)


# Ground truth: the target really is the block's only race-1 resident.
world = Dataset(
    (person("target", 1), person("other-a", 0), person("other-b", 0)),
    (("elm", "r0"),),
)


def model(p, race_known):
    known = {"block": p.block, "sex": p.sex, "age": p.age, "ethnicity": p.ethnicity, "sensitive": 0}
    priors = {}
    if race_known:
        known["race"] = p.race
    else:
        priors["race"] = ((0, HALF), (1, HALF))
    return PersonModel(person_id=p.id, known=known, priors=priors)


attacker = AttackerModel(
    persons=tuple(model(p, race_known=(p.id != "target")) for p in world.persons),
    geography=world.geography,
)
race_table = TableSpec("race", "block", ("race",))
print(f"prior P(target is race 1) = {prior_marginal(attacker, 'target', 1, attribute='race')}")


def scores(release, label):
    print(f"\n--- {label} ---")
    posterior = enumerate_posterior(attacker, release)
    print(f"posterior P(race 1) = {marginal(posterior, 'target', 1, attribute='race')}")
    for name, report in (
        ("absolute with linking", abs_risk_with_linking(attacker, release, "target", 1, "race")),
        ("absolute without linking", abs_risk_without_linking(attacker, release, "target", 1, "race")),
        ("prior-to-posterior", prior_to_posterior(attacker, release, "target", 1, "race")),
    ):
        if not report.applicable:
            print(f"  {name:<26} not applicable: {report.notes[0]}")
            continue
        body = "  ".join(f"{k}={v}" for k, v in report.quantities)
        print(f"  {name:<26} {body}")


# An exact table pins the race: two known race-0 residents plus a count of
# one for race 1 leaves a single consistent world.
scores(apply(world, MechanismSpec(kind="Identity"), (race_table,)), "identity table")

# Noise keeps other worlds alive, so the posterior only moves partway.
noisy_spec = MechanismSpec(kind="GeometricNoise", seed=3, alpha=HALF)
scores(apply(world, noisy_spec, (race_table,)), "geometric noise, alpha 1/2")

# A released record list makes the linking methodology applicable too.
scores(
    apply(world, MechanismSpec(kind="Identity"), (Microdata(("block", "race")),)),
    "identity record list (block, race)",
)

cf = counterfactual_bayes(
    attacker,
    world,
    noisy_spec,
    (race_table,),
    "target",
    1,
    "race",
    release=apply(world, noisy_spec, (race_table,)),
)
print("\ncounterfactual accounting on the noisy table (had the target's record")
print("been absent, how much would this output's bayes factor differ?):")
for key, value in cf.quantities:
    print(f"  {key} = {value}")
