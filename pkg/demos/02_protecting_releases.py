"""Protect one world three ways and account for the privacy loss.

The same race-by-block table goes through identity publication, cell
suppression, and exact two-sided geometric noise.  Noisy releases carry a
declared worst-case likelihood-ratio bound; the composition ledger multiplies
those bounds across releases.  Run: python3 demos/02_protecting_releases.py
"""

from fractions import Fraction

from sdlab import (
    CompositionLedger,
    MechanismSpec,
    TableSpec,
    apply,
    compose,
    dp_ratio_bound_check,
    likelihood,
)
from sdlab.worldmodel import Dataset, Person


def person(pid, block, sex, race):
    return Person(id=pid, block=block, sex=sex, age=30, race=race, ethnicity=0, sensitive=0)


world = Dataset(
    (
        person("p0", "b0", 0, 0),
        person("p1", "b0", 1, 1),
        person("p2", "b0", 0, 0),
        person("p3", "b1", 1, 1),
        person("p4", "b1", 0, 0),
    ),
    (("b0", "r0"), ("b1", "r1")),
)
race_table = TableSpec("race", "block", ("race",))

identity = apply(world, MechanismSpec(kind="Identity"), (race_table,))
print("identity release publishes the table as-is:")
for geo, margin, count in identity.products[0].cells:
    print(f"  {geo} race={margin[0]}  {count}")
print(f"  likelihood of this output given the world: {likelihood(identity, world)}")

suppress = apply(world, MechanismSpec(kind="Suppress", threshold=2), (race_table,))
print("\nsuppression blanks small nonzero cells (None = withheld):")
for geo, margin, count in suppress.products[0].cells:
    print(f"  {geo} race={margin[0]}  {count}")

noisy_spec = MechanismSpec(kind="GeometricNoise", seed=7, alpha=Fraction(1, 2))
noisy = apply(world, noisy_spec, (race_table,))
print("\ngeometric noise, alpha 1/2 (counts may go negative):")
for geo, margin, count in noisy.products[0].cells:
    print(f"  {geo} race={margin[0]}  {count}")
print(f"  exact likelihood of this draw: {likelihood(noisy, world)}")
loss = noisy.privacy_loss
print(f"  declared ratio bound (1/alpha)^sensitivity = {loss.ratio_bound}, epsilon = {loss.epsilon:.4f}")

# The declared bound is checkable, not just declared: take any neighbor
# (one person removed) and compute the exact worst-case ratio over all
# possible outputs.
neighbor = world.without("p1")
check = dp_ratio_bound_check(noisy_spec, (race_table,), world, neighbor)
print(f"\nworst-case output ratio vs neighbor: {check.worst_ratio} <= {check.bound}: {check.satisfied}")

second = apply(world, MechanismSpec(kind="GeometricNoise", seed=8, alpha=Fraction(1, 3)), (race_table,))
ledger = compose(compose(CompositionLedger(), noisy, "race-v1"), second, "race-v2")
print("\ncomposition ledger across both noisy releases:")
for label, entry in ledger.entries:
    print(f"  {label}: ratio bound {entry.ratio_bound}")
print(f"  total ratio bound {ledger.total_ratio_bound} (epsilons add: {ledger.total_epsilon:.4f})")
