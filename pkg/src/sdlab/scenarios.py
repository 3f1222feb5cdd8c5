"""Stress scenarios: tiny worlds where the four risk methodologies must
agree or visibly disagree.

Each scenario builds one concrete world with a designed ground truth,
runs the methodologies it exercises, and reduces each report to a
verdict:

  pass            the methodology's flagging behavior matches the ground
                  truth built into the scenario,
  fail            it flags where nothing leaked, stays quiet where
                  something did, or changes its answer between attackers
                  who saw the same release,
  not_applicable  the release gives the methodology nothing to score, or
                  the scenario asserts nothing about it.

Flag thresholds are module constants chosen once: a joint posterior of at
least HIGH_RISK_POSTERIOR is "high risk", a prior-to-posterior move of at
least PR2P_FLAG_DIFF is "belief moved", and a counterfactual ratio of at
least CF_FLAG_RATIO (or an unbounded one) means "presence mattered".
Every quantity is an exact rational, so run_all(seed) is reproducible
bit for bit and the expected verdict grid can be asserted outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .mechanisms import (
    CompositionLedger,
    MechanismSpec,
    Microdata,
    apply,
    compose,
    dp_ratio_bound_check,
)
from .posterior import AttackerModel, PersonModel, enumerate_posterior, marginal
from .rational import format_fraction, parse_fraction
from .reconstruct import UnboundedSystemError, build_constraints, solve_all
from .risk import (
    RiskReport,
    _exponent_pmf,
    abs_risk_with_linking,
    abs_risk_without_linking,
    counterfactual_bayes,
    prior_to_posterior,
)
from .rng import subseed
from .tabulate import TableSpec
from .worldmodel import (
    PERSON_ATTRIBUTES,
    SCHEMA_ATTRIBUTES,
    AgeBinSystem,
    Dataset,
    Person,
    Schema,
)

__all__ = [
    "METHODOLOGIES",
    "PASS",
    "FAIL",
    "NOT_APPLICABLE",
    "HIGH_RISK_POSTERIOR",
    "PR2P_FLAG_DIFF",
    "CF_FLAG_RATIO",
    "SCENARIO_ORDER",
    "EXPECTED_VERDICTS",
    "ScenarioVerdict",
    "scenario_uninformative",
    "scenario_reconstruction_clones",
    "scenario_generalizable_region",
    "scenario_composition",
    "scenario_multiple_attackers",
    "scenario_brittleness",
    "run_all",
    "mismatches",
    "render_grid",
    "scenario_verdict_to_json_obj",
    "scenario_verdict_from_json_obj",
]

# Column order for every verdict tuple in this module.
METHODOLOGIES = ("abs_link", "abs", "prior_to_posterior", "counterfactual_bayes")

PASS = "pass"
FAIL = "fail"
NOT_APPLICABLE = "not_applicable"
_VERDICT_VALUES = (PASS, FAIL, NOT_APPLICABLE)

HIGH_RISK_POSTERIOR = Fraction(1, 2)
PR2P_FLAG_DIFF = Fraction(1, 4)
CF_FLAG_RATIO = Fraction(2)


@dataclass(frozen=True)
class ScenarioVerdict:
    """One scenario's outcome: verdict per methodology plus the receipts."""

    scenario: str
    title: str
    verdicts: tuple[str, ...]
    expected: tuple[str, ...]
    evidence: tuple[tuple[str, object], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "verdicts", tuple(self.verdicts))
        object.__setattr__(self, "expected", tuple(self.expected))
        object.__setattr__(self, "evidence", tuple((str(k), v) for k, v in self.evidence))
        for tup in (self.verdicts, self.expected):
            if len(tup) != len(METHODOLOGIES):
                raise ValueError("verdict tuples must cover every methodology")
            for v in tup:
                if v not in _VERDICT_VALUES:
                    raise ValueError(f"unknown verdict {v!r}")

    @property
    def matches_expected(self) -> bool:
        return self.verdicts == self.expected

    def verdict_for(self, methodology: str) -> str:
        return self.verdicts[METHODOLOGIES.index(methodology)]

    def q(self, name: str):
        for k, v in self.evidence:
            if k == name:
                return v
        raise KeyError(name)


# --- flag predicates and verdict reductions ----------------------------------


def _flag_high(posterior: Fraction) -> bool:
    return posterior >= HIGH_RISK_POSTERIOR


def _flag_move(diff: Fraction) -> bool:
    return abs(diff) >= PR2P_FLAG_DIFF


def _flag_ratio(ratio: Fraction | None) -> bool:
    return ratio is None or ratio >= CF_FLAG_RATIO


def _verdict(flagged: bool, disclosure: bool) -> str:
    """Correct methodologies flag exactly when the scenario leaks."""
    return PASS if flagged == disclosure else FAIL


def _uniform_verdict(flag_a: bool, flag_b: bool) -> str:
    """Two attackers saw the same release; the flag must not depend on which."""
    return PASS if flag_a == flag_b else FAIL


def _link_verdict(report: RiskReport, disclosure: bool) -> str:
    if not report.applicable:
        return NOT_APPLICABLE
    return _verdict(_flag_high(report.q("max_joint")), disclosure)


# --- world building helpers ---------------------------------------------------


def _person(
    pid: str,
    block: str,
    sex: int = 0,
    age: int = 30,
    race: int = 0,
    ethnicity: int = 0,
    sensitive: int = 0,
) -> Person:
    return Person(
        id=pid, block=block, sex=sex, age=age, race=race, ethnicity=ethnicity, sensitive=sensitive
    )


def _model(
    person: Person,
    unknown: Mapping[str, tuple[tuple[object, Fraction], ...]] | None = None,
    inclusion: Fraction = Fraction(1),
) -> PersonModel:
    """Attacker entry that knows everything about `person` except `unknown`."""
    unknown = dict(unknown or {})
    known = {a: person.attribute(a) for a in PERSON_ATTRIBUTES if a not in unknown}
    return PersonModel(
        person_id=person.id,
        known=tuple(known.items()),
        priors=tuple(unknown.items()),
        inclusion=inclusion,
    )


UNIFORM2 = ((0, Fraction(1, 2)), (1, Fraction(1, 2)))


# --- the scenarios -------------------------------------------------------------


def scenario_uninformative(seed: int = 42) -> ScenarioVerdict:
    """A noisy national total moves nobody's beliefs, yet a 9/10 prior alone
    trips the high-posterior alarm.

    Three residents, everything known to the attacker except the target's
    race, prior 9/10 on the modal value.  The release perturbs the national
    population count, which is identical in every candidate world, so the
    posterior equals the prior exactly.  Verdicts score against ground
    truth "nothing leaked".  Two controls go into the evidence: an identity
    release that does move beliefs, and the low-prior value of the same
    posterior, which shows the absolute verdict is the prior restated.
    """
    geo = (("b0", "R0"),)
    target = _person("u0", "b0", age=30, race=1)
    others = (_person("u1", "b0", age=40), _person("u2", "b0", sex=1, age=50))
    truth = Dataset((target,) + others, geo)
    race_prior = ((0, Fraction(1, 10)), (1, Fraction(9, 10)))
    attacker = AttackerModel(
        persons=(_model(target, {"race": race_prior}), _model(others[0]), _model(others[1])),
        geography=geo,
    )
    spec = MechanismSpec(
        kind="PerturbedTotal", seed=subseed(seed, "scn:uninformative"), alpha=Fraction(1, 2)
    )
    release = apply(truth, spec, ())

    link_rep = abs_risk_with_linking(attacker, release, "u0", 1, attribute="race")
    abs_rep = abs_risk_without_linking(attacker, release, "u0", 1, attribute="race")
    p2p = prior_to_posterior(attacker, release, "u0", 1, attribute="race")
    cf = counterfactual_bayes(attacker, truth, spec, (), "u0", 1, attribute="race", mode="average")
    cf_real = counterfactual_bayes(
        attacker, truth, spec, (), "u0", 1, attribute="race", mode="realized", release=release
    )

    identity = apply(truth, MechanismSpec(kind="Identity"), (Microdata(SCHEMA_ATTRIBUTES),))
    p2p_control = prior_to_posterior(attacker, identity, "u0", 1, attribute="race")
    abs_low = abs_risk_without_linking(attacker, release, "u0", 0, attribute="race")

    verdicts = (
        _link_verdict(link_rep, disclosure=False),
        _verdict(_flag_high(abs_rep.q("posterior")), disclosure=False),
        _verdict(_flag_move(p2p.q("diff")), disclosure=False),
        _verdict(_flag_ratio(cf.q("ratio")), disclosure=False),
    )
    evidence = (
        ("abs_posterior", abs_rep.q("posterior")),
        ("pr2p_diff", p2p.q("diff")),
        ("cf_ratio", cf.q("ratio")),
        ("cf_worst_output_ratio", cf_real.q("worst_output_ratio")),
        ("cf_within_declared_bound", cf_real.q("within_declared_bound")),
        ("pr2p_diff_identity_control", p2p_control.q("diff")),
        ("abs_posterior_low_prior_value", abs_low.q("posterior")),
    )
    return ScenarioVerdict(
        scenario="uninformative",
        title="Uninformative Statistics",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["uninformative"],
        evidence=evidence,
    )


def scenario_reconstruction_clones(seed: int = 42, clones: int = 4) -> ScenarioVerdict:
    """Perfectly reconstructed microdata of k indistinguishable residents.

    All k share every released attribute and, in truth, the same race, which
    the attacker holds a uniform prior on.  The identity release pins every
    resident's race (real disclosure), but any record-linkage accounting
    divides the harm by k: the best joint link-and-value probability is 1/k.
    The singleton control shows the discount vanishing at k = 1.
    """
    geo = (("b0", "R0"),)
    persons = tuple(_person(f"c{i}", "b0", age=30, race=1) for i in range(clones))
    truth = Dataset(persons, geo)
    attacker = AttackerModel(
        persons=tuple(_model(p, {"race": UNIFORM2}) for p in persons), geography=geo
    )
    spec = MechanismSpec(kind="Identity")
    targets = (Microdata(SCHEMA_ATTRIBUTES),)
    release = apply(truth, spec, targets)

    link_rep = abs_risk_with_linking(attacker, release, "c0", 1, attribute="race")
    abs_rep = abs_risk_without_linking(attacker, release, "c0", 1, attribute="race")
    p2p = prior_to_posterior(attacker, release, "c0", 1, attribute="race")
    cf = counterfactual_bayes(
        attacker, truth, spec, targets, "c0", 1, attribute="race", mode="average"
    )

    single = Dataset((persons[0],), geo)
    single_attacker = AttackerModel(
        persons=(_model(persons[0], {"race": UNIFORM2}),), geography=geo
    )
    single_link = abs_risk_with_linking(
        single_attacker, apply(single, spec, targets), "c0", 1, attribute="race"
    )

    verdicts = (
        _link_verdict(link_rep, disclosure=True),
        _verdict(_flag_high(abs_rep.q("posterior")), disclosure=True),
        _verdict(_flag_move(p2p.q("diff")), disclosure=True),
        _verdict(_flag_ratio(cf.q("ratio")), disclosure=True),
    )
    evidence = (
        ("clones", clones),
        ("abslink_max_joint", link_rep.q("max_joint")),
        ("abs_posterior", abs_rep.q("posterior")),
        ("pr2p_diff", p2p.q("diff")),
        ("cf_ratio", cf.q("ratio")),
        ("abslink_max_joint_single", single_link.q("max_joint")),
    )
    return ScenarioVerdict(
        scenario="reconstruction_clones",
        title="Avoiding Reconstruction",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["reconstruction_clones"],
        evidence=evidence,
    )


def scenario_generalizable_region(seed: int = 42) -> ScenarioVerdict:
    """Population-level inference dressed up as individual disclosure.

    Ten residents, races unknown with prior 89/100 on the modal value; the
    release is a region race table plus raceless records.  The target's
    posterior lands at 9/10: a hair above the population rate and entirely
    explained by it, as the absent-target variant in the evidence shows.
    Ground truth is "nothing leaked about the individual", so methodologies
    keyed to the posterior's level flag spuriously, while movement- and
    counterfactual-based ones stay quiet.
    """
    geo = (("bo", "R0"), ("bt", "R0"))
    race_prior = ((0, Fraction(89, 100)), (1, Fraction(11, 100)))
    target = _person("g0", "bt", age=40, race=0)
    others = tuple(
        _person(f"g{i}", "bo", age=40, race=(1 if i == 9 else 0)) for i in range(1, 10)
    )
    truth = Dataset((target,) + others, geo)
    attacker = AttackerModel(
        persons=tuple(_model(p, {"race": race_prior}) for p in (target,) + others),
        geography=geo,
    )
    spec = MechanismSpec(kind="Identity")
    targets = (
        TableSpec(name="race-by-region", group_by="region", margin=("race",)),
        Microdata(("block", "sex", "age")),
    )
    release = apply(truth, spec, targets)

    link_rep = abs_risk_with_linking(attacker, release, "g0", 0, attribute="race")
    abs_rep = abs_risk_without_linking(attacker, release, "g0", 0, attribute="race")
    p2p = prior_to_posterior(attacker, release, "g0", 0, attribute="race")
    cf = counterfactual_bayes(
        attacker, truth, spec, targets, "g0", 0, attribute="race", mode="average"
    )

    # Same release computed from a world the target was never in: the
    # attacker's belief about them stays at the prior.
    absent_truth = Dataset(others, geo)
    absent_attacker = AttackerModel(
        persons=(_model(target, {"race": race_prior}, inclusion=Fraction(0)),)
        + tuple(_model(p, {"race": race_prior}) for p in others),
        geography=geo,
    )
    absent_post = enumerate_posterior(absent_attacker, apply(absent_truth, spec, targets))
    absent_marginal = marginal(absent_post, "g0", 0, "race", require_inclusion=False)

    verdicts = (
        _link_verdict(link_rep, disclosure=False),
        _verdict(_flag_high(abs_rep.q("posterior")), disclosure=False),
        _verdict(_flag_move(p2p.q("diff")), disclosure=False),
        _verdict(_flag_ratio(cf.q("ratio")), disclosure=False),
    )
    evidence = (
        ("prior", Fraction(89, 100)),
        ("abs_posterior", abs_rep.q("posterior")),
        ("abslink_max_joint", link_rep.q("max_joint")),
        ("pr2p_diff", p2p.q("diff")),
        ("cf_ratio", cf.q("ratio")),
        ("absent_target_posterior", absent_marginal),
    )
    return ScenarioVerdict(
        scenario="generalizable_region",
        title="Generalizable Inference",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["generalizable_region"],
        evidence=evidence,
    )


def scenario_composition(seed: int = 42) -> ScenarioVerdict:
    """Two releases at once: noise composes by multiplying ratio bounds,
    suppression does not compose at all.

    Part one runs two independent geometric releases of the same block
    count and checks, exhaustively over likelihood-ratio classes, that the
    realized joint ratio never exceeds the composition ledger's product
    bound and actually attains it.  Part two releases two individually
    harmless suppressed tables whose union pins the suppressed cell, shown
    with the constraint solver: unbounded from either release alone,
    pinned to a single value from both.  Only the counterfactual bound is
    asserted; the other columns carry no verdict here.
    """
    geo = (("b0", "R0"),)
    persons = tuple(
        _person(f"k{i}", "b0", age=30 + i, race=(1 if i == 4 else 0)) for i in range(5)
    )
    truth = Dataset(persons, geo)
    neighbor = truth.without("k4")
    pop_target = (TableSpec(name="block-pop", group_by="block", margin=()),)
    spec1 = MechanismSpec(
        kind="GeometricNoise", seed=subseed(seed, "scn:comp:1"), alpha=Fraction(1, 2)
    )
    spec2 = MechanismSpec(
        kind="GeometricNoise", seed=subseed(seed, "scn:comp:2"), alpha=Fraction(1, 2)
    )
    rel1 = apply(truth, spec1, pop_target)
    rel2 = apply(truth, spec2, pop_target)

    check1 = dp_ratio_bound_check(spec1, pop_target, truth, neighbor)
    check2 = dp_ratio_bound_check(spec2, pop_target, truth, neighbor)
    ledger = compose(compose(CompositionLedger(), rel1, "first"), rel2, "second")

    # The joint output's likelihood ratio is the product of per-release
    # ratios alpha**e; enumerate every (e1, e2) class pair.
    gap = abs(len(truth.persons) - len(neighbor.persons))
    pmf1 = _exponent_pmf(gap, spec1.alpha)
    pmf2 = _exponent_pmf(gap, spec2.alpha)
    assert sum(pmf1.values()) == 1 and sum(pmf2.values()) == 1
    joint_ratios = [
        spec1.alpha**e1 * spec2.alpha**e2 for e1 in sorted(pmf1) for e2 in sorted(pmf2)
    ]
    joint_worst = max(joint_ratios)
    within = all(r <= ledger.total_ratio_bound for r in joint_ratios)

    # Complementary release pair: a race table with its small cell withheld,
    # and the bare block population.  Neither alone bounds the withheld
    # count; subtraction across the pair pins it.
    sschema = Schema(
        age_bins=AgeBinSystem(name="all-ages", bins=((0, 115),)),
        race_levels=2,
        ethnicity_levels=1,
    )
    sup = MechanismSpec(kind="Suppress", threshold=3)
    rel_race = apply(truth, sup, (TableSpec(name="race", group_by="block", margin=("race",)),))
    rel_pop = apply(truth, sup, pop_target)
    try:
        solve_all(build_constraints(sschema, geo, list(rel_race.products)))
        alone_unbounded = False
    except UnboundedSystemError:
        alone_unbounded = True
    union_system = build_constraints(
        sschema, geo, list(rel_race.products) + list(rel_pop.products)
    )
    union = solve_all(union_system)
    race1_values = sorted(
        {
            sum(
                s[i]
                for i, (_, cell) in enumerate(union_system.variables)
                if sschema.cell_key(cell)[2] == 1
            )
            for s in union.solutions
        }
    )

    cf_ok = (
        check1.satisfied
        and check2.satisfied
        and within
        and joint_worst == ledger.total_ratio_bound
    )
    verdicts = (
        NOT_APPLICABLE,
        NOT_APPLICABLE,
        NOT_APPLICABLE,
        PASS if cf_ok else FAIL,
    )
    evidence = (
        ("per_release_ratio_bound", check1.bound),
        ("per_release_worst_ratio", check1.worst_ratio),
        ("second_release_worst_ratio", check2.worst_ratio),
        ("ledger_ratio_bound", ledger.total_ratio_bound),
        ("joint_worst_ratio", joint_worst),
        ("joint_within_ledger_bound", within),
        ("suppressed_alone_unbounded", alone_unbounded),
        ("suppressed_union_solutions", union.count),
        ("suppressed_union_small_cell_values", tuple(race1_values)),
        ("unasserted_methodologies", ("abs_link", "abs", "prior_to_posterior")),
    )
    return ScenarioVerdict(
        scenario="composition",
        title="Composition",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["composition"],
        evidence=evidence,
    )


def scenario_multiple_attackers(seed: int = 42) -> ScenarioVerdict:
    """One release, two attackers; a sound verdict cannot depend on which.

    The release is identity microdata without the sensitive attribute, so
    it teaches nobody anything about it.  A well-informed neighbor starts
    at 9/10, a diffuse outsider at 1/3.  Posterior-level methodologies flag
    for the neighbor and not for the outsider; movement- and counterfactual-
    based ones answer identically for both.
    """
    geo = (("b0", "R0"),)
    persons = tuple(
        _person(f"m{i}", "b0", age=30 + 10 * i, sensitive=(1 if i == 0 else 0))
        for i in range(3)
    )
    truth = Dataset(persons, geo)
    spec = MechanismSpec(kind="Identity")
    targets = (Microdata(SCHEMA_ATTRIBUTES),)
    release = apply(truth, spec, targets)

    neighbor_prior = ((0, Fraction(1, 20)), (1, Fraction(9, 10)), (2, Fraction(1, 20)))
    diffuse_prior = ((0, Fraction(1, 3)), (1, Fraction(1, 3)), (2, Fraction(1, 3)))
    neighbor = AttackerModel(
        persons=(
            _model(persons[0], {"sensitive": neighbor_prior}),
            _model(persons[1]),
            _model(persons[2]),
        ),
        geography=geo,
    )
    diffuse = AttackerModel(
        persons=tuple(_model(p, {"sensitive": diffuse_prior}) for p in persons), geography=geo
    )

    def reports(attacker: AttackerModel):
        return (
            abs_risk_with_linking(attacker, release, "m0", 1),
            abs_risk_without_linking(attacker, release, "m0", 1),
            prior_to_posterior(attacker, release, "m0", 1),
            counterfactual_bayes(attacker, truth, spec, targets, "m0", 1, mode="average"),
        )

    link_n, abs_n, p2p_n, cf_n = reports(neighbor)
    link_d, abs_d, p2p_d, cf_d = reports(diffuse)

    verdicts = (
        _uniform_verdict(
            _flag_high(link_n.q("max_joint")), _flag_high(link_d.q("max_joint"))
        ),
        _uniform_verdict(
            _flag_high(abs_n.q("posterior")), _flag_high(abs_d.q("posterior"))
        ),
        _uniform_verdict(_flag_move(p2p_n.q("diff")), _flag_move(p2p_d.q("diff"))),
        _uniform_verdict(_flag_ratio(cf_n.q("ratio")), _flag_ratio(cf_d.q("ratio"))),
    )
    evidence = (
        ("abslink_max_joint_neighbor", link_n.q("max_joint")),
        ("abslink_max_joint_diffuse", link_d.q("max_joint")),
        ("abs_posterior_neighbor", abs_n.q("posterior")),
        ("abs_posterior_diffuse", abs_d.q("posterior")),
        ("pr2p_diff_neighbor", p2p_n.q("diff")),
        ("pr2p_diff_diffuse", p2p_d.q("diff")),
        ("cf_ratio_neighbor", cf_n.q("ratio")),
        ("cf_ratio_diffuse", cf_d.q("ratio")),
    )
    return ScenarioVerdict(
        scenario="multiple_attackers",
        title="Multiple Attackers",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["multiple_attackers"],
        evidence=evidence,
    )


def scenario_brittleness(seed: int = 42) -> ScenarioVerdict:
    """Side knowledge arrives: suppression shatters, calibrated noise bends.

    A block of three publishes its race table with cells under 3 withheld.
    Against an attacker who learned the other two residents' records, the
    withheld pattern identifies the target's race outright (posterior 1,
    counterfactual unbounded), while the no-side-knowledge control stays at
    1/2.  The same world under geometric noise keeps its promised ratio
    bound against the very same conditioned attacker, checked as an exact
    sup over the whole output space.
    """
    geo = (("b0", "R0"),)
    target = _person("r0", "b0", age=30, race=1)
    others = (_person("r1", "b0", age=40), _person("r2", "b0", age=50))
    truth = Dataset((target,) + others, geo)
    race_table = (TableSpec(name="race-by-block", group_by="block", margin=("race",)),)
    conditioned = AttackerModel(
        persons=(_model(target, {"race": UNIFORM2}), _model(others[0]), _model(others[1])),
        geography=geo,
    )
    no_reveal = AttackerModel(
        persons=tuple(_model(p, {"race": UNIFORM2}) for p in (target,) + others),
        geography=geo,
    )

    sup_spec = MechanismSpec(kind="Suppress", threshold=3)
    sup_release = apply(truth, sup_spec, race_table)

    link_rep = abs_risk_with_linking(conditioned, sup_release, "r0", 1, attribute="race")
    abs_cond = abs_risk_without_linking(conditioned, sup_release, "r0", 1, attribute="race")
    abs_ctrl = abs_risk_without_linking(no_reveal, sup_release, "r0", 1, attribute="race")
    p2p = prior_to_posterior(conditioned, sup_release, "r0", 1, attribute="race")
    cf_sup = counterfactual_bayes(
        conditioned,
        truth,
        sup_spec,
        race_table,
        "r0",
        1,
        attribute="race",
        mode="realized",
        release=sup_release,
    )
    geo_spec = MechanismSpec(
        kind="GeometricNoise", seed=subseed(seed, "scn:brittle"), alpha=Fraction(1, 2)
    )
    cf_geo = counterfactual_bayes(
        conditioned, truth, geo_spec, race_table, "r0", 1, attribute="race", mode="realized"
    )

    cf_ok = (
        _flag_ratio(cf_sup.q("ratio"))
        and not _flag_ratio(cf_geo.q("worst_output_ratio"))
        and cf_geo.q("within_declared_bound")
    )
    verdicts = (
        NOT_APPLICABLE if not link_rep.applicable else _link_verdict(link_rep, disclosure=True),
        _verdict(_flag_high(abs_cond.q("posterior")), disclosure=True),
        _verdict(_flag_move(p2p.q("diff")), disclosure=True),
        PASS if cf_ok else FAIL,
    )
    evidence = (
        ("abs_posterior_conditioned", abs_cond.q("posterior")),
        ("abs_posterior_no_reveal", abs_ctrl.q("posterior")),
        ("pr2p_diff", p2p.q("diff")),
        ("cf_suppress_ratio", cf_sup.q("ratio")),
        ("cf_geometric_worst_output_ratio", cf_geo.q("worst_output_ratio")),
        ("cf_geometric_declared_bound", cf_geo.q("declared_ratio_bound")),
        ("cf_geometric_within_bound", cf_geo.q("within_declared_bound")),
    )
    return ScenarioVerdict(
        scenario="brittleness",
        title="Resists Brittleness",
        verdicts=verdicts,
        expected=EXPECTED_VERDICTS["brittleness"],
        evidence=evidence,
    )


# --- the grid -------------------------------------------------------------------


SCENARIO_ORDER = (
    "uninformative",
    "reconstruction_clones",
    "generalizable_region",
    "composition",
    "multiple_attackers",
    "brittleness",
)

EXPECTED_VERDICTS: dict[str, tuple[str, str, str, str]] = {
    "uninformative": (NOT_APPLICABLE, FAIL, PASS, PASS),
    "reconstruction_clones": (FAIL, PASS, PASS, PASS),
    "generalizable_region": (FAIL, FAIL, PASS, PASS),
    "composition": (NOT_APPLICABLE, NOT_APPLICABLE, NOT_APPLICABLE, PASS),
    "multiple_attackers": (FAIL, FAIL, PASS, PASS),
    "brittleness": (NOT_APPLICABLE, PASS, PASS, PASS),
}

_RUNNERS: dict[str, Callable[[int], ScenarioVerdict]] = {
    "uninformative": scenario_uninformative,
    "reconstruction_clones": scenario_reconstruction_clones,
    "generalizable_region": scenario_generalizable_region,
    "composition": scenario_composition,
    "multiple_attackers": scenario_multiple_attackers,
    "brittleness": scenario_brittleness,
}


def run_all(seed: int = 42) -> tuple[ScenarioVerdict, ...]:
    """Every scenario, in grid order, at one master seed."""
    return tuple(_RUNNERS[name](seed) for name in SCENARIO_ORDER)


def mismatches(verdicts: Sequence[ScenarioVerdict]) -> tuple[str, ...]:
    return tuple(v.scenario for v in verdicts if not v.matches_expected)


_LETTER = {PASS: "y", FAIL: "n", NOT_APPLICABLE: "NA"}


def render_grid(verdicts: Sequence[ScenarioVerdict]) -> str:
    """Fixed-width text grid, one scenario per row, one methodology per column.

    y means the methodology behaved correctly in that scenario, n that it
    did not, NA that the scenario asserts nothing about it.
    """
    headers = ["scenario"] + list(METHODOLOGIES) + ["expected", "ok"]
    rows = []
    for v in verdicts:
        letters = [_LETTER[x] for x in v.verdicts]
        expected = "/".join(_LETTER[x] for x in v.expected)
        rows.append([v.title] + letters + [expected, "yes" if v.matches_expected else "NO"])
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    for r in rows:
        lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)))
    return "\n".join(lines) + "\n"


# --- serialization ---------------------------------------------------------------


def _ev_to_json(v):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, tuple):
        return [_ev_to_json(x) for x in v]
    raise TypeError(f"cannot serialize evidence value {v!r}")


def _ev_from_json(v):
    if isinstance(v, str):
        try:
            return parse_fraction(v)
        except ValueError:
            return v
    if isinstance(v, list):
        return tuple(_ev_from_json(x) for x in v)
    return v


def scenario_verdict_to_json_obj(verdict: ScenarioVerdict) -> dict:
    return {
        "scenario": verdict.scenario,
        "title": verdict.title,
        "methodologies": list(METHODOLOGIES),
        "verdicts": list(verdict.verdicts),
        "expected": list(verdict.expected),
        "matches_expected": verdict.matches_expected,
        "evidence": [[k, _ev_to_json(v)] for k, v in verdict.evidence],
    }


def scenario_verdict_from_json_obj(obj: Mapping) -> ScenarioVerdict:
    return ScenarioVerdict(
        scenario=obj["scenario"],
        title=obj["title"],
        verdicts=tuple(obj["verdicts"]),
        expected=tuple(obj["expected"]),
        evidence=tuple((k, _ev_from_json(v)) for k, v in obj.get("evidence", [])),
    )


def verdicts_to_json(verdicts: Sequence[ScenarioVerdict]) -> str:
    return json.dumps([scenario_verdict_to_json_obj(v) for v in verdicts], indent=2) + "\n"
