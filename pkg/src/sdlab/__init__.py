"""sdlab: a statistical disclosure limitation laboratory.

Build tiny synthetic census worlds, protect them with pluggable
mechanisms, and evaluate the releases under several disclosure-risk
methodologies, with every probability computed exactly as a rational
number so that claims can be checked by brute force.

The modules layer bottom-up:

    worldmodel   persons, schemas, synthetic worlds, microdata CSV
    tabulate     dense count tables and policy invariants
    mechanisms   protections (noise, swap, suppress, coarsen) and their
                 exact likelihoods and privacy accounting
    posterior    exact attacker posteriors over candidate worlds
    risk         the risk methodologies and tradeoff curves
    reconstruct  all-solutions integer reconstruction from tables
    reident      record linkage and confirmation against truth
    critiques    baselines and hygiene checks for attack metrics
    scenarios    stress worlds where the methodologies must disagree
    cli          file-based command-line front end
"""

from .worldmodel import (
    BLANK,
    PERSON_ATTRIBUTES,
    SCHEMA_ATTRIBUTES,
    AgeBinSystem,
    BlockSpec,
    Dataset,
    Person,
    PopulationSpec,
    Schema,
    blank_person,
    generate,
    population_spec_from_json,
    population_spec_to_json,
    read_microdata_csv,
    with_imputed,
    write_microdata_csv,
)
from .tabulate import (
    VOTING_AGE,
    Table,
    TableSpec,
    invariant_totals,
    table_from_json,
    table_to_json,
    tabulate,
)
from .mechanisms import (
    MECHANISM_KINDS,
    CompositionLedger,
    CountProduct,
    MechanismSpec,
    Microdata,
    PrivacyLoss,
    RatioBoundCheck,
    Release,
    RecordList,
    UNAVAILABLE,
    apply,
    compose,
    dp_ratio_bound_check,
    geometric_mass,
    geometric_tail_ge,
    likelihood,
    release_from_json,
    release_to_json,
)
from .posterior import (
    ENUMERATION_CAP,
    AttackerModel,
    EnumerationCapError,
    LinkagePosterior,
    PersonModel,
    WorldPosterior,
    ZeroMassError,
    attacker_model_from_json,
    attacker_model_to_json,
    enumerate_posterior,
    enumerate_worlds,
    linkage_posterior,
    marginal,
    prior_marginal,
)
from .risk import (
    RiskReport,
    TradeoffCurve,
    abs_risk_with_linking,
    abs_risk_without_linking,
    counterfactual_bayes,
    counterfactual_dataset,
    counterfactual_freq,
    invariant_counterfactual,
    prior_to_posterior,
    risk_report_from_json_obj,
    risk_report_to_json_obj,
)
from .reconstruct import (
    ConstraintSystem,
    Equation,
    SolutionSet,
    UnboundedSystemError,
    build_constraints,
    constraint_system_from_json,
    constraint_system_to_json,
    microdata_from_solution,
    solve_all,
    variability_report,
)
from .reident import (
    KeySpec,
    MatchResult,
    block_homogeneity,
    confirm_matches,
    group_rates,
    match_one_to_one,
)
from .critiques import (
    NO_CHANGE,
    UNDEFINED,
    ConstantGuess,
    ProportionalToPopulation,
    UniformOverCombos,
    arc_pct_change,
    both_zero_fraction,
    degenerate_exhibit,
    loo_gap,
    modal_baseline,
    naive_pct_change,
    rvr_analytic,
    rvr_simulate,
)
from .scenarios import (
    EXPECTED_VERDICTS,
    METHODOLOGIES,
    SCENARIO_ORDER,
    ScenarioVerdict,
    mismatches,
    render_grid,
    run_all,
)

__version__ = "0.1.0"
