"""Disclosure-risk evaluation of a release, under four methodologies.

Every methodology answers "how much did this release expose person X's
attribute?" but against a different yardstick:

    abs_risk_with_linking     max over released record slots of the joint
                              probability "slot belongs to X and X's
                              attribute equals v" (record releases only).
    abs_risk_without_linking  joint posterior "X participated and X's
                              attribute equals v", no record linking.
    prior_to_posterior        how far the release moved the attacker's
                              belief from the prior (difference or ratio).
    counterfactual_bayes      the same posterior compared against a world
                              where X's record was removed or blanked.
    counterfactual_freq       the frequentist companion: the exact power
                              curve of the best test distinguishing the
                              actual data from the counterfactual.
    invariant_counterfactual  worst-case detectability of any alteration
                              of X's record that preserves X's region.

All probabilities are exact rationals; noisy mechanisms are handled by
decomposing the infinite output space into finitely many classes on which
every relevant likelihood ratio is constant, with closed-form tail masses.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .mechanisms import (
    MechanismSpec,
    Release,
    Table,
    Target,
    UNAVAILABLE,
    apply,
    dp_ratio_bound_check,
    geometric_mass,
    geometric_tail_ge,
    likelihood,
)
from .posterior import (
    AttackerModel,
    CandidateWorld,
    ENUMERATION_CAP,
    EnumerationCapError,
    ZeroMassError,
    enumerate_posterior,
    enumerate_worlds,
    linkage_posterior,
    marginal,
    prior_marginal,
    _world_attr,
)
from .rational import format_fraction, parse_fraction
from .tabulate import TableSpec, tabulate
from .worldmodel import Dataset, PERSON_ATTRIBUTES, Person, blank_person

__all__ = [
    "RiskReport",
    "TradeoffCurve",
    "CLASS_CAP",
    "ALTERATION_CAP",
    "counterfactual_dataset",
    "abs_risk_with_linking",
    "abs_risk_without_linking",
    "prior_to_posterior",
    "counterfactual_bayes",
    "counterfactual_freq",
    "invariant_counterfactual",
    "risk_report_to_json_obj",
    "risk_report_from_json_obj",
]

# Cap on output classes enumerated for one noisy release (product over cells
# of the count range plus two tails).
CLASS_CAP = 20000

# Cap on region-preserving record alterations examined by the invariant check.
ALTERATION_CAP = 100000

_DETERMINISTIC_KINDS = ("Identity", "Coarsen", "Suppress")
_NOISY_KINDS = ("GeometricNoise", "PerturbedTotal")


@dataclass(frozen=True)
class RiskReport:
    """One methodology's verdict on one (person, attribute value) question.

    quantities is a name -> value list; values are exact Fractions, ints,
    nested tuples, or None where a ratio is unbounded.  applicable=False
    means the methodology has nothing to say about this release (for
    example, record linkage against a release with no record list), which
    is different from measuring zero risk.
    """

    methodology: str
    person_id: str
    value: object
    attribute: str = "sensitive"
    quantities: tuple[tuple[str, object], ...] = ()
    mode: str | None = None
    convention: str | None = None
    applicable: bool = True
    notes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "quantities", tuple((str(k), v) for k, v in self.quantities))
        object.__setattr__(self, "notes", tuple(self.notes))

    def q(self, name: str):
        for k, v in self.quantities:
            if k == name:
                return v
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(k == name for k, _ in self.quantities)

    @classmethod
    def not_applicable(
        cls, methodology: str, person_id: str, value, attribute: str, reason: str
    ) -> "RiskReport":
        return cls(
            methodology=methodology,
            person_id=person_id,
            value=value,
            attribute=attribute,
            applicable=False,
            notes=(reason,),
        )


# --- absolute-risk methodologies ---------------------------------------------


def abs_risk_with_linking(
    attacker: AttackerModel,
    release: Release,
    person_id: str,
    value,
    attribute: str = "sensitive",
    cap: int = ENUMERATION_CAP,
) -> RiskReport:
    """Max over released record slots of P(slot is X and X's attribute = v).

    Only defined when the release contains exactly one record list with
    per-person deterministic records; anything else is reported as not
    applicable rather than as zero risk.
    """
    try:
        link = linkage_posterior(attacker, release, cap)
    except (ZeroMassError, EnumerationCapError):
        raise
    except ValueError as err:
        return RiskReport.not_applicable("abs_link", person_id, value, attribute, str(err))

    per_slot = tuple(
        link.joint(slot, person_id, value, attribute) for slot in range(len(link.records))
    )
    best = max(per_slot, default=Fraction(0))
    best_slot = per_slot.index(best) if per_slot else None
    return RiskReport(
        methodology="abs_link",
        person_id=person_id,
        value=value,
        attribute=attribute,
        quantities=(
            ("max_joint", best),
            ("record_slot", best_slot),
            ("per_record", per_slot),
        ),
    )


def abs_risk_without_linking(
    attacker: AttackerModel,
    release: Release,
    person_id: str,
    value,
    attribute: str = "sensitive",
    cap: int = ENUMERATION_CAP,
) -> RiskReport:
    """Joint posterior P(X participated and X's attribute = v | release)."""
    post = enumerate_posterior(attacker, release, cap)
    joint = marginal(post, person_id, value, attribute, require_inclusion=True)
    prior = prior_marginal(attacker, person_id, value, attribute, require_inclusion=True)
    return RiskReport(
        methodology="abs",
        person_id=person_id,
        value=value,
        attribute=attribute,
        quantities=(("posterior", joint), ("prior", prior)),
    )


def prior_to_posterior(
    attacker: AttackerModel,
    release: Release,
    person_id: str,
    value,
    attribute: str = "sensitive",
    mode: str = "diff",
    require_inclusion: bool = True,
    cap: int = ENUMERATION_CAP,
) -> RiskReport:
    """Belief movement caused by the release: posterior - prior, or their ratio.

    Ratio mode requires a strictly positive prior.
    """
    if mode not in ("diff", "ratio"):
        raise ValueError(f"unknown prior-to-posterior mode {mode!r}")
    post = enumerate_posterior(attacker, release, cap)
    after = marginal(post, person_id, value, attribute, require_inclusion=require_inclusion)
    before = prior_marginal(attacker, person_id, value, attribute, require_inclusion=require_inclusion)
    quantities: list[tuple[str, object]] = [("prior", before), ("posterior", after)]
    if mode == "diff":
        quantities.append(("diff", after - before))
    else:
        if before == 0:
            raise ValueError("ratio mode needs a positive prior")
        quantities.append(("ratio", after / before))
    return RiskReport(
        methodology="prior_to_posterior",
        person_id=person_id,
        value=value,
        attribute=attribute,
        mode=mode,
        quantities=tuple(quantities),
    )


# --- counterfactual transforms ------------------------------------------------


def counterfactual_dataset(data: Dataset, person_id: str, convention: str) -> Dataset:
    """The world in which person_id's record was never usable.

    removal: the person never responded; every count they touched drops.
    blank:   the row stays (same block, so pure population totals hold) but
             every attribute value is wiped.
    """
    if convention == "removal":
        return data.without(person_id)
    if convention == "blank":
        return data.replace_person(blank_person(data.person(person_id)))
    raise ValueError(f"unknown counterfactual convention {convention!r}")


def _transform_for(convention: str, person_id: str) -> Callable[[Dataset], Dataset]:
    if convention == "actual":
        return lambda d: d
    if convention not in ("removal", "blank"):
        raise ValueError(f"unknown counterfactual convention {convention!r}")

    def transform(d: Dataset) -> Dataset:
        # Worlds that never contained the person are their own counterfactual.
        if not any(p.id == person_id for p in d.persons):
            return d
        return counterfactual_dataset(d, person_id, convention)

    return transform


def _event_for(attacker: AttackerModel, person_id: str, value, attribute: str):
    """Fraction-valued event "X's attribute equals v" over candidate worlds.

    In worlds where X is absent the release carries no information about
    X's value, so such worlds contribute the prior belief.
    """
    model = attacker.person(person_id)

    def event(world: CandidateWorld) -> Fraction:
        observed = _world_attr(world, person_id, attribute)
        if observed is None:
            return model.prior_of_value(attribute, value)
        return Fraction(1) if observed == value else Fraction(0)

    return event


# --- exact handling of noisy output spaces ------------------------------------


@dataclass(frozen=True)
class _NoisyPlan:
    """Flattened cell list of a noisy release, for count-vector likelihoods."""

    alpha: Fraction
    tables: tuple[Table, ...]  # empty means a single national total
    total: bool

    def counts(self, dataset: Dataset) -> tuple[int, ...] | None:
        if self.total:
            return (len(dataset.persons),)
        out: list[int] = []
        from .mechanisms import _counts_against

        for table in self.tables:
            counts = _counts_against(table, dataset)
            if counts is None:
                return None  # outside the released domain: likelihood zero
            out.extend(counts[(g, m)] for g, m, _ in table.cells)
        return tuple(out)


def _noisy_plan(spec: MechanismSpec, targets: Sequence[Target], domain_data: Dataset) -> _NoisyPlan:
    if spec.kind == "PerturbedTotal":
        return _NoisyPlan(alpha=spec.alpha, tables=(), total=True)
    if spec.kind != "GeometricNoise":
        raise ValueError(f"{spec.kind} is not a noisy-count mechanism")
    tables = []
    for t in targets:
        if not isinstance(t, TableSpec):
            raise ValueError("GeometricNoise applies to tables only")
        tables.append(tabulate(domain_data, t))
    return _NoisyPlan(alpha=spec.alpha, tables=tuple(tables), total=False)


def _observed_vector(plan: _NoisyPlan, release: Release) -> tuple[int, ...]:
    if plan.total:
        (product,) = release.products
        return (product.value,)
    out: list[int] = []
    for table, product in zip(plan.tables, release.products):
        assert isinstance(product, Table)
        released = product.as_mapping()
        out.extend(released[(g, m)] for g, m, _ in table.cells)
    return tuple(out)


def _output_classes(vectors: Sequence[tuple[int, ...]], class_cap: int):
    """Partition the output space into classes of constant likelihood ratio.

    Between any two hypothesized count vectors the likelihood ratio at output
    o is alpha**(|o-c|_1 - |o-c'|_1), which is constant in each coordinate
    only at single outputs between the extreme counts and on the two tails
    beyond them.  Yields tuples of per-coordinate (tag, representative) with
    tag 'P' (point), 'L' (left tail), 'R' (right tail); the representative is
    the first output inside the class.
    """
    dims = len(vectors[0])
    options: list[list[tuple[str, int]]] = []
    size = 1
    for i in range(dims):
        lo = min(v[i] for v in vectors)
        hi = max(v[i] for v in vectors)
        cell = [("L", lo - 1)] + [("P", o) for o in range(lo, hi + 1)] + [("R", hi + 1)]
        options.append(cell)
        size *= len(cell)
        if size > class_cap:
            raise EnumerationCapError(
                f"noisy output space needs more than {class_cap} exact classes"
            )
    return itertools.product(*options)


def _class_probability(
    cls: tuple[tuple[str, int], ...], counts: tuple[int, ...], alpha: Fraction
) -> Fraction:
    """P(output lands in the class | true counts), closed-form tails."""
    prob = Fraction(1)
    for (tag, rep), c in zip(cls, counts):
        if tag == "P":
            prob *= geometric_mass(rep - c, alpha)
        elif tag == "L":
            prob *= 1 - geometric_tail_ge(rep + 1 - c, alpha)
        else:
            prob *= geometric_tail_ge(rep - c, alpha)
    return prob


def _class_rep_likelihood(
    cls: tuple[tuple[str, int], ...], counts: tuple[int, ...], alpha: Fraction
) -> Fraction:
    # Likelihood of the class's representative output; within a class all
    # hypotheses' likelihoods scale together, so ratios at the representative
    # are the ratios everywhere in the class.
    prob = Fraction(1)
    for (tag, rep), c in zip(cls, counts):
        prob *= geometric_mass(rep - c, alpha)
    return prob


def _world_rows(
    worlds: Sequence[CandidateWorld],
    transform: Callable[[Dataset], Dataset],
    plan: _NoisyPlan,
) -> list[tuple[CandidateWorld, tuple[int, ...] | None]]:
    return [(w, plan.counts(transform(w.dataset))) for w in worlds if w.weight > 0]


def _posterior_in_class(
    rows: Sequence[tuple[CandidateWorld, tuple[int, ...] | None]],
    event,
    cls,
    alpha: Fraction,
) -> Fraction | None:
    """Event posterior given that the output fell in this class, or None when
    no hypothesized world can produce outputs there."""
    num = Fraction(0)
    den = Fraction(0)
    for world, vec in rows:
        if vec is None:
            continue
        like = _class_rep_likelihood(cls, vec, alpha)
        den += world.weight * like
        num += world.weight * like * event(world)
    if den == 0:
        return None
    return num / den


def _expected_posterior(
    rows: Sequence[tuple[CandidateWorld, tuple[int, ...] | None]],
    event,
    plan: _NoisyPlan,
    true_counts: tuple[int, ...],
    class_cap: int,
) -> Fraction:
    """E over the mechanism's randomness of the attacker's event posterior."""
    vectors = [vec for _, vec in rows if vec is not None]
    if not vectors:
        raise ZeroMassError("no candidate world lies inside the released domain")
    vectors.append(true_counts)
    expected = Fraction(0)
    for cls in _output_classes(vectors, class_cap):
        p_class = _class_probability(cls, true_counts, plan.alpha)
        if p_class == 0:
            continue
        posterior = _posterior_in_class(rows, event, cls, plan.alpha)
        if posterior is None:
            raise ZeroMassError("the data produce outputs no candidate world explains")
        expected += p_class * posterior
    return expected


def _posterior_at_release(
    worlds: Sequence[CandidateWorld],
    transform: Callable[[Dataset], Dataset],
    event,
    release: Release,
) -> Fraction:
    """Event posterior at one realized release, any mechanism kind."""
    num = Fraction(0)
    den = Fraction(0)
    for world in worlds:
        if world.weight == 0:
            continue
        like = likelihood(release, transform(world.dataset))
        if like is UNAVAILABLE:
            raise EnumerationCapError("mechanism likelihood unavailable for a candidate world")
        den += world.weight * like
        num += world.weight * like * event(world)
    if den == 0:
        raise ZeroMassError("release has probability zero under every candidate world")
    return num / den


def _sup_posterior_ratio(
    rows_act,
    rows_cf,
    event,
    plan: _NoisyPlan,
    class_cap: int,
) -> Fraction | None:
    """sup over outputs of posterior_actual / posterior_counterfactual.

    None means unbounded: some output class gives the actual hypothesis a
    positive event posterior while the counterfactual one gives zero.
    """
    vectors = [v for _, v in rows_act if v is not None]
    vectors += [v for _, v in rows_cf if v is not None]
    if not vectors:
        raise ZeroMassError("no candidate world lies inside the released domain")
    worst = Fraction(0)
    for cls in _output_classes(vectors, class_cap):
        p_act = _posterior_in_class(rows_act, event, cls, plan.alpha)
        p_cf = _posterior_in_class(rows_cf, event, cls, plan.alpha)
        if p_act is None or p_act == 0:
            continue  # output impossible or uninformative under the actual side
        if p_cf is None or p_cf == 0:
            return None
        worst = max(worst, p_act / p_cf)
    return worst


# --- counterfactual methodologies ----------------------------------------------


def counterfactual_bayes(
    attacker: AttackerModel,
    data: Dataset,
    spec: MechanismSpec,
    targets: Sequence[Target],
    person_id: str,
    value,
    attribute: str = "sensitive",
    convention: str = "removal",
    mode: str = "average",
    release: Release | None = None,
    cap: int = ENUMERATION_CAP,
    class_cap: int = CLASS_CAP,
) -> RiskReport:
    """Posterior about X from the actual release vs the counterfactual one.

    average mode compares expectations over the mechanism's randomness: what
    the attacker would typically conclude from M(data) against M(data with
    X's record removed or blanked).  Supported for deterministic mechanisms
    and for noisy counts (exactly, via output classes).

    realized mode fixes the one release that actually went out and asks how
    the attacker's posterior would differ had the counterfactual data
    produced that same output; for noisy counts the report also carries the
    exact sup over outputs of the posterior ratio, checked against the
    mechanism's declared ratio bound.
    """
    if mode not in ("average", "realized"):
        raise ValueError(f"unknown counterfactual mode {mode!r}")
    targets = tuple(targets)
    worlds = enumerate_worlds(attacker, cap)
    event = _event_for(attacker, person_id, value, attribute)
    t_act = _transform_for("actual", person_id)
    t_cf = _transform_for(convention, person_id)
    prior = attacker.person(person_id).prior_of_value(attribute, value)

    notes: list[str] = []
    quantities: list[tuple[str, object]] = [("prior", prior)]
    p_cf: Fraction | None

    if mode == "realized":
        if release is None:
            release = apply(data, spec, targets)
        p_act = _posterior_at_release(worlds, t_act, event, release)
        try:
            p_cf = _posterior_at_release(worlds, t_cf, event, release)
        except ZeroMassError:
            p_cf = None
            notes.append("no counterfactual world can produce the realized release")
    else:
        if spec.kind in _DETERMINISTIC_KINDS:
            release_act = apply(data, spec, targets)
            release_cf = apply(t_cf(data), spec, targets)
            p_act = _posterior_at_release(worlds, t_act, event, release_act)
            try:
                p_cf = _posterior_at_release(worlds, t_cf, event, release_cf)
            except ZeroMassError:
                p_cf = None
                notes.append("no counterfactual world can produce the counterfactual release")
        elif spec.kind in _NOISY_KINDS:
            plan = _noisy_plan(spec, targets, data)
            true_act = plan.counts(data)
            true_cf = plan.counts(t_cf(data))
            assert true_act is not None and true_cf is not None
            rows_act = _world_rows(worlds, t_act, plan)
            rows_cf = _world_rows(worlds, t_cf, plan)
            p_act = _expected_posterior(rows_act, event, plan, true_act, class_cap)
            p_cf = _expected_posterior(rows_cf, event, plan, true_cf, class_cap)
        else:
            raise ValueError(
                f"average mode is not computable exactly for {spec.kind}; use realized mode"
            )

    quantities.append(("posterior_actual", p_act))
    quantities.append(("posterior_counterfactual", p_cf))
    if p_cf is None or (p_cf == 0 and p_act > 0):
        quantities.append(("ratio", None))
        notes.append("posterior ratio unbounded")
    elif p_cf == 0:
        quantities.append(("ratio", None))
        notes.append("both posteriors are zero")
    else:
        quantities.append(("ratio", p_act / p_cf))

    if mode == "realized" and spec.kind in _NOISY_KINDS:
        plan = _noisy_plan(spec, targets, data)
        rows_act = _world_rows(worlds, t_act, plan)
        rows_cf = _world_rows(worlds, t_cf, plan)
        worst = _sup_posterior_ratio(rows_act, rows_cf, event, plan, class_cap)
        bound = (1 / spec.alpha) ** spec.sensitivity
        quantities.append(("worst_output_ratio", worst))
        quantities.append(("declared_ratio_bound", bound))
        quantities.append(("within_declared_bound", worst is not None and worst <= bound))

    return RiskReport(
        methodology="counterfactual_bayes",
        person_id=person_id,
        value=value,
        attribute=attribute,
        mode=mode,
        convention=convention,
        quantities=tuple(quantities),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class TradeoffCurve:
    """Exact ROC of the most powerful test of actual data vs counterfactual.

    points are (level, power) vertices, level ascending from (0, .) to
    (1, 1); the achievable curve is their piecewise-linear interpolation
    (randomized tests fill the segments).  ratio_bound, when present, is the
    mechanism's declared worst-case likelihood ratio; a release honoring it
    keeps power <= min(1, ratio_bound * level) everywhere.
    """

    points: tuple[tuple[Fraction, Fraction], ...]
    ratio_bound: Fraction | None = None

    def __post_init__(self) -> None:
        pts = tuple((Fraction(a), Fraction(p)) for a, p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts or pts[0][0] != 0 or pts[-1] != (1, 1):
            raise ValueError("curve must run from level 0 to (1, 1)")
        for (a1, p1), (a2, p2) in zip(pts, pts[1:]):
            if a2 < a1 or p2 < p1:
                raise ValueError("curve vertices must be monotone")

    def power_at(self, level: Fraction) -> Fraction:
        """Exact best power at a significance level (linear interpolation)."""
        level = Fraction(level)
        if not 0 <= level <= 1:
            raise ValueError("level must be in [0, 1]")
        best = Fraction(0)
        for (a1, p1), (a2, p2) in zip(self.points, self.points[1:]):
            if a1 <= level <= a2:
                if a1 == a2:
                    best = max(best, p2)
                else:
                    best = max(best, p1 + (p2 - p1) * (level - a1) / (a2 - a1))
        if level >= self.points[-1][0]:
            best = max(best, self.points[-1][1])
        return best

    def within_ratio_bound(self) -> bool | None:
        """Check power <= min(1, ratio_bound * level) at every vertex.

        The curve is piecewise linear and the bound is concave, so checking
        vertices suffices.  None when no bound was declared.
        """
        if self.ratio_bound is None:
            return None
        return all(p <= min(Fraction(1), self.ratio_bound * a) for a, p in self.points)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["alpha", "power"])
        for a, p in self.points:
            writer.writerow([format_fraction(a), format_fraction(p)])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, ratio_bound: Fraction | None = None) -> "TradeoffCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["alpha", "power"]:
            raise ValueError("expected an alpha,power header")
        points = tuple((parse_fraction(a), parse_fraction(p)) for a, p in rows[1:])
        return cls(points=points, ratio_bound=ratio_bound)


def _exponent_pmf(gap: int, alpha: Fraction) -> dict[int, Fraction]:
    """pmf of |o - a| - |o - b| when o = a + noise and |a - b| = gap.

    Closed form: the left tail (output on a's far side) collects mass
    1/(1+alpha), interior points t = 1..gap-1 carry the point masses, and
    the far tail beyond b collects alpha**gap/(1+alpha).
    """
    if gap == 0:
        return {0: Fraction(1)}
    pmf: dict[int, Fraction] = {-gap: Fraction(1, 1) / (1 + alpha)}
    for t in range(1, gap):
        pmf[-gap + 2 * t] = geometric_mass(t, alpha)
    pmf[gap] = alpha**gap / (1 + alpha)
    return pmf


def _convolve(a: Mapping[int, Fraction], b: Mapping[int, Fraction]) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for x, px in a.items():
        for y, py in b.items():
            out[x + y] = out.get(x + y, Fraction(0)) + px * py
    return out


def _roc_vertices(
    classes: Sequence[tuple[Fraction, Fraction]]
) -> tuple[tuple[Fraction, Fraction], ...]:
    """Neyman-Pearson vertices from (P mass, Q mass) likelihood classes.

    Classes are admitted in decreasing likelihood-ratio order; Q-null classes
    (ratio infinity) come first.  level accumulates Q, power accumulates P.
    """

    def ratio_key(item: tuple[Fraction, Fraction]):
        p, q = item
        if q == 0:
            return (0, Fraction(0))  # infinite ratio sorts first
        return (1, -p / q)

    points: list[tuple[Fraction, Fraction]] = [(Fraction(0), Fraction(0))]
    level = Fraction(0)
    power = Fraction(0)
    for p, q in sorted(classes, key=ratio_key):
        if p == 0 and q == 0:
            continue
        level += q
        power += p
        points.append((level, power))
    if points[-1] != (1, 1):
        points.append((Fraction(1), Fraction(1)))
    return tuple(points)


def counterfactual_freq(
    spec: MechanismSpec,
    targets: Sequence[Target],
    d_actual: Dataset,
    d_counterfactual: Dataset,
    class_cap: int = CLASS_CAP,
) -> TradeoffCurve:
    """Exact power curve of the best test "was it d_actual or the counterfactual?".

    For noisy counts the test statistic collapses to the total exponent
    e = |o - a|_1 - |o - b|_1 whose pmf under each hypothesis is a
    convolution of closed-form per-cell pmfs, so the infinite output space
    contributes finitely many likelihood classes with ratio alpha**e.
    Deterministic mechanisms and swaps reduce to finite output comparisons.
    """
    targets = tuple(targets)
    if spec.kind in _NOISY_KINDS:
        counts_a, counts_b = _paired_counts(spec, targets, d_actual, d_counterfactual)
        gaps = [abs(a - b) for a, b in zip(counts_a, counts_b)]
        if sum(g + 1 for g in gaps) > class_cap:
            raise EnumerationCapError("exponent class space exceeds the cap")
        pmf_p: dict[int, Fraction] = {0: Fraction(1)}
        for gap in gaps:
            pmf_p = _convolve(pmf_p, _exponent_pmf(gap, spec.alpha))
        # Under the counterfactual the exponent mirrors: Q(e) = P(-e).
        pmf_q = {-e: p for e, p in pmf_p.items()}
        classes = [
            (pmf_p.get(e, Fraction(0)), pmf_q.get(e, Fraction(0)))
            for e in sorted(set(pmf_p) | set(pmf_q))
        ]
        bound = (1 / spec.alpha) ** spec.sensitivity
        return TradeoffCurve(points=_roc_vertices(classes), ratio_bound=bound)

    if spec.kind in _DETERMINISTIC_KINDS:
        products_a = apply(d_actual, spec, targets).products
        products_b = apply(d_counterfactual, spec, targets).products
        if products_a == products_b:
            classes = [(Fraction(1), Fraction(1))]
        else:
            classes = [(Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
        return TradeoffCurve(points=_roc_vertices(classes))

    if spec.kind == "Swap":
        from .mechanisms import _swap_output_distribution

        race = 1 + max((p.race for d in (d_actual, d_counterfactual) for p in d.persons), default=0)
        eth = 1 + max(
            (p.ethnicity for d in (d_actual, d_counterfactual) for p in d.persons), default=0
        )
        dist_a = _swap_output_distribution(spec, targets, d_actual, race, eth)
        dist_b = _swap_output_distribution(spec, targets, d_counterfactual, race, eth)
        if dist_a is None or dist_b is None:
            raise EnumerationCapError("swap configuration space exceeds the enumeration cap")
        outputs = set(dist_a) | set(dist_b)
        classes = [
            (dist_a.get(o, Fraction(0)), dist_b.get(o, Fraction(0))) for o in sorted(outputs, key=repr)
        ]
        return TradeoffCurve(points=_roc_vertices(classes))

    raise AssertionError("unreachable")


def _paired_counts(
    spec: MechanismSpec,
    targets: tuple[Target, ...],
    d1: Dataset,
    d2: Dataset,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Count vectors for both datasets over a shared dense cell domain."""
    if spec.kind == "PerturbedTotal":
        return (len(d1.persons),), (len(d2.persons),)
    race = 1 + max((p.race for d in (d1, d2) for p in d.persons if not p.is_blank), default=0)
    eth = 1 + max((p.ethnicity for d in (d1, d2) for p in d.persons if not p.is_blank), default=0)
    out1: list[int] = []
    out2: list[int] = []
    for t in targets:
        if not isinstance(t, TableSpec):
            raise ValueError("GeometricNoise applies to tables only")
        t1 = tabulate(d1, t, race_levels=race, ethnicity_levels=eth).as_mapping()
        t2 = tabulate(d2, t, race_levels=race, ethnicity_levels=eth).as_mapping()
        for key in sorted(set(t1) | set(t2)):
            out1.append(t1.get(key, 0))
            out2.append(t2.get(key, 0))
    return tuple(out1), tuple(out2)


# --- invariant-preserving alterations ------------------------------------------


def invariant_counterfactual(
    data: Dataset,
    spec: MechanismSpec,
    targets: Sequence[Target],
    person_id: str,
    alteration_cap: int = ALTERATION_CAP,
) -> RiskReport:
    """Worst-case detectability of any region-preserving rewrite of X's record.

    The counterfactual here keeps X present and inside their region (so
    region-level invariants hold) but lets every other attribute change to
    any value occurring elsewhere in the data.  The report's ratio is the
    sup over alterations of the worst output likelihood ratio between the
    actual data and the altered data; 1 means the release cannot distinguish
    any of them, None means some alteration is detectable with certainty.
    """
    targets = tuple(targets)
    target = data.person(person_id)
    region = data.region_of(target.block)
    blocks = [b for b in data.blocks if data.region_of(b) == region]
    real = [p for p in data.persons if not p.is_blank]
    domains: dict[str, list] = {"block": blocks}
    for attr in PERSON_ATTRIBUTES:
        if attr == "block":
            continue
        values = sorted({p.attribute(attr) for p in real} | {target.attribute(attr)})
        domains[attr] = values

    names = list(PERSON_ATTRIBUTES)
    size = 1
    for attr in names:
        size *= len(domains[attr])
    if size > alteration_cap:
        raise EnumerationCapError(f"{size} alterations exceed the cap of {alteration_cap}")

    original = tuple(target.attribute(a) for a in names)
    worst = Fraction(1)
    unbounded = False
    examined = 0
    for combo in itertools.product(*(domains[a] for a in names)):
        if combo == original:
            continue
        examined += 1
        altered = Person(
            id=target.id,
            block=combo[names.index("block")],
            sex=combo[names.index("sex")],
            age=combo[names.index("age")],
            race=combo[names.index("race")],
            ethnicity=combo[names.index("ethnicity")],
            sensitive=combo[names.index("sensitive")],
        )
        check = dp_ratio_bound_check(spec, targets, data, data.replace_person(altered))
        if check.worst_ratio is None:
            unbounded = True
            break
        worst = max(worst, check.worst_ratio)

    return RiskReport(
        methodology="invariant_counterfactual",
        person_id=person_id,
        value=None,
        attribute="record",
        quantities=(
            ("worst_detection_ratio", None if unbounded else worst),
            ("alterations_examined", examined),
        ),
        notes=("some alteration is detectable with certainty",) if unbounded else (),
    )


# --- serialization --------------------------------------------------------------


def _value_to_json(v):
    if v is None or isinstance(v, (int, str, bool)):
        return v
    if isinstance(v, Fraction):
        return format_fraction(v)
    if isinstance(v, tuple):
        return [_value_to_json(x) for x in v]
    raise TypeError(f"cannot serialize quantity {v!r}")


def _value_from_json(v):
    if isinstance(v, str):
        return parse_fraction(v)
    if isinstance(v, list):
        return tuple(_value_from_json(x) for x in v)
    return v


def risk_report_to_json_obj(report: RiskReport) -> dict:
    return {
        "methodology": report.methodology,
        "person_id": report.person_id,
        "value": _value_to_json(report.value),
        "attribute": report.attribute,
        "mode": report.mode,
        "convention": report.convention,
        "applicable": report.applicable,
        "quantities": [[k, _value_to_json(v)] for k, v in report.quantities],
        "notes": list(report.notes),
    }


def risk_report_from_json_obj(obj: Mapping) -> RiskReport:
    return RiskReport(
        methodology=obj["methodology"],
        person_id=obj["person_id"],
        value=_value_from_json(obj["value"]),
        attribute=obj["attribute"],
        mode=obj.get("mode"),
        convention=obj.get("convention"),
        applicable=bool(obj.get("applicable", True)),
        quantities=tuple((k, _value_from_json(v)) for k, v in obj.get("quantities", [])),
        notes=tuple(obj.get("notes", ())),
    )
