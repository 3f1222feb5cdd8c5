"""Critique procedures: how impressive are reconstruction attack metrics?

Three families of checks, each a self-contained exhibit:

  * Random-vs-reconstruction: how often does a data-blind guesser earn
    credit under "a matching resident exists in the block" scoring, both
    simulated and in exact closed form, plus a degenerate guesser whose
    anyone-in-block hit rate dwarfs its honest one-to-one match rate.
  * Percentage-change hygiene: the arc (symmetrized) change statistic
    against the naive one, with explicit sentinels for the empty cases
    instead of silent division blowups.
  * Baselines: the block-modal predictor and its leave-one-out gap, which
    separate "the data are homogeneous" from "the release leaked my row".
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import csv
import io
import itertools

from .reident import KeySpec, match_one_to_one
from .rng import categorical, derived_rng
from .worldmodel import Dataset, Person

__all__ = [
    "NO_CHANGE",
    "UNDEFINED",
    "ConstantGuess",
    "ProportionalToPopulation",
    "UniformOverCombos",
    "RvrBlockRow",
    "RvrResult",
    "DegenerateExhibit",
    "ModalBaselineReport",
    "LooGapReport",
    "rvr_simulate",
    "rvr_analytic",
    "rvr_rows_to_csv",
    "degenerate_exhibit",
    "arc_pct_change",
    "naive_pct_change",
    "both_zero_fraction",
    "modal_baseline",
    "loo_gap",
]


class _Sentinel:
    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


# Percentage change of 0 -> 0: there was no change, not a zero-percent one.
NO_CHANGE = _Sentinel("NO_CHANGE")
# Naive percentage change from a zero base does not exist.
UNDEFINED = _Sentinel("UNDEFINED")


# --- guessing strategies -----------------------------------------------------


# A guess names values for these attributes of an unseen resident.
DEFAULT_GUESS_ATTRIBUTES = ("race", "ethnicity")


def _combo_of(person: Person, attributes: tuple[str, ...]) -> tuple:
    return tuple(person.attribute(a) for a in attributes)


def _combo_counts(truth: Dataset, attributes: tuple[str, ...]) -> dict[tuple, int]:
    counts: dict[tuple, int] = {}
    for p in truth.persons:
        if p.is_blank:
            continue
        k = _combo_of(p, attributes)
        counts[k] = counts.get(k, 0) + 1
    return counts


@dataclass(frozen=True)
class ConstantGuess:
    """Always guess the same attribute combo."""

    combo: tuple
    attributes: tuple[str, ...] = DEFAULT_GUESS_ATTRIBUTES

    def distribution(self, truth: Dataset) -> tuple[tuple[tuple, Fraction], ...]:
        return ((tuple(self.combo), Fraction(1)),)


@dataclass(frozen=True)
class ProportionalToPopulation:
    """Guess combos with their overall population shares."""

    attributes: tuple[str, ...] = DEFAULT_GUESS_ATTRIBUTES

    def distribution(self, truth: Dataset) -> tuple[tuple[tuple, Fraction], ...]:
        counts = _combo_counts(truth, self.attributes)
        total = sum(counts.values())
        if total == 0:
            raise ValueError("empty data")
        return tuple((k, Fraction(n, total)) for k, n in sorted(counts.items()))


@dataclass(frozen=True)
class UniformOverCombos:
    """Guess uniformly over the cross product of observed attribute values."""

    attributes: tuple[str, ...] = DEFAULT_GUESS_ATTRIBUTES

    def distribution(self, truth: Dataset) -> tuple[tuple[tuple, Fraction], ...]:
        counts = _combo_counts(truth, self.attributes)
        if not counts:
            raise ValueError("empty data")
        levels = [sorted({k[i] for k in counts}) for i in range(len(self.attributes))]
        combos = list(itertools.product(*levels))
        share = Fraction(1, len(combos))
        return tuple((c, share) for c in combos)


Strategy = ConstantGuess | ProportionalToPopulation | UniformOverCombos


# --- random vs reconstruction -------------------------------------------------


@dataclass(frozen=True)
class RvrBlockRow:
    block: str
    population: int
    hits: int
    misses: int


@dataclass(frozen=True)
class RvrResult:
    rows: tuple[RvrBlockRow, ...]
    trials: int

    @property
    def hits(self) -> int:
        return sum(r.hits for r in self.rows)

    @property
    def hit_rate(self) -> Fraction:
        if self.trials == 0:
            return Fraction(0)
        return Fraction(self.hits, self.trials)


def rvr_simulate(truth: Dataset, strategy: Strategy, trials: int, seed: int) -> RvrResult:
    """Data-blind guessing, scored generously: a trial picks a block with
    probability proportional to population, guesses a combo, and earns a hit
    if anyone in the block carries that combo."""
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    blocks = [b for b in truth.blocks if truth.persons_in(b)]
    if not blocks:
        raise ValueError("empty data")
    total = len([p for p in truth.persons if not p.is_blank])
    block_weights = [Fraction(len(truth.persons_in(b)), total) for b in blocks]
    dist = strategy.distribution(truth)
    combos = [c for c, _ in dist]
    combo_weights = [w for _, w in dist]
    present = {
        b: {_combo_of(p, strategy.attributes) for p in truth.persons_in(b) if not p.is_blank}
        for b in blocks
    }

    rng = derived_rng(seed, "rvr")
    hits = {b: 0 for b in blocks}
    misses = {b: 0 for b in blocks}
    for _ in range(trials):
        block = blocks[categorical(rng, block_weights)]
        guess = combos[categorical(rng, combo_weights)]
        if guess in present[block]:
            hits[block] += 1
        else:
            misses[block] += 1
    rows = tuple(
        RvrBlockRow(block=b, population=len(truth.persons_in(b)), hits=hits[b], misses=misses[b])
        for b in blocks
    )
    return RvrResult(rows=rows, trials=trials)


def rvr_analytic(truth: Dataset, strategy: Strategy) -> Fraction:
    """Exact hit probability of one trial of rvr_simulate."""
    blocks = [b for b in truth.blocks if truth.persons_in(b)]
    if not blocks:
        raise ValueError("empty data")
    total = len([p for p in truth.persons if not p.is_blank])
    dist = strategy.distribution(truth)
    prob = Fraction(0)
    for b in blocks:
        residents = truth.persons_in(b)
        present = {_combo_of(p, strategy.attributes) for p in residents if not p.is_blank}
        hit = sum((w for c, w in dist if c in present), Fraction(0))
        prob += Fraction(len(residents), total) * hit
    return prob


def rvr_rows_to_csv(result: RvrResult) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["block", "population", "hits", "misses"])
    for r in result.rows:
        writer.writerow([r.block, r.population, r.hits, r.misses])
    return out.getvalue()


@dataclass(frozen=True)
class DegenerateExhibit:
    """The best constant guesser, scored both ways.

    Under anyone-in-block credit the constant guess earns hit_rate per
    trial forever; matched one-to-one against the actual population the
    same trials top out at the matchable population, so the honest rate
    decays with the number of claims."""

    combo: tuple
    attributes: tuple[str, ...]
    trials: int
    analytic_hit_rate: Fraction
    simulated_hit_rate: Fraction
    one_to_one_matches: int
    one_to_one_rate: Fraction


def degenerate_exhibit(
    truth: Dataset,
    trials: int,
    seed: int,
    attributes: tuple[str, ...] = DEFAULT_GUESS_ATTRIBUTES,
) -> DegenerateExhibit:
    counts = _combo_counts(truth, attributes)
    if not counts:
        raise ValueError("empty data")
    best = max(
        sorted(counts),
        key=lambda c: rvr_analytic(truth, ConstantGuess(c, attributes)),
    )
    strategy = ConstantGuess(best, attributes)
    sim = rvr_simulate(truth, strategy, trials, seed)

    # The same trial schedule replayed as one-to-one claims: each trial files
    # one named claim (trial's block, the constant combo).
    rng = derived_rng(seed, "rvr")
    blocks = [b for b in truth.blocks if truth.persons_in(b)]
    total = len([p for p in truth.persons if not p.is_blank])
    block_weights = [Fraction(len(truth.persons_in(b)), total) for b in blocks]
    dist = strategy.distribution(truth)
    combo_weights = [w for _, w in dist]
    fields = {"sex": 0, "age": 0, "race": 0, "ethnicity": 0}
    fields.update(dict(zip(attributes, best)))
    claims = []
    for i in range(trials):
        block = blocks[categorical(rng, block_weights)]
        categorical(rng, combo_weights)  # same stream as the simulation
        claims.append(Person(id=f"claim-{i:05d}", block=block, **fields))
    claim_file = Dataset(tuple(claims), truth.geography)
    key = KeySpec(attributes=("block",) + tuple(attributes))
    result = match_one_to_one(claim_file, truth, key)
    return DegenerateExhibit(
        combo=best,
        attributes=tuple(attributes),
        trials=trials,
        analytic_hit_rate=rvr_analytic(truth, strategy),
        simulated_hit_rate=sim.hit_rate,
        one_to_one_matches=result.matched,
        one_to_one_rate=Fraction(result.matched, trials) if trials else Fraction(0),
    )


# --- percentage-change hygiene -------------------------------------------------


def arc_pct_change(before: int, after: int):
    """Arc percentage change 200(b-a)/(a+b); NO_CHANGE when both are zero.

    Symmetric denominator keeps the statistic bounded in [-200, 200] and
    defined whenever anything was ever counted."""
    if before == 0 and after == 0:
        return NO_CHANGE
    return Fraction(200 * (after - before), before + after)


def naive_pct_change(before: int, after: int):
    """Naive 100(b-a)/a; UNDEFINED on a zero base."""
    if before == 0:
        return UNDEFINED
    return Fraction(100 * (after - before), before)


def both_zero_fraction(pairs: Iterable[tuple[int, int]]) -> Fraction:
    """Share of (before, after) cells that are zero on both sides."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("no cells")
    zero = sum(1 for a, b in pairs if a == 0 and b == 0)
    return Fraction(zero, len(pairs))


# --- baselines -----------------------------------------------------------------


def _modal_combo(persons: Sequence[Person]) -> tuple[int, int]:
    counts: dict[tuple[int, int], int] = {}
    for p in persons:
        k = (p.race, p.ethnicity)
        counts[k] = counts.get(k, 0) + 1
    best_count = max(counts.values())
    return min(k for k, n in counts.items() if n == best_count)


@dataclass(frozen=True)
class ModalBaselineReport:
    """Accuracy of predicting every resident carries the block's modal combo.

    nonmodal_correct is identically zero: the baseline never gets a
    non-modal resident right, which bounds what block-level accuracy can
    prove about individual disclosure."""

    block_modes: tuple[tuple[str, tuple[int, int], Fraction], ...]
    population: int
    correct: int
    nonmodal_population: int
    nonmodal_correct: int

    @property
    def accuracy(self) -> Fraction:
        if self.population == 0:
            raise ValueError("no blocks meet the size floor")
        return Fraction(self.correct, self.population)


def modal_baseline(truth: Dataset, min_block: int = 5) -> ModalBaselineReport:
    block_modes = []
    population = correct = nonmodal_pop = 0
    for b in truth.blocks:
        residents = [p for p in truth.persons_in(b) if not p.is_blank]
        if len(residents) < min_block:
            continue
        mode = _modal_combo(residents)
        agree = sum(1 for p in residents if (p.race, p.ethnicity) == mode)
        block_modes.append((b, mode, Fraction(agree, len(residents))))
        population += len(residents)
        correct += agree
        nonmodal_pop += len(residents) - agree
    return ModalBaselineReport(
        block_modes=tuple(block_modes),
        population=population,
        correct=correct,
        nonmodal_population=nonmodal_pop,
        nonmodal_correct=0,
    )


@dataclass(frozen=True)
class LooGapReport:
    """In-sample modal accuracy minus leave-one-out modal accuracy.

    The in-sample modal predictor sees the person it predicts; leave-one-out
    removes them first.  A resident of a singleton block gets no LOO
    prediction and scores incorrect.  The gap is how much of the baseline's
    accuracy was just reading the answer off the person themselves."""

    population: int
    modal_correct: int
    loo_correct: int

    @property
    def modal_accuracy(self) -> Fraction:
        return Fraction(self.modal_correct, self.population)

    @property
    def loo_accuracy(self) -> Fraction:
        return Fraction(self.loo_correct, self.population)

    @property
    def gap(self) -> Fraction:
        return self.modal_accuracy - self.loo_accuracy


def loo_gap(truth: Dataset, min_block: int = 1) -> LooGapReport:
    population = modal_correct = loo_correct = 0
    for b in truth.blocks:
        residents = [p for p in truth.persons_in(b) if not p.is_blank]
        if len(residents) < min_block or not residents:
            continue
        mode = _modal_combo(residents)
        for p in residents:
            population += 1
            if (p.race, p.ethnicity) == mode:
                modal_correct += 1
            others = [q for q in residents if q.id != p.id]
            if others and (p.race, p.ethnicity) == _modal_combo(others):
                loo_correct += 1
    if population == 0:
        raise ValueError("no blocks meet the size floor")
    return LooGapReport(
        population=population, modal_correct=modal_correct, loo_correct=loo_correct
    )
