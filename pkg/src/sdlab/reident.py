"""Re-identification: link an attacker's named file to released records.

The attacker holds microdata with identities (the same CSV layout the lab
uses everywhere) and some subset of attributes; the defender released or
leaked record-level data without identities.  Matching is one-to-one on a
key; a putative match claims the released record's remaining attributes for
the named person, and the lab confirms claims against the confidential
truth it uniquely possesses.

Deterministic throughout: exact matching pairs records in sorted order
inside each key class, and approximate-age matching returns the
lexicographically smallest maximum bipartite matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .worldmodel import AgeBinSystem, Dataset, SCHEMA_ATTRIBUTES

__all__ = [
    "KeySpec",
    "MatchPair",
    "MatchResult",
    "ConfirmationReport",
    "GroupRate",
    "SIZE_BINS",
    "HOMOGENEITY_BINS",
    "match_one_to_one",
    "confirm_matches",
    "block_homogeneity",
    "group_rates",
]

# Default block-size strata and modal-share strata for group reporting.
SIZE_BINS = ((1, 9), (10, 49), (50, None))
HOMOGENEITY_BINS = (
    (Fraction(0), Fraction(1, 2)),
    (Fraction(1, 2), Fraction(9, 10)),
    (Fraction(9, 10), Fraction(1)),
)


@dataclass(frozen=True)
class KeySpec:
    """Attributes two records must share to be match candidates.

    age_rule applies when "age" is among the attributes:
        exact           equal ages only
        plus_minus_one  ages may differ by at most one year
        binned          ages must fall in the same bin of age_bins
    """

    attributes: tuple[str, ...]
    age_rule: str = "exact"
    age_bins: AgeBinSystem | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "attributes", tuple(self.attributes))
        for a in self.attributes:
            if a not in SCHEMA_ATTRIBUTES:
                raise ValueError(f"unknown key attribute {a!r}")
        if len(set(self.attributes)) != len(self.attributes):
            raise ValueError("duplicate key attribute")
        if self.age_rule not in ("exact", "plus_minus_one", "binned"):
            raise ValueError(f"unknown age rule {self.age_rule!r}")
        if self.age_rule == "binned" and self.age_bins is None:
            raise ValueError("binned age rule needs age_bins")

    def exact_tuple(self, person) -> tuple:
        """Key value under exact/binned rules (hashable, class-partitioning)."""
        values = []
        for a in self.attributes:
            v = person.attribute(a)
            if a == "age" and self.age_rule == "binned":
                v = self.age_bins.index_of(v)
            values.append(v)
        return tuple(values)

    def agrees(self, known, candidate) -> bool:
        for a in self.attributes:
            va, vb = known.attribute(a), candidate.attribute(a)
            if a == "age":
                if self.age_rule == "exact" and va != vb:
                    return False
                if self.age_rule == "plus_minus_one" and abs(va - vb) > 1:
                    return False
                if self.age_rule == "binned" and self.age_bins.index_of(va) != self.age_bins.index_of(vb):
                    return False
            elif va != vb:
                return False
        return True


@dataclass(frozen=True)
class MatchPair:
    known_id: str
    candidate_id: str


@dataclass(frozen=True)
class MatchResult:
    pairs: tuple[MatchPair, ...]
    known_total: int
    candidate_total: int

    @property
    def matched(self) -> int:
        return len(self.pairs)

    @property
    def match_rate(self) -> Fraction:
        if self.known_total == 0:
            return Fraction(0)
        return Fraction(self.matched, self.known_total)


def match_one_to_one(known: Dataset, candidates: Dataset, key: KeySpec) -> MatchResult:
    """Largest one-to-one matching under the key, deterministically realized.

    With exact or binned age rules the key partitions both sides into
    classes and the maximum matching size is sum over classes of
    min(count_known, count_candidates); records pair up in (key, id) order.
    The plus-minus-one rule needs a genuine bipartite matching; ties resolve
    to the lexicographically smallest pair list in (known id, candidate id)
    order.
    """
    if key.age_rule in ("exact", "binned"):
        by_key_known: dict[tuple, list[str]] = {}
        for p in sorted(known.persons, key=lambda p: (key.exact_tuple(p), p.id)):
            by_key_known.setdefault(key.exact_tuple(p), []).append(p.id)
        by_key_cand: dict[tuple, list[str]] = {}
        for p in sorted(candidates.persons, key=lambda p: (key.exact_tuple(p), p.id)):
            by_key_cand.setdefault(key.exact_tuple(p), []).append(p.id)
        pairs = []
        for k in sorted(by_key_known):
            for a, b in zip(by_key_known[k], by_key_cand.get(k, ())):
                pairs.append(MatchPair(known_id=a, candidate_id=b))
        pairs.sort(key=lambda m: (m.known_id, m.candidate_id))
        return MatchResult(
            pairs=tuple(pairs),
            known_total=len(known.persons),
            candidate_total=len(candidates.persons),
        )

    lefts = sorted(known.persons, key=lambda p: p.id)
    rights = sorted(candidates.persons, key=lambda p: p.id)
    adjacency = [
        [j for j, r in enumerate(rights) if key.agrees(l, r)] for l in lefts
    ]
    best = _max_matching_size(adjacency, len(rights), banned_left=set(), used_right=set())
    pairs = []
    used: set[int] = set()
    fixed_left: set[int] = set()
    for i, left in enumerate(lefts):
        for j in adjacency[i]:
            if j in used:
                continue
            # Fix (i, j) if a maximum matching containing all fixed pairs exists.
            rest = _max_matching_size(
                adjacency, len(rights), banned_left=fixed_left | {i}, used_right=used | {j}
            )
            if rest + len(pairs) + 1 == best:
                pairs.append(MatchPair(known_id=left.id, candidate_id=rights[j].id))
                used.add(j)
                fixed_left.add(i)
                break
    return MatchResult(
        pairs=tuple(pairs), known_total=len(lefts), candidate_total=len(rights)
    )


def _max_matching_size(
    adjacency: list[list[int]], n_right: int, banned_left: set[int], used_right: set[int]
) -> int:
    """Kuhn's augmenting-path matching over the unfixed part of the graph."""
    match_right = [-1] * n_right

    def augment(u: int, seen: set[int]) -> bool:
        for v in adjacency[u]:
            if v in used_right or v in seen:
                continue
            seen.add(v)
            if match_right[v] == -1 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in range(len(adjacency)):
        if u in banned_left:
            continue
        if augment(u, set()):
            size += 1
    return size


@dataclass(frozen=True)
class ConfirmationReport:
    """Putative matches checked against the confidential truth.

    A pair is correct when the candidate record agrees with the truth about
    the named person on every claim attribute and on the matching key.  With
    data_defined_only, pairs naming an imputed person are never counted as
    confirmed: an invented record cannot be disclosed, however well it
    matches.
    """

    confirmed: tuple[MatchPair, ...]
    putative: int
    data_defined_only: bool

    @property
    def precision(self) -> Fraction | None:
        if self.putative == 0:
            return None
        return Fraction(len(self.confirmed), self.putative)


def confirm_matches(
    result: MatchResult,
    candidates: Dataset,
    truth: Dataset,
    key: KeySpec,
    claim_attributes: tuple[str, ...] = ("race", "ethnicity"),
    data_defined_only: bool = True,
) -> ConfirmationReport:
    confirmed = []
    for pair in result.pairs:
        try:
            true_person = truth.person(pair.known_id)
        except KeyError:
            continue  # the named person is not in the data at all
        candidate = candidates.person(pair.candidate_id)
        if data_defined_only and true_person.imputed:
            continue
        if not key.agrees(true_person, candidate):
            continue
        if all(candidate.attribute(a) == true_person.attribute(a) for a in claim_attributes):
            confirmed.append(pair)
    return ConfirmationReport(
        confirmed=tuple(confirmed),
        putative=result.matched,
        data_defined_only=data_defined_only,
    )


def block_homogeneity(truth: Dataset, block: str) -> Fraction:
    """Share of the block's residents holding its modal (race, ethnicity)."""
    residents = truth.persons_in(block)
    if not residents:
        raise ValueError(f"block {block} is empty")
    counts: dict[tuple, int] = {}
    for p in residents:
        k = (p.race, p.ethnicity)
        counts[k] = counts.get(k, 0) + 1
    return Fraction(max(counts.values()), len(residents))


@dataclass(frozen=True)
class GroupRate:
    size_range: tuple[int, int | None]
    homogeneity_range: tuple[Fraction, Fraction]
    population: int
    putative: int
    confirmed: int

    @property
    def putative_rate(self) -> Fraction:
        return Fraction(self.putative, self.population)

    @property
    def confirmed_rate(self) -> Fraction:
        return Fraction(self.confirmed, self.population)


def group_rates(
    result: MatchResult,
    report: ConfirmationReport,
    truth: Dataset,
    size_bins: tuple = SIZE_BINS,
    homogeneity_bins: tuple = HOMOGENEITY_BINS,
) -> tuple[GroupRate, ...]:
    """Match and confirmation rates per (block size, homogeneity) stratum.

    Each truth resident lands in the stratum of their block; rates divide by
    stratum population.  Strata with no residents are omitted.
    """
    block_stats: dict[str, tuple[int, Fraction]] = {}
    for b in truth.blocks:
        residents = truth.persons_in(b)
        if residents:
            block_stats[b] = (len(residents), block_homogeneity(truth, b))

    def size_bin(n: int):
        for lo, hi in size_bins:
            if n >= lo and (hi is None or n <= hi):
                return (lo, hi)
        raise ValueError(f"block size {n} fits no size bin")

    def homogeneity_bin(h: Fraction):
        for lo, hi in homogeneity_bins:
            if (h > lo or (lo == 0 and h == 0)) and h <= hi:
                return (lo, hi)
        raise ValueError(f"homogeneity {h} fits no bin")

    putative_ids = {p.known_id for p in result.pairs}
    confirmed_ids = {p.known_id for p in report.confirmed}

    groups: dict[tuple, list[int]] = {}
    for person in truth.persons:
        n, h = block_stats[person.block]
        g = (size_bin(n), homogeneity_bin(h))
        pop, put, conf = groups.get(g, [0, 0, 0])
        groups[g] = [
            pop + 1,
            put + (1 if person.id in putative_ids else 0),
            conf + (1 if person.id in confirmed_ids else 0),
        ]

    out = []
    for (srange, hrange), (pop, put, conf) in sorted(groups.items()):
        out.append(
            GroupRate(
                size_range=srange,
                homogeneity_range=hrange,
                population=pop,
                putative=put,
                confirmed=conf,
            )
        )
    return tuple(out)
