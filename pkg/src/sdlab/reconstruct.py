"""Reconstruction attack: recover per-block microdata from published tables.

Published counts become a system of coefficient-1 integer equations over
variables x[block, schema cell] >= 0.  Suppressed cells contribute nothing;
region-level counts sum variables across the region's blocks; policy
invariants (block population and voting-age population) add equations of
their own.  solve_all enumerates every nonnegative integer solution by
backtracking with interval propagation, so "how many microdata sets are
consistent with what was published?" gets an exact answer on lab-sized
worlds.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .tabulate import Table, VOTING_AGE
from .worldmodel import Dataset, Person, Schema, _schema_from_json, _schema_to_json

__all__ = [
    "UnboundedSystemError",
    "Equation",
    "ConstraintSystem",
    "SolutionSet",
    "VariableSummary",
    "SOLUTION_CAP",
    "build_constraints",
    "solve_all",
    "variability_report",
    "microdata_from_solution",
    "constraint_system_to_json",
    "constraint_system_from_json",
]

SOLUTION_CAP = 100000


class UnboundedSystemError(ValueError):
    """Some variable appears in no equation, so solutions are infinite."""


@dataclass(frozen=True)
class Equation:
    """sum of the named variables == total (all coefficients are 1)."""

    label: str
    variables: tuple[int, ...]
    total: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "variables", tuple(sorted(set(self.variables))))
        if self.total < 0:
            raise ValueError(f"{self.label}: negative total {self.total}")


@dataclass(frozen=True)
class ConstraintSystem:
    schema: Schema
    geography: tuple[tuple[str, str], ...]
    variables: tuple[tuple[str, int], ...]  # (block, schema cell index)
    equations: tuple[Equation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "geography", tuple(tuple(g) for g in self.geography))
        object.__setattr__(self, "variables", tuple(tuple(v) for v in self.variables))
        object.__setattr__(self, "equations", tuple(self.equations))

    def variable_index(self, block: str, cell: int) -> int:
        return self.variables.index((block, cell))

    @property
    def blocks(self) -> tuple[str, ...]:
        return tuple(b for b, _ in self.geography)


@dataclass(frozen=True)
class SolutionSet:
    """Every consistent assignment found; count_is_exact is False only when
    the enumeration stopped at the cap."""

    solutions: tuple[tuple[int, ...], ...]
    count_is_exact: bool

    @property
    def count(self) -> int:
        return len(self.solutions)


@dataclass(frozen=True)
class VariableSummary:
    block: str
    cell: tuple[int, ...]  # (sex, age bin, race, ethnicity)
    low: int
    high: int
    pinned: bool


def _cells_matching(schema: Schema, table: Table) -> dict[tuple[int, ...], list[int]]:
    """Schema cells consistent with each released margin tuple.

    The table's age bins may be coarser than the schema's; each schema bin
    must nest inside exactly one table bin or the mapping is rejected.
    """
    spec = table.spec
    bins = schema.age_bins
    if "age_bin" in spec.margin:
        assert spec.age_bins is not None
        if not bins.refines(spec.age_bins):
            raise ValueError(
                f"table {spec.name}: age bins do not align with the reconstruction schema"
            )
    out: dict[tuple[int, ...], list[int]] = {}
    for cell in range(schema.cells):
        sex, age_bin, race, eth = schema.cell_key(cell)
        margin = []
        for attr in spec.margin:
            if attr == "sex":
                margin.append(sex)
            elif attr == "age_bin":
                margin.append(spec.age_bins.index_of(bins.representative(age_bin)))
            elif attr == "race":
                margin.append(race)
            else:
                margin.append(eth)
        out.setdefault(tuple(margin), []).append(cell)
    return out


def build_constraints(
    schema: Schema,
    geography: Sequence[tuple[str, str]],
    tables: Sequence[Table],
    invariants: Mapping[str, tuple[int, int]] | None = None,
    voting_age: int = VOTING_AGE,
) -> ConstraintSystem:
    """Equations from published tables plus optional per-block invariants.

    invariants maps block -> (population, voting-age population).  Voting-age
    equations need every schema age bin to fall entirely on one side of the
    voting age; a straddling bin is a modeling error and is rejected.
    """
    geography = tuple(sorted(dict(geography).items()))
    blocks = [b for b, _ in geography]
    regions: dict[str, list[str]] = {}
    for b, r in geography:
        regions.setdefault(r, []).append(b)

    variables = tuple((b, c) for b in blocks for c in range(schema.cells))
    index = {v: i for i, v in enumerate(variables)}
    equations: list[Equation] = []

    for table in tables:
        matching = _cells_matching(schema, table)
        for geo, margin, count in table.cells:
            if count is None:
                continue  # suppressed: publishes nothing
            if table.spec.group_by == "block":
                if geo not in blocks:
                    raise ValueError(f"table {table.spec.name}: unknown block {geo}")
                geo_blocks = [geo]
            else:
                if geo not in regions:
                    raise ValueError(f"table {table.spec.name}: unknown region {geo}")
                geo_blocks = regions[geo]
            vars_ = [index[(b, c)] for b in geo_blocks for c in matching.get(margin, ())]
            equations.append(
                Equation(
                    label=f"table:{table.spec.name}:{geo}:{','.join(map(str, margin))}",
                    variables=tuple(vars_),
                    total=count,
                )
            )

    if invariants is not None:
        adult_cells = []
        for cell in range(schema.cells):
            _, age_bin, _, _ = schema.cell_key(cell)
            lo, hi = schema.age_bins.bins[age_bin]
            if lo < voting_age <= hi:
                raise ValueError(
                    f"schema age bin [{lo},{hi}] straddles the voting age {voting_age}"
                )
            if lo >= voting_age:
                adult_cells.append(cell)
        for block, (population, voting) in sorted(invariants.items()):
            if block not in blocks:
                raise ValueError(f"invariant for unknown block {block}")
            equations.append(
                Equation(
                    label=f"invariant:population:{block}",
                    variables=tuple(index[(block, c)] for c in range(schema.cells)),
                    total=population,
                )
            )
            equations.append(
                Equation(
                    label=f"invariant:voting_age:{block}",
                    variables=tuple(index[(block, c)] for c in adult_cells),
                    total=voting,
                )
            )

    covered = {v for eq in equations for v in eq.variables}
    free = [variables[i] for i in range(len(variables)) if i not in covered]
    if free:
        names = ", ".join(f"{b}:cell{c}" for b, c in free[:5])
        raise UnboundedSystemError(
            f"{len(free)} variables appear in no equation (first: {names}); "
            "solution count is infinite"
        )
    return ConstraintSystem(
        schema=schema, geography=geography, variables=variables, equations=equations
    )


def _propagate(
    eq_vars: Sequence[tuple[int, ...]],
    residual: list[int],
    lows: list[int],
    highs: list[int],
) -> bool:
    """Interval fixpoint: x <= residual, x >= residual - sum of other highs.
    Returns False on contradiction."""
    changed = True
    while changed:
        changed = False
        for e, vars_ in enumerate(eq_vars):
            unassigned = [v for v in vars_ if lows[v] != highs[v]]
            r = residual[e] - sum(lows[v] for v in vars_ if lows[v] == highs[v])
            if r < 0:
                return False
            if not unassigned:
                if r != 0:
                    return False
                continue
            high_sum = sum(highs[v] for v in unassigned)
            low_sum = sum(lows[v] for v in unassigned)
            if low_sum > r or high_sum < r:
                return False
            for v in unassigned:
                new_high = min(highs[v], r - (low_sum - lows[v]))
                new_low = max(lows[v], r - (high_sum - highs[v]))
                if new_low > new_high:
                    return False
                if new_high < highs[v]:
                    highs[v] = new_high
                    changed = True
                if new_low > lows[v]:
                    lows[v] = new_low
                    changed = True
    return True


def solve_all(system: ConstraintSystem, solution_cap: int = SOLUTION_CAP) -> SolutionSet:
    """Enumerate every nonnegative integer solution, smallest-range variable
    first, values ascending; each completed assignment is re-verified against
    the raw equations before being admitted."""
    n = len(system.variables)
    eq_vars = [eq.variables for eq in system.equations]
    totals = [eq.total for eq in system.equations]

    solutions: list[tuple[int, ...]] = []
    capped = False

    def verify(assignment: Sequence[int]) -> bool:
        return all(
            sum(assignment[v] for v in eq.variables) == eq.total for eq in system.equations
        )

    def search(lows: list[int], highs: list[int]) -> bool:
        """Returns False when the cap was hit and the search must stop."""
        nonlocal capped
        open_vars = [v for v in range(n) if lows[v] != highs[v]]
        if not open_vars:
            assignment = tuple(lows)
            if verify(assignment):
                solutions.append(assignment)
                if len(solutions) >= solution_cap:
                    capped = True
                    return False
            return True
        pick = min(open_vars, key=lambda v: (highs[v] - lows[v], v))
        for value in range(lows[pick], highs[pick] + 1):
            next_lows = list(lows)
            next_highs = list(highs)
            next_lows[pick] = next_highs[pick] = value
            if not _propagate(eq_vars, list(totals), next_lows, next_highs):
                continue
            if not search(next_lows, next_highs):
                return False
        return True

    covering = [[eq.total for eq in system.equations if v in eq.variables] for v in range(n)]
    if any(not c for c in covering):
        raise UnboundedSystemError("some variable appears in no equation")
    lows = [0] * n
    highs = [min(c) for c in covering]
    if _propagate(eq_vars, list(totals), lows, highs):
        search(lows, highs)
    return SolutionSet(solutions=tuple(sorted(solutions)), count_is_exact=not capped)


def variability_report(system: ConstraintSystem, found: SolutionSet) -> tuple[VariableSummary, ...]:
    """Per-variable range over the found solutions; pinned means every
    consistent world agrees on the value (only meaningful when the count is
    exact)."""
    if not found.solutions:
        return ()
    out = []
    for i, (block, cell) in enumerate(system.variables):
        values = [s[i] for s in found.solutions]
        lo, hi = min(values), max(values)
        out.append(
            VariableSummary(
                block=block,
                cell=system.schema.cell_key(cell),
                low=lo,
                high=hi,
                pinned=found.count_is_exact and lo == hi,
            )
        )
    return tuple(out)


def microdata_from_solution(system: ConstraintSystem, assignment: Sequence[int]) -> Dataset:
    """One concrete microdata set realizing a solution (bin-representative ages)."""
    if len(assignment) != len(system.variables):
        raise ValueError("assignment length does not match the variable list")
    persons = []
    counter = itertools.count()
    for (block, cell), value in zip(system.variables, assignment):
        sex, age_bin, race, eth = system.schema.cell_key(cell)
        for _ in range(value):
            persons.append(
                Person(
                    id=f"recon-{next(counter):04d}",
                    block=block,
                    sex=sex,
                    age=system.schema.age_bins.representative(age_bin),
                    race=race,
                    ethnicity=eth,
                )
            )
    return Dataset(tuple(persons), system.geography)


# --- serialization -----------------------------------------------------------


def constraint_system_to_json(system: ConstraintSystem) -> str:
    return json.dumps(
        {
            "schema": _schema_to_json(system.schema),
            "geography": [list(pair) for pair in system.geography],
            "variables": [[b, c] for b, c in system.variables],
            "equations": [
                {"label": eq.label, "variables": list(eq.variables), "total": eq.total}
                for eq in system.equations
            ],
        },
        indent=2,
    )


def constraint_system_from_json(text: str) -> ConstraintSystem:
    obj = json.loads(text)
    return ConstraintSystem(
        schema=_schema_from_json(obj["schema"]),
        geography=tuple((b, r) for b, r in obj["geography"]),
        variables=tuple((b, int(c)) for b, c in obj["variables"]),
        equations=tuple(
            Equation(label=e["label"], variables=tuple(e["variables"]), total=int(e["total"]))
            for e in obj["equations"]
        ),
    )
