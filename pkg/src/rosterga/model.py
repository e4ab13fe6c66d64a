"""Problem data model: ward instances, shift patterns, schedules, coverage and fitness.

A week has 14 slots: indices 0..6 are the day shifts Sunday..Saturday and
7..13 the night shifts Sunday..Saturday.  Grades are 1-based with 1 the
highest; a nurse of grade g counts towards demand at every grade s >= g.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, InstanceInvalid, ScheduleInvalid

N_SLOTS = 14
DAY_SLOTS = tuple(range(0, 7))
NIGHT_SLOTS = tuple(range(7, 14))

KIND_DAY = "day"
KIND_NIGHT = "night"
KIND_COMBINED = "combined"


@dataclass(frozen=True)
class ShiftPattern:
    """A weekly work pattern: a binary cover vector over the 14 day/night slots."""

    cover: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.cover) != N_SLOTS:
            raise InstanceInvalid(f"pattern needs {N_SLOTS} slots, got {len(self.cover)}")
        if any(c not in (0, 1) for c in self.cover):
            raise InstanceInvalid("pattern cover entries must be 0 or 1")
        if not any(self.cover):
            raise InstanceInvalid("pattern covers no slot")

    @classmethod
    def from_string(cls, bits: str) -> ShiftPattern:
        if len(bits) != N_SLOTS or any(b not in "01" for b in bits):
            raise InstanceInvalid(f"pattern string must be 14 chars of 0/1, got {bits!r}")
        return cls(tuple(int(b) for b in bits))

    def to_string(self) -> str:
        return "".join(str(b) for b in self.cover)

    @property
    def day_count(self) -> int:
        return sum(self.cover[k] for k in DAY_SLOTS)

    @property
    def night_count(self) -> int:
        return sum(self.cover[k] for k in NIGHT_SLOTS)

    @property
    def kind(self) -> str:
        if self.night_count == 0:
            return KIND_DAY
        if self.day_count == 0:
            return KIND_NIGHT
        return KIND_COMBINED


@dataclass(frozen=True)
class Nurse:
    """One nurse's contract, qualifications and pattern preferences.

    `days`/`nights` are the weekly shift counts if the nurse works days or
    nights respectively.  A nurse with `both` set is a special-type worker
    whose week mixes exactly `days` day shifts and `nights` night shifts
    (`both == days + nights`); everyone else works a single side only.
    `costs` maps pattern index to a preference cost in 0..100 (missing
    entries read as 0); `unavailable` lists patterns the nurse may never
    work regardless of contract fit.
    """

    grade: int
    days: int
    nights: int
    both: int | None = None
    preference: str = KIND_DAY
    costs: Mapping[int, int] = field(default_factory=dict)
    unavailable: frozenset[int] = frozenset()

    def __post_init__(self) -> None:
        if self.grade < 1:
            raise InstanceInvalid(f"grade must be >= 1, got {self.grade}")
        if not (0 <= self.days <= 7 and 0 <= self.nights <= 7):
            raise InstanceInvalid("days and nights must be within 0..7")
        if self.both is not None and self.both != self.days + self.nights:
            raise InstanceInvalid(
                f"special nurse must have both == days + nights, got {self.both} != {self.days + self.nights}"
            )
        if self.preference not in (KIND_DAY, KIND_NIGHT):
            raise InstanceInvalid(f"preference must be 'day' or 'night', got {self.preference!r}")
        for j, c in self.costs.items():
            if not (0 <= c <= 100):
                raise InstanceInvalid(f"preference cost for pattern {j} out of 0..100: {c}")

    @property
    def is_special(self) -> bool:
        return self.both is not None

    def qualifies(self, grade: int) -> bool:
        """True when this nurse counts towards demand at the given grade."""
        return self.grade <= grade

    def cost_of(self, pattern_index: int) -> int:
        return self.costs.get(pattern_index, 0)


def feasible_patterns(nurse: Nurse, patterns: Sequence[ShiftPattern]) -> tuple[int, ...]:
    """Indices of the patterns this nurse may work under their contract.

    Standard nurses match day patterns with exactly `days` shifts or night
    patterns with exactly `nights` shifts; special nurses match combined
    patterns whose day/night split equals their contract.  Patterns flagged
    unavailable are excluded.  Raises InstanceInvalid when nothing matches.
    """
    out = []
    for j, pat in enumerate(patterns):
        if j in nurse.unavailable:
            continue
        kind = pat.kind
        if nurse.is_special:
            ok = (
                kind == KIND_COMBINED
                and pat.day_count == nurse.days
                and pat.night_count == nurse.nights
            )
        else:
            ok = (kind == KIND_DAY and pat.day_count == nurse.days) or (
                kind == KIND_NIGHT and pat.night_count == nurse.nights
            )
        if ok:
            out.append(j)
    if not out:
        raise InstanceInvalid("nurse has no feasible shift pattern")
    return tuple(out)


@dataclass(frozen=True)
class Instance:
    """A complete weekly rostering problem.

    `demand[k][s]` is the number of nurses of grade s+1 or higher required
    on slot k.  Feasible pattern sets are computed once at construction;
    an empty set for any nurse is rejected.
    """

    name: str
    grades: int
    demand: tuple[tuple[int, ...], ...]
    patterns: tuple[ShiftPattern, ...]
    nurses: tuple[Nurse, ...]

    def __post_init__(self) -> None:
        if self.grades < 1:
            raise InstanceInvalid("need at least one grade")
        if len(self.demand) != N_SLOTS:
            raise InstanceInvalid(f"demand must have {N_SLOTS} rows, got {len(self.demand)}")
        for k, row in enumerate(self.demand):
            if len(row) != self.grades:
                raise InstanceInvalid(f"demand row {k} must have {self.grades} entries, got {len(row)}")
            if any(r < 0 for r in row):
                raise InstanceInvalid(f"demand row {k} has a negative entry")
        if not self.patterns:
            raise InstanceInvalid("instance has no shift patterns")
        if not self.nurses:
            raise InstanceInvalid("instance has no nurses")
        m = len(self.patterns)
        fsets = []
        for i, nurse in enumerate(self.nurses):
            if nurse.grade > self.grades:
                raise InstanceInvalid(f"nurse {i} has grade {nurse.grade} > {self.grades}")
            for j in nurse.costs:
                if not (0 <= j < m):
                    raise InstanceInvalid(f"nurse {i} has a cost for unknown pattern {j}")
            for j in nurse.unavailable:
                if not (0 <= j < m):
                    raise InstanceInvalid(f"nurse {i} marks unknown pattern {j} unavailable")
            try:
                fsets.append(feasible_patterns(nurse, self.patterns))
            except InstanceInvalid as exc:
                raise InstanceInvalid(f"nurse {i}: {exc}") from None
        object.__setattr__(self, "_feasible", tuple(fsets))
        object.__setattr__(
            self, "_demand_arr", np.array(self.demand, dtype=np.int64).reshape(N_SLOTS, self.grades)
        )

    @property
    def n(self) -> int:
        return len(self.nurses)

    @property
    def m(self) -> int:
        return len(self.patterns)

    def feasible(self, i: int) -> tuple[int, ...]:
        """Feasible pattern indices for nurse i (ascending)."""
        return self._feasible[i]  # type: ignore[attr-defined]

    def demand_array(self) -> np.ndarray:
        """Demand as a fresh (14, grades) int array."""
        return self._demand_arr.copy()  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Schedule:
    """One chosen pattern index per nurse."""

    assignment: tuple[int, ...]


class CoverageState:
    """Running qualified cover for a (possibly partial) schedule.

    `supplied[k, s]` counts scheduled nurses of grade s+1 or higher covering
    slot k; `undercover` is the remaining shortfall against demand.  Mutable:
    a decoder owns one instance per decode and feeds it nurse by nurse.
    """

    def __init__(self, demand: np.ndarray):
        self.demand = demand
        self.supplied = np.zeros_like(demand)

    @property
    def undercover(self) -> np.ndarray:
        return np.maximum(self.demand - self.supplied, 0)

    @property
    def total_undercover(self) -> int:
        return int(self.undercover.sum())

    def add(self, nurse: Nurse, pattern: ShiftPattern) -> None:
        cov = np.fromiter(pattern.cover, dtype=np.int64, count=N_SLOTS)
        self.supplied[:, nurse.grade - 1 :] += cov[:, None]

    def remove(self, nurse: Nurse, pattern: ShiftPattern) -> None:
        cov = np.fromiter(pattern.cover, dtype=np.int64, count=N_SLOTS)
        self.supplied[:, nurse.grade - 1 :] -= cov[:, None]

    def copy(self) -> CoverageState:
        dup = CoverageState(self.demand)
        dup.supplied = self.supplied.copy()
        return dup


def _assignment_of(schedule: Schedule | Sequence[int | None]) -> Sequence[int | None]:
    if isinstance(schedule, Schedule):
        return schedule.assignment
    return schedule


def coverage(schedule: Schedule | Sequence[int | None], instance: Instance) -> CoverageState:
    """Coverage achieved by a schedule; unassigned (None) entries are skipped.

    Raises ScheduleInvalid if any assigned pattern is outside the nurse's
    feasible set.
    """
    assignment = _assignment_of(schedule)
    if len(assignment) > instance.n:
        raise ScheduleInvalid(f"schedule has {len(assignment)} entries for {instance.n} nurses")
    state = CoverageState(instance.demand_array())
    for i, j in enumerate(assignment):
        if j is None:
            continue
        if j not in instance.feasible(i):
            raise ScheduleInvalid(f"nurse {i} assigned pattern {j} outside their feasible set")
        state.add(instance.nurses[i], instance.patterns[j])
    return state


def solution_cost(schedule: Schedule | Sequence[int], instance: Instance) -> int:
    """Total preference cost of a complete schedule."""
    assignment = _assignment_of(schedule)
    if len(assignment) != instance.n:
        raise ScheduleInvalid(f"expected {instance.n} assignments, got {len(assignment)}")
    total = 0
    for i, j in enumerate(assignment):
        if j is None or j not in instance.feasible(i):
            raise ScheduleInvalid(f"nurse {i} assigned pattern {j} outside their feasible set")
        total += instance.nurses[i].cost_of(j)
    return total


def fitness(
    schedule: Schedule | Sequence[int], instance: Instance, w_demand: float = 20.0
) -> float:
    """Preference cost plus `w_demand` times the total uncovered demand."""
    if w_demand < 0:
        raise ConfigInvalid(f"penalty weight must be >= 0, got {w_demand}")
    cost = solution_cost(schedule, instance)
    shortfall = coverage(schedule, instance).total_undercover
    return cost + w_demand * shortfall


def is_feasible(schedule: Schedule | Sequence[int], instance: Instance) -> bool:
    """True when every demand cell is fully covered."""
    return coverage(schedule, instance).total_undercover == 0
