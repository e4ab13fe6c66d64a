"""Shared builders for hand-crafted test instances."""

from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from rosterga.model import Instance, Nurse, ShiftPattern


def pattern_from_slots(slots) -> ShiftPattern:
    cover = [0] * 14
    for k in slots:
        cover[k] = 1
    return ShiftPattern(tuple(cover))


def subset_patterns(day_sizes=(), night_sizes=(), splits=()) -> list[ShiftPattern]:
    """All day/night subset patterns of the given sizes plus combined splits,
    enumerated lexicographically by slot tuple."""
    pats = []
    for size in day_sizes:
        for combo in combinations(range(0, 7), size):
            pats.append(pattern_from_slots(combo))
    for size in night_sizes:
        for combo in combinations(range(7, 14), size):
            pats.append(pattern_from_slots(combo))
    for d, n in splits:
        for dc in combinations(range(0, 7), d):
            for nc in combinations(range(7, 14), n):
                pats.append(pattern_from_slots(dc + nc))
    return pats


def flat_demand(value: int, grades: int = 1) -> tuple[tuple[int, ...], ...]:
    return tuple((value,) * grades for _ in range(14))


def make_instance(nurses, patterns, demand=None, grades=1, name="test") -> Instance:
    if demand is None:
        demand = flat_demand(0, grades)
    return Instance(
        name=name,
        grades=grades,
        demand=tuple(tuple(row) for row in demand),
        patterns=tuple(patterns),
        nurses=tuple(nurses),
    )


def random_instance(rng: np.random.Generator, n=4, grades=2, demand_max=2) -> Instance:
    """Small random instance, independent of the shipped generator."""
    patterns = subset_patterns(day_sizes=(2, 3), night_sizes=(2,))
    nurses = []
    for _ in range(n):
        days = int(rng.integers(2, 4))
        costs = {}
        for j, pat in enumerate(patterns):
            if (pat.kind == "day" and pat.day_count == days) or (
                pat.kind == "night" and pat.night_count == 2
            ):
                costs[j] = int(rng.integers(0, 101))
        nurses.append(
            Nurse(
                grade=int(rng.integers(1, grades + 1)),
                days=days,
                nights=2,
                preference=str(rng.choice(["day", "night"])),
                costs=costs,
            )
        )
    demand = tuple(
        tuple(int(rng.integers(0, demand_max + 1)) for _ in range(grades)) for _ in range(14)
    )
    return make_instance(nurses, patterns, demand=demand, grades=grades)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
