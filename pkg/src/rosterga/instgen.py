"""Synthetic ward generator and instance files.

Instances come in two flavours.  Planted mode first rosters every nurse at
random, takes the resulting cover as supply, and thins it into the demand
matrix, so a feasible roster is guaranteed to exist and ships with the
instance as a witness.  Random mode draws demand up to a counting bound
instead and makes no promises.  `tightness` scales demand in both modes:
1.0 reproduces the planted supply exactly, 0.0 asks for nothing.

Costs are skewed small with a configurable fraction of exact zeros, and each
nurse's planted pattern is heavily discounted, which gives preference cost a
real optimum to pull towards while keeping it in tension with coverage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, ParseError, RosterError
from .model import (
    DAY_SLOTS,
    Instance,
    N_SLOTS,
    NIGHT_SLOTS,
    Nurse,
    ShiftPattern,
    solution_cost,
)


@dataclass(frozen=True)
class GenParams:
    """Generator knobs; defaults produce a full-scale three-grade ward."""

    nurses: int = 30
    grades: int = 3
    days_choices: tuple[int, ...] = (4, 5)
    nights_choices: tuple[int, ...] = (3, 4)
    special_fraction: float = 0.08
    special_days: tuple[int, ...] = (1, 2)
    special_nights: tuple[int, ...] = (1, 2)
    tightness: float = 0.9
    planted: bool = True
    day_bias: float = 0.72
    zero_cost_fraction: float = 0.12
    planted_cost_max: int = 3
    cost_beta: tuple[float, float] = (2.0, 5.0)
    cost_quantum: int = 1
    universe_cap: int | None = None
    combined_cap: int = 40
    seed: int = 0
    name: str | None = None

    def __post_init__(self) -> None:
        if self.nurses < 1 or self.grades < 1:
            raise ConfigInvalid("need at least one nurse and one grade")
        if not 0.0 <= self.tightness <= 1.0:
            raise ConfigInvalid("tightness must be in [0, 1]")
        if not 0.0 <= self.special_fraction <= 1.0:
            raise ConfigInvalid("special_fraction must be in [0, 1]")
        if not 0.0 <= self.zero_cost_fraction <= 1.0:
            raise ConfigInvalid("zero_cost_fraction must be in [0, 1]")
        if not self.days_choices or not self.nights_choices:
            raise ConfigInvalid("contract menus must be nonempty")
        if self.special_fraction > 0 and not (self.special_days and self.special_nights):
            raise ConfigInvalid("special nurses need combined pattern sizes")
        if self.planted_cost_max < 0:
            raise ConfigInvalid("planted_cost_max must be >= 0")
        if self.cost_quantum < 1:
            raise ConfigInvalid("cost_quantum must be >= 1")
        if self.universe_cap is not None and self.universe_cap < 1:
            raise ConfigInvalid("universe_cap must be >= 1 when set")
        if self.combined_cap < 1:
            raise ConfigInvalid("combined_cap must be >= 1")


@dataclass(frozen=True)
class GeneratedInstance:
    """An instance plus, in planted mode, the roster that seeded its demand."""

    instance: Instance
    planted: tuple[int, ...] | None

    @property
    def planted_cost(self) -> int | None:
        if self.planted is None:
            return None
        return solution_cost(self.planted, self.instance)


def _sample_block(rng, slots, size, cap):
    """Subsets of `slots` of the given size, optionally a sampled sub-list."""
    combos = list(combinations(slots, size))
    if cap is not None and len(combos) > cap:
        picked = sorted(rng.choice(len(combos), size=cap, replace=False).tolist())
        combos = [combos[t] for t in picked]
    return combos


def _cover_of(slots) -> tuple[int, ...]:
    cover = [0] * N_SLOTS
    for k in slots:
        cover[k] = 1
    return tuple(cover)


def generate(params: GenParams) -> GeneratedInstance:
    """Build one instance deterministically from the parameter seed."""
    rng = np.random.default_rng(params.seed)
    p = params.grades

    grade_w = np.arange(1, p + 1, dtype=np.float64)
    grade_w /= grade_w.sum()
    contracts = []
    for _ in range(params.nurses):
        grade = int(rng.choice(p, p=grade_w)) + 1
        if params.special_fraction > 0 and rng.random() < params.special_fraction:
            days = int(rng.choice(params.special_days))
            nights = int(rng.choice(params.special_nights))
            contracts.append((grade, days, nights, True))
        else:
            days = int(rng.choice(params.days_choices))
            nights = int(rng.choice(params.nights_choices))
            contracts.append((grade, days, nights, False))

    day_sizes = sorted({d for _, d, _, sp in contracts if not sp})
    night_sizes = sorted({n for _, _, n, sp in contracts if not sp})
    splits = sorted({(d, n) for _, d, n, sp in contracts if sp})

    covers: list[tuple[int, ...]] = []
    blocks: dict[tuple, list[int]] = {}

    def add_block(key, combos):
        indices = []
        for combo in combos:
            indices.append(len(covers))
            covers.append(_cover_of(combo))
        blocks[key] = indices

    for size in day_sizes:
        add_block(("day", size), _sample_block(rng, DAY_SLOTS, size, params.universe_cap))
    for size in night_sizes:
        add_block(("night", size), _sample_block(rng, NIGHT_SLOTS, size, params.universe_cap))
    for d, n in splits:
        pairs = [
            dc + nc
            for dc in combinations(DAY_SLOTS, d)
            for nc in combinations(NIGHT_SLOTS, n)
        ]
        if len(pairs) > params.combined_cap:
            picked = sorted(rng.choice(len(pairs), size=params.combined_cap, replace=False).tolist())
            pairs = [pairs[t] for t in picked]
        add_block(("comb", d, n), pairs)

    planted_idx: list[int] | None = None
    supplied = np.zeros((N_SLOTS, p), dtype=np.int64)
    if params.planted:
        planted_idx = []
        for grade, days, nights, special in contracts:
            if special:
                block = blocks[("comb", days, nights)]
            elif rng.random() < params.day_bias:
                block = blocks[("day", days)]
            else:
                block = blocks[("night", nights)]
            j = block[int(rng.integers(len(block)))]
            planted_idx.append(j)
            cov = np.array(covers[j], dtype=np.int64)
            supplied[:, grade - 1:] += cov[:, None]
        demand = rng.binomial(supplied, params.tightness)
    else:
        # counting bound: nurses who could possibly stand on each slot
        reach = np.zeros((N_SLOTS, p), dtype=np.int64)
        for grade, days, nights, special in contracts:
            can = np.zeros(N_SLOTS, dtype=np.int64)
            for cover in covers:
                pat = ShiftPattern(cover)
                if _fits(pat, days, nights, special):
                    can |= np.array(cover, dtype=np.int64)
            reach[:, grade - 1:] += can[:, None]
        cap = np.floor(reach * params.tightness).astype(np.int64)
        demand = rng.integers(0, cap + 1)
    demand = np.maximum.accumulate(demand, axis=1)

    patterns = tuple(ShiftPattern(c) for c in covers)
    nurses = []
    for i, (grade, days, nights, special) in enumerate(contracts):
        costs: dict[int, int] = {}
        day_costs, night_costs = [], []
        for j, pat in enumerate(patterns):
            if not _fits(pat, days, nights, special):
                continue
            if planted_idx is not None and planted_idx[i] == j:
                c = int(rng.integers(0, params.planted_cost_max + 1))
            elif rng.random() < params.zero_cost_fraction:
                c = 0
            else:
                c = int(100 * rng.beta(*params.cost_beta))
                c -= c % params.cost_quantum
            if c:
                costs[j] = c
            if pat.kind == "day":
                day_costs.append(c)
            elif pat.kind == "night":
                night_costs.append(c)
        if day_costs and night_costs:
            pref = "day" if float(np.mean(day_costs)) <= float(np.mean(night_costs)) else "night"
        else:
            pref = "day"
        nurses.append(
            Nurse(
                grade=grade,
                days=days,
                nights=nights,
                both=days + nights if special else None,
                preference=pref,
                costs=costs,
            )
        )

    instance = Instance(
        name=params.name or f"gen{params.seed}",
        grades=p,
        demand=tuple(tuple(int(x) for x in row) for row in demand),
        patterns=patterns,
        nurses=tuple(nurses),
    )
    return GeneratedInstance(
        instance=instance,
        planted=tuple(planted_idx) if planted_idx is not None else None,
    )


def _fits(pattern: ShiftPattern, days: int, nights: int, special: bool) -> bool:
    if special:
        return pattern.kind == "combined" and pattern.day_count == days and pattern.night_count == nights
    if pattern.kind == "day":
        return pattern.day_count == days
    if pattern.kind == "night":
        return pattern.night_count == nights
    return False


# ----------------------------------------------------------------- corpora


SMALL_CORPUS_SIZE = 50
FULL_CORPUS_SIZE = 52
_BANDS = (
    ("loose", (0.60, 0.65, 0.70)),
    ("medium", (0.78, 0.84, 0.90)),
    ("tight", (0.94, 0.97, 1.00)),
)


def small_corpus(count: int = SMALL_CORPUS_SIZE, seed0: int = 5000) -> list[GeneratedInstance]:
    """Planted instances small enough for the exact solvers to close."""
    out = []
    for t in range(count):
        params = GenParams(
            nurses=3 + t % 4,
            grades=2,
            days_choices=(2, 3),
            nights_choices=(2,),
            special_fraction=0.1,
            special_days=(1,),
            special_nights=(1,),
            tightness=(0.75, 0.85, 0.95)[t % 3],
            universe_cap=5,
            combined_cap=5,
            seed=seed0 + t,
            name=f"small-{t:02d}",
        )
        out.append(generate(params))
    return out


def full_corpus(count: int = FULL_CORPUS_SIZE, seed0: int = 9000) -> list[GeneratedInstance]:
    """Full-scale planted corpus in three demand-tightness bands."""
    per_band = [count // 3, count // 3, count - 2 * (count // 3)]
    out = []
    t = 0
    for (band, tvals), band_count in zip(_BANDS, per_band):
        for b in range(band_count):
            params = GenParams(
                tightness=tvals[b % len(tvals)],
                universe_cap=13,
                combined_cap=20,
                planted_cost_max=0,
                cost_quantum=5,
                seed=seed0 + t,
                name=f"full-{band}-{t:02d}",
            )
            out.append(generate(params))
            t += 1
    return out


# --------------------------------------------------------------- disk form


def _instance_payload(instance: Instance, planted: tuple[int, ...] | None) -> dict:
    payload = {
        "name": instance.name,
        "grades": instance.grades,
        "demand": [list(row) for row in instance.demand],
        "patterns": [pat.to_string() for pat in instance.patterns],
        "nurses": [
            {
                "grade": nu.grade,
                "days": nu.days,
                "nights": nu.nights,
                "both": nu.both,
                "preference": nu.preference,
                "costs": {str(j): c for j, c in sorted(nu.costs.items())},
                "unavailable": sorted(nu.unavailable),
            }
            for nu in instance.nurses
        ],
    }
    if planted is not None:
        payload["planted"] = list(planted)
    return payload


def write_instance(target: Instance | GeneratedInstance, path: str | Path) -> None:
    """Serialise to JSON with a stable byte layout."""
    if isinstance(target, GeneratedInstance):
        instance, planted = target.instance, target.planted
    else:
        instance, planted = target, None
    text = json.dumps(_instance_payload(instance, planted), sort_keys=True,
                      separators=(",", ":")) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def read_instance(path: str | Path) -> GeneratedInstance:
    """Load an instance file; the planted roster is kept when present."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from None
    try:
        nurses = tuple(
            Nurse(
                grade=entry["grade"],
                days=entry["days"],
                nights=entry["nights"],
                both=entry.get("both"),
                preference=entry.get("preference", "day"),
                costs={int(j): int(c) for j, c in entry.get("costs", {}).items()},
                unavailable=frozenset(entry.get("unavailable", ())),
            )
            for entry in raw["nurses"]
        )
        instance = Instance(
            name=raw["name"],
            grades=raw["grades"],
            demand=tuple(tuple(int(x) for x in row) for row in raw["demand"]),
            patterns=tuple(ShiftPattern.from_string(s) for s in raw["patterns"]),
            nurses=nurses,
        )
        planted = tuple(int(x) for x in raw["planted"]) if "planted" in raw else None
    except (KeyError, TypeError, ValueError, RosterError) as exc:
        raise ParseError(f"{path}: bad instance payload: {exc!r}") from None
    return GeneratedInstance(instance=instance, planted=planted)
