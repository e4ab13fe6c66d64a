"""Schedule-building decoders: turn a permutation of nurses into a schedule.

Three builders are provided.  The cover decoder chases the largest remaining
shortfall slot by slot; the contribution decoder scores whole patterns against
still-needed slots (binary need); the combined decoder scores against shortfall
counts.  All three walk the permutation once and assign each nurse exactly one
feasible pattern, so constraint handling beyond coverage happens in the
fitness penalty, not here.

Tie-breaking is deterministic: pattern scores resolve to the first maximum in
the nurse's visit order, and slot selection resolves Sunday-first.  Randomised
visit orders are drawn once per run (see `build_orderings`) and reused by
every decode in that run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid
from .model import (
    DAY_SLOTS,
    KIND_COMBINED,
    KIND_DAY,
    KIND_NIGHT,
    N_SLOTS,
    NIGHT_SLOTS,
    CoverageState,
    Instance,
    Nurse,
    Schedule,
)

_KIND_CODES = {KIND_DAY: 0, KIND_NIGHT: 1, KIND_COMBINED: 2}


class DecoderKind(str, enum.Enum):
    COVER = "cover"
    CONTRIBUTION = "contribution"
    COMBINED = "combined"


class OrderingKind(str, enum.Enum):
    LEXICO = "lexico"
    RAND_ORDER = "rand-order"
    BIASED = "biased"
    RAND_COST = "rand-cost"
    CHEAPEST = "cheapest"


@dataclass(frozen=True)
class ScoreWeights:
    """Per-grade cover weights plus the preference-cost weight."""

    grade: tuple[float, ...] = (8.0, 2.0, 1.0)
    preference: float = 1.0

    def __post_init__(self) -> None:
        if any(w < 0 for w in self.grade) or self.preference < 0:
            raise ConfigInvalid("score weights must be >= 0")

    @classmethod
    def default_for(cls, kind: DecoderKind) -> ScoreWeights:
        # The combined decoder is tuned with a halved preference weight.
        wp = 0.5 if kind == DecoderKind.COMBINED else 1.0
        return cls(preference=wp)

    def grade_vector(self, grades: int) -> np.ndarray:
        if len(self.grade) < grades:
            raise ConfigInvalid(
                f"need {grades} grade weights, got {len(self.grade)}"
            )
        return np.array(self.grade[:grades], dtype=np.float64)


@dataclass
class SimpleBound:
    """Prunes patterns costing more than the best feasible solution so far."""

    active: bool = False
    best_cost: int | None = None

    def allows(self, cost: int) -> bool:
        return not self.active or self.best_cost is None or cost <= self.best_cost

    def tighten(self, cost: int) -> bool:
        """Record a feasible cost; returns True when the bound got stricter."""
        if self.best_cost is None or cost < self.best_cost:
            self.best_cost = cost
            return True
        return False


@dataclass
class DecodeStats:
    """Counters for the rare fallback events inside a decode."""

    bound_fallbacks: int = 0
    cover_fallbacks: int = 0


class DecodeContext:
    """Per-instance arrays the decoders index into.

    Built once per instance and shared read-only by every decode, including
    parallel GA runs.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.grades = instance.grades
        self.demand = instance.demand_array()
        n = instance.n
        self.grade0 = np.array([nu.grade - 1 for nu in instance.nurses], dtype=np.int64)
        self.is_special = np.array([nu.is_special for nu in instance.nurses], dtype=bool)
        self.day_shifts = np.array([nu.days for nu in instance.nurses], dtype=np.int64)
        self.night_shifts = np.array([nu.nights for nu in instance.nurses], dtype=np.int64)
        self.prefers_day = np.array(
            [nu.preference == KIND_DAY for nu in instance.nurses], dtype=bool
        )
        self.fset: list[np.ndarray] = []
        self.cov: list[np.ndarray] = []
        self.cost: list[np.ndarray] = []
        self.kind_code: list[np.ndarray] = []
        for i in range(n):
            feas = np.array(instance.feasible(i), dtype=np.int64)
            self.fset.append(feas)
            self.cov.append(
                np.array([instance.patterns[j].cover for j in feas], dtype=np.int8)
            )
            self.cost.append(
                np.array([instance.nurses[i].cost_of(int(j)) for j in feas], dtype=np.int64)
            )
            self.kind_code.append(
                np.array([_KIND_CODES[instance.patterns[j].kind] for j in feas], dtype=np.int8)
            )

    @property
    def n(self) -> int:
        return self.instance.n

    def block_positions(self, i: int, code: int) -> np.ndarray:
        return np.flatnonzero(self.kind_code[i] == code)

    def gated_grade_weights(self, i: int, weights: ScoreWeights) -> np.ndarray:
        """Grade weight vector with tiers above the nurse's qualification zeroed."""
        w = weights.grade_vector(self.grades)
        return np.where(np.arange(self.grades) >= self.grade0[i], w, 0.0)


# ------------------------------------------------------------------ orderings


def build_ordering(ctx: DecodeContext, i: int, kind: OrderingKind, rng) -> np.ndarray:
    """Visit order for nurse i as positions into their feasible set.

    Lexico follows pattern-index order; cheapest sorts by ascending cost with
    lexicographic ties; rand-cost rotates the cheapest order to a random
    start; rand-order shuffles the day and night blocks independently
    (day block first); biased does the same but leads with the day block
    only 75% of the time.
    """
    size = len(ctx.fset[i])
    if kind == OrderingKind.LEXICO:
        return np.arange(size, dtype=np.int64)
    if kind == OrderingKind.CHEAPEST:
        return np.argsort(ctx.cost[i], kind="stable").astype(np.int64)
    if kind == OrderingKind.RAND_COST:
        by_cost = np.argsort(ctx.cost[i], kind="stable").astype(np.int64)
        start = int(rng.integers(size))
        return np.roll(by_cost, -start)
    if kind in (OrderingKind.RAND_ORDER, OrderingKind.BIASED):
        day = rng.permutation(ctx.block_positions(i, 0))
        night = rng.permutation(ctx.block_positions(i, 1))
        comb = rng.permutation(ctx.block_positions(i, 2))
        first, second = day, night
        if kind == OrderingKind.BIASED and not rng.random() < 0.75:
            first, second = night, day
        return np.concatenate([first, second, comb]).astype(np.int64)
    raise ConfigInvalid(f"unknown ordering kind {kind!r}")


def build_orderings(ctx: DecodeContext, kind: OrderingKind, rng) -> list[np.ndarray]:
    """One fixed visit order per nurse, drawn once and reused for a whole run."""
    return [build_ordering(ctx, i, kind, rng) for i in range(ctx.n)]


# ------------------------------------------------------------------- scoring


def pattern_score(
    nurse: Nurse,
    pattern_index: int,
    d: np.ndarray,
    weights: ScoreWeights,
    instance: Instance,
) -> float:
    """Score of one pattern for one nurse against a need matrix `d` (14 x grades).

    The pattern earns `w_s` per needed slot it covers at each grade the nurse
    qualifies for, plus the preference term scaled so cheaper patterns score
    higher.
    """
    cover = np.array(instance.patterns[pattern_index].cover, dtype=np.float64)
    w = weights.grade_vector(instance.grades)
    score = weights.preference * (100 - nurse.cost_of(pattern_index))
    d = np.asarray(d, dtype=np.float64)
    for s in range(instance.grades):
        if nurse.qualifies(s + 1):
            score += w[s] * float(cover @ d[:, s])
    return float(score)


def _need_matrix(cov: CoverageState, kind: DecoderKind) -> np.ndarray:
    under = cov.undercover
    if kind == DecoderKind.CONTRIBUTION:
        return (under > 0).astype(np.int64)
    return under


def greedy_select(
    i: int,
    cov: CoverageState,
    ctx: DecodeContext,
    kind: DecoderKind,
    weights: ScoreWeights,
    order: np.ndarray,
    bound: SimpleBound | None = None,
    stats: DecodeStats | None = None,
) -> int:
    """Pattern (global index) with the highest score, first-in-order on ties.

    With an active bound, patterns costing more than the incumbent feasible
    solution are skipped; if that empties the candidate set the bound is
    ignored for this nurse and the event counted.
    """
    d = _need_matrix(cov, kind)
    dv = d.astype(np.float64) @ ctx.gated_grade_weights(i, weights)
    scores = weights.preference * (100.0 - ctx.cost[i]) + ctx.cov[i] @ dv
    visit = order
    if bound is not None and bound.active and bound.best_cost is not None:
        allowed = ctx.cost[i][visit] <= bound.best_cost
        if allowed.any():
            visit = visit[allowed]
        elif stats is not None:
            stats.bound_fallbacks += 1
    ordered = scores[visit]
    return int(ctx.fset[i][visit[int(np.argmax(ordered))]])


def _effective_undercover(cov: CoverageState, grade0: int, grades: int) -> np.ndarray:
    """Undercover seen by a nurse: only the highest still-short tier they
    qualify for counts; lower tiers stay invisible until it is filled."""
    under = cov.undercover
    for s in range(grade0, grades):
        if under[:, s].any():
            return under[:, s]
    return np.zeros(N_SLOTS, dtype=np.int64)


def _top_slots(eff: np.ndarray, slots: tuple[int, ...], count: int) -> list[int]:
    ranked = sorted(slots, key=lambda k: (-int(eff[k]), k))
    return ranked[:count]


def _best_covering(
    ctx: DecodeContext, i: int, code: int, wanted: list[int], stats: DecodeStats | None
) -> int:
    """First pattern of the given kind with maximum overlap with the wanted slots."""
    positions = ctx.block_positions(i, code)
    target = np.zeros(N_SLOTS, dtype=np.int64)
    target[wanted] = 1
    overlaps = ctx.cov[i][positions] @ target
    pos = positions[int(np.argmax(overlaps))]
    if stats is not None and int(overlaps.max()) < len(wanted):
        stats.cover_fallbacks += 1
    return int(ctx.fset[i][pos])


def cover_select(
    i: int,
    cov: CoverageState,
    ctx: DecodeContext,
    stats: DecodeStats | None = None,
) -> int:
    """Cover-decoder choice: the pattern over the currently worst-covered slots.

    Standard nurses first pick the side (days or nights) holding the single
    largest effective shortfall, falling back to their stated preference on a
    tie, then take their contracted number of slots on that side in shortfall
    order (Sunday first on ties).  Special nurses pick day and night slots
    directly according to their split.  If no feasible pattern covers the
    chosen slots exactly, the best-overlapping one of the right kind is used.
    """
    eff = _effective_undercover(cov, int(ctx.grade0[i]), ctx.grades)
    if ctx.is_special[i]:
        wanted = _top_slots(eff, DAY_SLOTS, int(ctx.day_shifts[i]))
        wanted += _top_slots(eff, NIGHT_SLOTS, int(ctx.night_shifts[i]))
        return _best_covering(ctx, i, 2, wanted, stats)

    has_day = ctx.block_positions(i, 0).size > 0
    has_night = ctx.block_positions(i, 1).size > 0
    if has_day and has_night:
        peak_day = max(int(eff[k]) for k in DAY_SLOTS)
        peak_night = max(int(eff[k]) for k in NIGHT_SLOTS)
        if peak_day > peak_night:
            side_day = True
        elif peak_night > peak_day:
            side_day = False
        else:
            side_day = bool(ctx.prefers_day[i])
    else:
        side_day = has_day
    if side_day:
        wanted = _top_slots(eff, DAY_SLOTS, int(ctx.day_shifts[i]))
        return _best_covering(ctx, i, 0, wanted, stats)
    wanted = _top_slots(eff, NIGHT_SLOTS, int(ctx.night_shifts[i]))
    return _best_covering(ctx, i, 1, wanted, stats)


# -------------------------------------------------------------------- decode


def decode(
    perm,
    ctx: DecodeContext,
    kind: DecoderKind,
    weights: ScoreWeights | None = None,
    orders: list[np.ndarray] | None = None,
    bound: SimpleBound | None = None,
    stats: DecodeStats | None = None,
) -> Schedule:
    """Build a complete schedule by decoding the permutation nurse by nurse.

    Deterministic given the permutation, the frozen ordering draw and the
    bound state.  Always returns a complete schedule; infeasibility shows up
    only in the fitness penalty.
    """
    perm = np.asarray(perm, dtype=np.int64)
    n = ctx.n
    if sorted(perm.tolist()) != list(range(n)):
        raise ConfigInvalid("decode input must be a permutation of 0..n-1")
    kind = DecoderKind(kind)
    if weights is None:
        weights = ScoreWeights.default_for(kind)
    cov = CoverageState(ctx.demand.copy())
    assignment: list[int | None] = [None] * n
    for i in perm:
        i = int(i)
        if kind == DecoderKind.COVER:
            j = cover_select(i, cov, ctx, stats)
        else:
            order = orders[i] if orders is not None else np.arange(len(ctx.fset[i]))
            j = greedy_select(i, cov, ctx, kind, weights, order, bound, stats)
        assignment[i] = j
        cov.add(ctx.instance.nurses[i], ctx.instance.patterns[j])
    return Schedule(tuple(assignment))  # type: ignore[arg-type]


# --------------------------------------------------------------- batch path


_MODE_OF = {DecoderKind.COVER: 0, DecoderKind.CONTRIBUTION: 1, DecoderKind.COMBINED: 2}


class BatchDecoder:
    """Compiled decoder over whole populations of permutations.

    Produces exactly the schedules `decode` would, pattern for pattern; the
    pairing is pinned down by equivalence tests.  Agreement is guaranteed for
    integer grade weights, where all score arithmetic is exact.
    """

    def __init__(
        self,
        ctx: DecodeContext,
        kind: DecoderKind,
        weights: ScoreWeights | None = None,
        orders: list[np.ndarray] | None = None,
    ):
        from . import _kernels

        self._kernels = _kernels
        self.ctx = ctx
        self.kind = DecoderKind(kind)
        if weights is None:
            weights = ScoreWeights.default_for(self.kind)
        self.weights = weights
        n = ctx.n
        p = ctx.grades
        maxf = max(len(f) for f in ctx.fset)
        self._sizes = np.array([len(f) for f in ctx.fset], dtype=np.int64)
        self._orders = np.zeros((n, maxf), dtype=np.int64)
        self._cov = np.zeros((n, maxf, N_SLOTS), dtype=np.int8)
        self._cost = np.zeros((n, maxf), dtype=np.int64)
        self._kind_code = np.full((n, maxf), -1, dtype=np.int8)
        self._fset = np.full((n, maxf), -1, dtype=np.int64)
        self._wg = np.zeros((n, p), dtype=np.float64)
        for i in range(n):
            size = self._sizes[i]
            self._orders[i, :size] = (
                orders[i] if orders is not None else np.arange(size, dtype=np.int64)
            )
            self._cov[i, :size] = ctx.cov[i]
            self._cost[i, :size] = ctx.cost[i]
            self._kind_code[i, :size] = ctx.kind_code[i]
            self._fset[i, :size] = ctx.fset[i]
            self._wg[i] = ctx.gated_grade_weights(i, weights)
        self._wp_term = weights.preference * (100.0 - self._cost.astype(np.float64))
        self._has_day = np.array(
            [ctx.block_positions(i, 0).size > 0 for i in range(n)], dtype=bool
        )
        self._has_night = np.array(
            [ctx.block_positions(i, 1).size > 0 for i in range(n)], dtype=bool
        )

    def decode_many(
        self,
        perms: np.ndarray,
        bound: SimpleBound | None = None,
        stats: DecodeStats | None = None,
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Decode each permutation row; returns (assignments, costs, undercover)."""
        perms = np.ascontiguousarray(perms, dtype=np.int64)
        if perms.ndim != 2 or perms.shape[1] != self.ctx.n:
            raise ConfigInvalid("expected a (population, nurses) permutation array")
        bound_best = -1
        if bound is not None and bound.active and bound.best_cost is not None:
            bound_best = int(bound.best_cost)
        size = perms.shape[0]
        out_assign = np.empty((size, self.ctx.n), dtype=np.int64)
        out_cost = np.empty(size, dtype=np.int64)
        out_under = np.empty(size, dtype=np.int64)
        fallbacks = np.zeros(2, dtype=np.int64)
        self._kernels.decode_batch(
            perms,
            _MODE_OF[self.kind],
            self.ctx.demand,
            self._sizes,
            self._orders,
            self._cov,
            self._cost,
            self._wp_term,
            self._wg,
            self._kind_code,
            self._fset,
            self.ctx.grade0,
            self.ctx.is_special,
            self.ctx.day_shifts,
            self.ctx.night_shifts,
            self.ctx.prefers_day,
            self._has_day,
            self._has_night,
            bound_best,
            out_assign,
            out_cost,
            out_under,
            fallbacks,
        )
        if stats is not None:
            stats.bound_fallbacks += int(fallbacks[0])
            stats.cover_fallbacks += int(fallbacks[1])
        return out_assign, out_cost, out_under


def decode_population(
    perms: np.ndarray,
    ctx: DecodeContext,
    kind: DecoderKind,
    weights: ScoreWeights | None = None,
    orders: list[np.ndarray] | None = None,
    bound: SimpleBound | None = None,
    stats: DecodeStats | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-shot batch decode; see `BatchDecoder` for the reusable form."""
    return BatchDecoder(ctx, kind, weights, orders).decode_many(perms, bound, stats)
