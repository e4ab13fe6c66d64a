"""Genetic algorithm over nurse permutations.

The genotype is a visiting order for the decoder, so every individual decodes
to a schedule satisfying each nurse's contract by construction; selection
pressure comes from preference cost plus a fixed penalty per uncovered unit
of demand.

Determinism contract: a run is a pure function of (instance, config).  The
stream of random draws is frozen as: initial population permutations, then
per-nurse visit orders, then per generation the parent-selection uniforms,
the crossover cuts or templates, and the mutation masks and partners, in
that order.  Swapping one crossover for another therefore never changes the
initial population, and the partially matched template draw is the only
difference between the uniform and parameterised-uniform operators.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .decoders import (
    BatchDecoder,
    DecodeContext,
    DecoderKind,
    DecodeStats,
    OrderingKind,
    ScoreWeights,
    SimpleBound,
    build_orderings,
)
from .errors import ConfigInvalid
from .model import Instance

#: Cost reported for a run that never found a feasible schedule.
CENSORED_COST = 100


class CrossoverKind(str, enum.Enum):
    PMX = "pmx"
    ORDER = "order"
    C1 = "c1"
    UNIFORM_ORDER = "uniform-order"
    PUX = "pux"


# ------------------------------------------------------------- genetic ops


def crossover_pmx(a: np.ndarray, b: np.ndarray, rng) -> np.ndarray:
    """Keep a random slice of `a`, fill outside from `b` through the mapping."""
    n = len(a)
    c1, c2 = rng.integers(0, n + 1, size=2)
    lo, hi = (int(c1), int(c2)) if c1 <= c2 else (int(c2), int(c1))
    return _kernels.pmx_core(np.asarray(a, np.int64), np.asarray(b, np.int64), lo, hi)


def crossover_order(a: np.ndarray, b: np.ndarray, rng) -> np.ndarray:
    """Keep a random slice of `a`, fill the rest in `b`'s circular order."""
    n = len(a)
    c1, c2 = rng.integers(0, n + 1, size=2)
    lo, hi = (int(c1), int(c2)) if c1 <= c2 else (int(c2), int(c1))
    return _kernels.order_core(np.asarray(a, np.int64), np.asarray(b, np.int64), lo, hi)


def crossover_c1(a: np.ndarray, b: np.ndarray, rng) -> np.ndarray:
    """Keep `a`'s prefix up to a random cut, append `b`'s order for the rest."""
    n = len(a)
    cut = int(rng.integers(0, n + 1))
    return _kernels.c1_core(np.asarray(a, np.int64), np.asarray(b, np.int64), cut)


def crossover_uniform(a: np.ndarray, b: np.ndarray, rng) -> np.ndarray:
    """Keep `a`'s genes on a fair-coin template, fill gaps in `b`'s order."""
    template = (rng.random(len(a)) < 0.5).astype(np.uint8)
    return _kernels.uniform_fill_core(np.asarray(a, np.int64), np.asarray(b, np.int64), template)


def crossover_pux(a: np.ndarray, b: np.ndarray, rng, p: float = 0.66) -> np.ndarray:
    """Uniform-template crossover with a biased coin: ones drawn at rate `p`.

    At p=0.5 this consumes the same draws as `crossover_uniform` and yields
    the identical child.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigInvalid(f"template probability must be in [0, 1], got {p}")
    template = (rng.random(len(a)) < p).astype(np.uint8)
    return _kernels.uniform_fill_core(np.asarray(a, np.int64), np.asarray(b, np.int64), template)


def mutate_swap(genome: np.ndarray, rate: float, rng) -> None:
    """Swap each gene with a random other position at the given per-gene rate.

    Mutates in place.  Both random arrays are always drawn so the stream does
    not depend on which genes happened to be selected.
    """
    if not 0.0 <= rate <= 1.0:
        raise ConfigInvalid(f"mutation rate must be in [0, 1], got {rate}")
    n = len(genome)
    if n < 2:
        return
    mask = (rng.random(n) < rate).astype(np.uint8)
    partners = rng.integers(0, n - 1, size=n)
    partners += partners >= np.arange(n)
    _kernels.swap_mutation_core(genome, mask, partners)


def rank_weights(fitness: np.ndarray) -> np.ndarray:
    """Linear rank weights: the best individual gets N, the worst gets 1.

    Ties go to the earlier index, matching a stable sort by fitness.
    """
    n = len(fitness)
    order = np.argsort(fitness, kind="stable")
    weights = np.empty(n, dtype=np.int64)
    weights[order] = np.arange(n, 0, -1)
    return weights


def select_parent(fitness: np.ndarray, rng) -> int:
    """Roulette spin over linear rank weights; one uniform draw per call."""
    cdf = np.cumsum(rank_weights(np.asarray(fitness, dtype=np.float64)))
    u = rng.random() * cdf[-1]
    return int(np.searchsorted(cdf, u, side="right"))


_CROSSOVER_DRAWS = {
    CrossoverKind.PMX: "cuts",
    CrossoverKind.ORDER: "cuts",
    CrossoverKind.C1: "cut",
    CrossoverKind.UNIFORM_ORDER: "template",
    CrossoverKind.PUX: "template",
}


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class GaConfig:
    """Run parameters; defaults follow the tuned reference setup."""

    population: int = 100
    crossover: CrossoverKind = CrossoverKind.ORDER
    pux_p: float = 0.66
    mutation_rate: float = 0.015
    elite_fraction: float = 0.10
    stagnation_limit: int = 30
    max_generations: int | None = None
    penalty_weight: float = 20.0
    decoder: DecoderKind = DecoderKind.COMBINED
    ordering: OrderingKind = OrderingKind.LEXICO
    weights: ScoreWeights | None = None
    bound_active: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, "crossover", CrossoverKind(self.crossover))
            object.__setattr__(self, "decoder", DecoderKind(self.decoder))
            object.__setattr__(self, "ordering", OrderingKind(self.ordering))
        except ValueError as exc:
            raise ConfigInvalid(str(exc)) from None
        if self.population < 2:
            raise ConfigInvalid("population must be at least 2")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigInvalid("mutation rate must be in [0, 1]")
        if not 0.0 <= self.elite_fraction < 1.0:
            raise ConfigInvalid("elite fraction must be in [0, 1)")
        if not 0.0 <= self.pux_p <= 1.0:
            raise ConfigInvalid("pux_p must be in [0, 1]")
        if self.stagnation_limit < 1:
            raise ConfigInvalid("stagnation limit must be positive")
        if self.max_generations is not None and self.max_generations < 0:
            raise ConfigInvalid("max_generations must be >= 0")
        if self.penalty_weight < 0:
            raise ConfigInvalid("penalty weight must be >= 0")

    @property
    def elite_count(self) -> int:
        count = math.ceil(self.elite_fraction * self.population)
        if count >= self.population:
            raise ConfigInvalid("elite fraction leaves no room for children")
        return count

    def score_weights(self) -> ScoreWeights:
        return self.weights if self.weights is not None else ScoreWeights.default_for(self.decoder)


@dataclass(frozen=True)
class Individual:
    """A decoded population member."""

    genome: tuple[int, ...]
    fitness: float
    cost: int
    undercover: int

    @property
    def feasible(self) -> bool:
        return self.undercover == 0


@dataclass
class RunResult:
    """Outcome of one GA run."""

    best_genome: tuple[int, ...]
    best_schedule: tuple[int, ...]
    best_fitness: float
    best_cost: int
    best_undercover: int
    feasible: bool
    best_feasible_cost: int | None
    best_feasible_schedule: tuple[int, ...] | None
    generations: int
    evaluations: int
    decode_time: float
    wall_time: float
    bound_fallbacks: int
    cover_fallbacks: int

    @property
    def best(self) -> Individual:
        return Individual(self.best_genome, self.best_fitness, self.best_cost,
                          self.best_undercover)

    @property
    def reported_cost(self) -> int:
        """Feasible preference cost, or the fixed censored value."""
        return self.best_feasible_cost if self.feasible else CENSORED_COST


# ------------------------------------------------------------------- engine


class _Tracker:
    def __init__(self) -> None:
        self.best_fitness = math.inf
        self.best_row: np.ndarray | None = None
        self.best_sched: np.ndarray | None = None
        self.best_cost = 0
        self.best_under = 0
        self.feas_cost: int | None = None
        self.feas_sched: np.ndarray | None = None

    def note(self, pop, assign, cost, under, fitness) -> bool:
        """Absorb an evaluated batch; True when best fitness strictly improved."""
        improved = False
        r = int(np.argmin(fitness))
        if fitness[r] < self.best_fitness:
            improved = True
            self.best_fitness = float(fitness[r])
            self.best_row = pop[r].copy()
            self.best_sched = assign[r].copy()
            self.best_cost = int(cost[r])
            self.best_under = int(under[r])
        feas = under == 0
        if feas.any():
            c = int(cost[feas].min())
            if self.feas_cost is None or c < self.feas_cost:
                self.feas_cost = c
                rows = np.flatnonzero(feas)
                self.feas_sched = assign[rows[int(np.argmin(cost[feas]))]].copy()
        return improved


def run(instance: Instance, config: GaConfig) -> RunResult:
    """Evolve permutations for one instance until stagnation or the cap."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    ctx = DecodeContext(instance)
    n = instance.n
    pop = np.stack([rng.permutation(n) for _ in range(config.population)])
    orders = build_orderings(ctx, config.ordering, rng)
    decoder = BatchDecoder(ctx, config.decoder, config.score_weights(), orders)
    bound = SimpleBound(active=config.bound_active)
    stats = DecodeStats()
    pw = config.penalty_weight
    tracker = _Tracker()
    decode_time = 0.0
    evaluations = 0

    def evaluate(rows: np.ndarray):
        nonlocal decode_time, evaluations
        t = time.perf_counter()
        assign, cost, under = decoder.decode_many(rows, bound, stats)
        decode_time += time.perf_counter() - t
        evaluations += len(rows)
        return assign, cost, under, cost + pw * under

    assign, cost, under, fitness = evaluate(pop)
    tracker.note(pop, assign, cost, under, fitness)

    elite_count = config.elite_count
    n_children = config.population - elite_count
    draws = _CROSSOVER_DRAWS[config.crossover]
    template_p = 0.5 if config.crossover == CrossoverKind.UNIFORM_ORDER else config.pux_p
    stagnation = 0
    generations = 0
    while stagnation < config.stagnation_limit:
        if config.max_generations is not None and generations >= config.max_generations:
            break
        improved = False
        if bound.active and tracker.feas_cost is not None and bound.tighten(tracker.feas_cost):
            # a stricter bound changes decoding, so the whole population's
            # schedules and fitnesses must be rebuilt before selection
            assign, cost, under, fitness = evaluate(pop)
            improved |= tracker.note(pop, assign, cost, under, fitness)

        cdf = np.cumsum(rank_weights(fitness))
        picks = np.searchsorted(cdf, rng.random((n_children, 2)) * cdf[-1], side="right")
        if draws == "cuts":
            cuts = rng.integers(0, n + 1, size=(n_children, 2))
            cuts.sort(axis=1)
        elif draws == "cut":
            cuts = rng.integers(0, n + 1, size=n_children)
        else:
            templates = (rng.random((n_children, n)) < template_p).astype(np.uint8)
        children = np.empty((n_children, n), dtype=np.int64)
        for c in range(n_children):
            pa, pb = pop[picks[c, 0]], pop[picks[c, 1]]
            if config.crossover == CrossoverKind.PMX:
                children[c] = _kernels.pmx_core(pa, pb, int(cuts[c, 0]), int(cuts[c, 1]))
            elif config.crossover == CrossoverKind.ORDER:
                children[c] = _kernels.order_core(pa, pb, int(cuts[c, 0]), int(cuts[c, 1]))
            elif config.crossover == CrossoverKind.C1:
                children[c] = _kernels.c1_core(pa, pb, int(cuts[c]))
            else:
                children[c] = _kernels.uniform_fill_core(pa, pb, templates[c])
        if n >= 2 and config.mutation_rate > 0:
            masks = (rng.random((n_children, n)) < config.mutation_rate).astype(np.uint8)
            partners = rng.integers(0, n - 1, size=(n_children, n))
            partners += partners >= np.arange(n)
            for c in range(n_children):
                _kernels.swap_mutation_core(children[c], masks[c], partners[c])

        c_assign, c_cost, c_under, c_fitness = evaluate(children)
        improved |= tracker.note(children, c_assign, c_cost, c_under, c_fitness)

        keep = np.argsort(fitness, kind="stable")[:elite_count]
        pop = np.concatenate([pop[keep], children])
        assign = np.concatenate([assign[keep], c_assign])
        cost = np.concatenate([cost[keep], c_cost])
        under = np.concatenate([under[keep], c_under])
        fitness = np.concatenate([fitness[keep], c_fitness])

        generations += 1
        stagnation = 0 if improved else stagnation + 1

    assert tracker.best_row is not None
    return RunResult(
        best_genome=tuple(int(x) for x in tracker.best_row),
        best_schedule=tuple(int(x) for x in tracker.best_sched),
        best_fitness=tracker.best_fitness,
        best_cost=tracker.best_cost,
        best_undercover=tracker.best_under,
        feasible=tracker.feas_cost is not None,
        best_feasible_cost=tracker.feas_cost,
        best_feasible_schedule=(
            tuple(int(x) for x in tracker.feas_sched) if tracker.feas_sched is not None else None
        ),
        generations=generations,
        evaluations=evaluations,
        decode_time=decode_time,
        wall_time=time.perf_counter() - t0,
        bound_fallbacks=stats.bound_fallbacks,
        cover_fallbacks=stats.cover_fallbacks,
    )
