"""The compiled batch decoder must reproduce the scalar decoder exactly."""

from __future__ import annotations

import numpy as np
import pytest

from conftest import make_instance, random_instance, subset_patterns
from rosterga.decoders import (
    BatchDecoder,
    DecodeContext,
    DecoderKind,
    DecodeStats,
    OrderingKind,
    ScoreWeights,
    SimpleBound,
    build_orderings,
    decode,
    decode_population,
)
from rosterga.errors import ConfigInvalid
from rosterga.model import Nurse, coverage, solution_cost


def mixed_instance(rng: np.random.Generator, n=5, grades=2):
    """Random instance mixing standard and special nurses."""
    patterns = subset_patterns(day_sizes=(2, 3), night_sizes=(2,), splits=((1, 1), (2, 1)))
    nurses = []
    for _ in range(n):
        costs = {j: int(rng.integers(0, 101)) for j in range(len(patterns))}
        grade = int(rng.integers(1, grades + 1))
        pref = str(rng.choice(["day", "night"]))
        if rng.random() < 0.35:
            days, nights = (1, 1) if rng.random() < 0.5 else (2, 1)
            nurses.append(
                Nurse(grade=grade, days=days, nights=nights, both=days + nights,
                      preference=pref, costs=costs)
            )
        else:
            nurses.append(
                Nurse(grade=grade, days=int(rng.integers(2, 4)), nights=2,
                      preference=pref, costs=costs)
            )
    demand = tuple(
        tuple(int(rng.integers(0, 4)) for _ in range(grades)) for _ in range(14)
    )
    return make_instance(nurses, patterns, demand=demand, grades=grades)


def scalar_batch_pair(inst, kind, ordering, seed, bound=None):
    ctx = DecodeContext(inst)
    orders = build_orderings(ctx, ordering, np.random.default_rng(seed))
    perms = np.array([np.random.default_rng(seed + r).permutation(inst.n) for r in range(6)])
    scalar_stats = DecodeStats()
    scalar = [
        decode(perm, ctx, kind, orders=orders, bound=bound, stats=scalar_stats)
        for perm in perms
    ]
    batch_stats = DecodeStats()
    assign, cost, under = BatchDecoder(ctx, kind, orders=orders).decode_many(
        perms, bound=bound, stats=batch_stats
    )
    return scalar, scalar_stats, assign, cost, under, batch_stats


@pytest.mark.parametrize("kind", list(DecoderKind))
@pytest.mark.parametrize("ordering", list(OrderingKind))
def test_batch_reproduces_scalar_schedules(kind, ordering):
    for seed in range(4):
        inst = mixed_instance(np.random.default_rng(seed))
        scalar, s_stats, assign, cost, under, b_stats = scalar_batch_pair(
            inst, kind, ordering, seed=seed * 101 + 7
        )
        for r, sched in enumerate(scalar):
            assert assign[r].tolist() == list(sched.assignment)
            assert cost[r] == solution_cost(sched, inst)
            assert under[r] == coverage(sched, inst).total_undercover
        assert b_stats.cover_fallbacks == s_stats.cover_fallbacks
        assert b_stats.bound_fallbacks == s_stats.bound_fallbacks


@pytest.mark.parametrize("best", [0, 5, 30, 1000, None])
def test_batch_reproduces_scalar_under_bound(best):
    bound = SimpleBound(active=best is not None,
                        best_cost=best if best is not None else None)
    for seed in range(4):
        inst = mixed_instance(np.random.default_rng(100 + seed))
        scalar, s_stats, assign, _, _, b_stats = scalar_batch_pair(
            inst, DecoderKind.COMBINED, OrderingKind.CHEAPEST, seed=seed, bound=bound
        )
        for r, sched in enumerate(scalar):
            assert assign[r].tolist() == list(sched.assignment)
        assert b_stats.bound_fallbacks == s_stats.bound_fallbacks


def test_batch_agrees_for_swept_preference_weights(rng):
    # the acceptance sweep varies only the preference weight; schedules from
    # the two paths must stay identical at every swept value
    inst = mixed_instance(rng)
    ctx = DecodeContext(inst)
    perms = np.array([rng.permutation(inst.n) for _ in range(4)])
    for wp in (0.1, 0.25, 0.5, 1.0, 2.0):
        w = ScoreWeights(preference=wp)
        assign, _, _ = decode_population(perms, ctx, DecoderKind.COMBINED, weights=w)
        for r in range(len(perms)):
            sched = decode(perms[r], ctx, DecoderKind.COMBINED, weights=w)
            assert assign[r].tolist() == list(sched.assignment)


def test_decode_many_validates_shape(rng):
    inst = random_instance(rng)
    ctx = DecodeContext(inst)
    dec = BatchDecoder(ctx, DecoderKind.COMBINED)
    with pytest.raises(ConfigInvalid):
        dec.decode_many(np.arange(inst.n))
