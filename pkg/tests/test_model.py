from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rosterga.errors import ConfigInvalid, InstanceInvalid, ScheduleInvalid
from rosterga.model import (
    CoverageState,
    Instance,
    Nurse,
    Schedule,
    ShiftPattern,
    coverage,
    feasible_patterns,
    fitness,
    is_feasible,
    solution_cost,
)

from conftest import flat_demand, make_instance, pattern_from_slots, random_instance, subset_patterns


# ---------------------------------------------------------------- patterns


def test_pattern_kinds():
    day = pattern_from_slots([0, 1, 2])
    night = pattern_from_slots([7, 13])
    both = pattern_from_slots([0, 7])
    assert day.kind == "day" and day.day_count == 3 and day.night_count == 0
    assert night.kind == "night" and night.night_count == 2
    assert both.kind == "combined"


def test_pattern_string_round_trip():
    pat = ShiftPattern.from_string("10000110000001")
    assert pat.to_string() == "10000110000001"
    assert pat.kind == "combined"


@pytest.mark.parametrize("bad", ["0" * 14, "2" + "0" * 13, "01"])
def test_pattern_rejects_malformed(bad):
    with pytest.raises(InstanceInvalid):
        ShiftPattern.from_string(bad)


# ---------------------------------------------------------- feasible sets


def test_feasible_patterns_no_contract_match():
    # A nurse contracted to zero shifts can match no pattern.
    patterns = subset_patterns(day_sizes=(3,), night_sizes=(2,))
    nurse = Nurse(grade=1, days=0, nights=0)
    with pytest.raises(InstanceInvalid):
        feasible_patterns(nurse, patterns)


def test_feasible_patterns_full_week():
    patterns = subset_patterns(day_sizes=range(1, 8), night_sizes=range(1, 8))
    nurse = Nurse(grade=1, days=7, nights=7)
    feas = feasible_patterns(nurse, patterns)
    assert len(feas) == 2  # only one 7-of-7 subset per half
    kinds = {patterns[j].kind for j in feas}
    assert kinds == {"day", "night"}


def test_feasible_patterns_counts_match_brute_force():
    # Independent subset enumeration: a (4 days, 3 nights) contract over the
    # full universe of 4-one day patterns and 3-one night patterns.
    patterns = subset_patterns(day_sizes=(4,), night_sizes=(3,))
    nurse = Nurse(grade=1, days=4, nights=3)
    feas = feasible_patterns(nurse, patterns)

    expected = len(list(combinations(range(7), 4))) + len(list(combinations(range(7), 3)))
    assert expected == 70
    assert len(feas) == 70
    assert feas == tuple(range(len(patterns)))


def test_feasible_patterns_respects_unavailability():
    patterns = subset_patterns(day_sizes=(3,))
    nurse = Nurse(grade=1, days=3, nights=3, unavailable=frozenset({0, 5}))
    feas = feasible_patterns(nurse, patterns)
    assert 0 not in feas and 5 not in feas
    assert len(feas) == len(patterns) - 2


def test_special_nurse_matches_split_only():
    patterns = subset_patterns(day_sizes=(2,), night_sizes=(2,), splits=[(1, 1), (2, 1)])
    special = Nurse(grade=1, days=2, nights=1, both=3)
    feas = feasible_patterns(special, patterns)
    assert feas  # only the (2,1) combined block
    for j in feas:
        assert patterns[j].kind == "combined"
        assert patterns[j].day_count == 2 and patterns[j].night_count == 1


def test_instance_requires_nonempty_feasible_sets():
    patterns = subset_patterns(day_sizes=(3,))
    good = Nurse(grade=1, days=3, nights=2)
    bad = Nurse(grade=1, days=4, nights=4)  # no 4-day or 4-night pattern in universe
    with pytest.raises(InstanceInvalid):
        make_instance([good, bad], patterns)


def test_nurse_validation():
    with pytest.raises(InstanceInvalid):
        Nurse(grade=0, days=3, nights=2)
    with pytest.raises(InstanceInvalid):
        Nurse(grade=1, days=2, nights=2, both=5)
    with pytest.raises(InstanceInvalid):
        Nurse(grade=1, days=2, nights=2, costs={0: 101})


# -------------------------------------------------------------- coverage


def _single_nurse_instance(grade=1, grades=1, demand_value=1):
    patterns = [pattern_from_slots(range(0, 7)), pattern_from_slots(range(7, 14))]
    nurse = Nurse(grade=grade, days=7, nights=7)
    return make_instance([nurse], patterns, demand=flat_demand(demand_value, grades), grades=grades)


def test_coverage_empty_schedule_is_all_demand():
    inst = _single_nurse_instance(demand_value=2)
    state = coverage([None], inst)
    assert np.array_equal(state.undercover, inst.demand_array())


def test_coverage_all_days_pattern():
    inst = _single_nurse_instance(demand_value=1)
    state = coverage([0], inst)
    under = state.undercover
    assert under[:7].sum() == 0
    assert (under[7:] == 1).all()


def test_coverage_grade_substitution_gating():
    # A grade-2 nurse covers demand at grades 2 and 3, never grade 1.
    patterns = [pattern_from_slots([0])]
    nurse = Nurse(grade=2, days=1, nights=1)
    inst = make_instance([nurse], patterns, demand=flat_demand(1, 3), grades=3)
    state = coverage([0], inst)
    assert state.supplied[0].tolist() == [0, 1, 1]
    assert state.supplied[1:].sum() == 0


def test_coverage_rejects_out_of_set_assignment():
    patterns = subset_patterns(day_sizes=(3, 2))
    nurse = Nurse(grade=1, days=3, nights=2)
    inst = make_instance([nurse], patterns)
    bad = len(subset_patterns(day_sizes=(3,)))  # first 2-day pattern
    with pytest.raises(ScheduleInvalid):
        coverage([bad], inst)


def test_coverage_order_invariant(rng):
    inst = random_instance(rng, n=5)
    assignment = [inst.feasible(i)[int(rng.integers(len(inst.feasible(i))))] for i in range(5)]
    base = coverage(assignment, inst)

    state = CoverageState(inst.demand_array())
    for i in rng.permutation(5):
        state.add(inst.nurses[i], inst.patterns[assignment[i]])
    assert np.array_equal(state.supplied, base.supplied)


def test_coverage_incremental_matches_scratch(rng):
    inst = random_instance(rng, n=6)
    assignment = [inst.feasible(i)[0] for i in range(6)]
    for t in range(6):
        prefix = list(assignment[: t + 1]) + [None] * (6 - t - 1)
        prev = list(assignment[:t]) + [None] * (6 - t)
        delta = coverage(prefix, inst).supplied - coverage(prev, inst).supplied
        solo = CoverageState(inst.demand_array())
        solo.add(inst.nurses[t], inst.patterns[assignment[t]])
        assert np.array_equal(delta, solo.supplied)


def test_grade_monotonicity(rng):
    inst = random_instance(rng, n=4, grades=3)
    assignment = [inst.feasible(i)[0] for i in range(4)]
    supplied = coverage(assignment, inst).supplied
    assert (np.diff(supplied, axis=1) >= 0).all()


# ------------------------------------------------------- cost and fitness


def test_solution_cost_sums_preferences():
    patterns = [pattern_from_slots([0]), pattern_from_slots([1])]
    nurses = [
        Nurse(grade=1, days=1, nights=1, costs={0: 3, 1: 3}),
        Nurse(grade=1, days=1, nights=1, costs={0: 8, 1: 8}),
    ]
    inst = make_instance(nurses, patterns)
    assert solution_cost([0, 1], inst) == 11
    assert solution_cost([0, 0], inst) == 11


def test_zero_cost_schedule():
    inst = _single_nurse_instance()
    assert solution_cost([0], inst) == 0


def test_fitness_penalty_arithmetic():
    # Cost 10 with 3 uncovered slots at weight 20 prices out at 70.
    patterns = [pattern_from_slots(range(0, 4))]
    nurse = Nurse(grade=1, days=4, nights=4, costs={0: 10})
    demand = [(1,)] * 7 + [(0,)] * 7
    inst = make_instance([nurse], patterns, demand=demand)
    state = coverage([0], inst)
    assert state.total_undercover == 3
    assert fitness([0], inst, w_demand=20) == 70


def test_fitness_zero_weight_ignores_shortfall():
    patterns = [pattern_from_slots([0])]
    nurse = Nurse(grade=1, days=1, nights=1, costs={0: 5})
    inst = make_instance([nurse], patterns, demand=flat_demand(2))
    assert fitness([0], inst, w_demand=0) == 5


def test_fitness_rejects_negative_weight():
    inst = _single_nurse_instance()
    with pytest.raises(ConfigInvalid):
        fitness([0], inst, w_demand=-1)


def test_feasibility_extremes():
    zero_demand = _single_nurse_instance(demand_value=0)
    assert is_feasible([0], zero_demand)
    impossible = _single_nurse_instance(demand_value=2)  # one nurse, demand 2 everywhere
    assert not is_feasible([0], impossible)
    assert not is_feasible([1], impossible)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), w=st.floats(0, 100, allow_nan=False))
def test_fitness_dominates_cost(seed, w):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n=4)
    assignment = [
        inst.feasible(i)[int(rng.integers(len(inst.feasible(i))))] for i in range(inst.n)
    ]
    sched = Schedule(tuple(assignment))
    f = fitness(sched, inst, w_demand=w)
    c = solution_cost(sched, inst)
    short = coverage(sched, inst).total_undercover
    assert f == c + w * short
    assert f >= c
    assert (short == 0) == is_feasible(sched, inst)
