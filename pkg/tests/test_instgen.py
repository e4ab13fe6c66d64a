"""Generator tests: determinism, planted feasibility, corpora shape, disk form."""

from __future__ import annotations

import dataclasses
import json

import numpy as np
import pytest

from rosterga.errors import ParseError
from rosterga.instgen import (
    FULL_CORPUS_SIZE,
    GenParams,
    GeneratedInstance,
    SMALL_CORPUS_SIZE,
    full_corpus,
    generate,
    read_instance,
    small_corpus,
    write_instance,
)
from rosterga.oracle import audit


def small_params(**kw) -> GenParams:
    base = dict(
        nurses=5,
        grades=2,
        days_choices=(2, 3),
        nights_choices=(2,),
        special_fraction=0.2,
        special_days=(1,),
        special_nights=(1,),
        universe_cap=5,
        combined_cap=5,
        seed=42,
    )
    base.update(kw)
    return GenParams(**base)


def test_generation_is_seed_deterministic(tmp_path):
    a = generate(small_params())
    b = generate(small_params())
    assert a.instance == b.instance
    assert a.planted == b.planted
    write_instance(a, tmp_path / "a.json")
    write_instance(b, tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert generate(small_params(seed=43)).instance != a.instance


def test_planted_roster_is_a_feasibility_witness():
    for seed in range(12):
        gi = generate(small_params(seed=seed, tightness=0.9))
        assert gi.planted is not None
        assert len(gi.planted) == gi.instance.n
        for i, j in enumerate(gi.planted):
            assert j in gi.instance.feasible(i)
        assert audit(gi.planted, gi.instance).feasible


def test_full_tightness_demand_equals_planted_supply():
    gi = generate(small_params(tightness=1.0))
    report = audit(gi.planted, gi.instance)
    assert report.feasible
    # at tightness 1 nothing is thinned away: the planted roster has zero slack
    from rosterga.model import Schedule, coverage

    state = coverage(Schedule(gi.planted), gi.instance)
    assert (state.supplied == np.array(gi.instance.demand)).all()


def test_zero_tightness_means_zero_demand():
    for planted in (True, False):
        gi = generate(small_params(tightness=0.0, planted=planted))
        assert all(all(x == 0 for x in row) for row in gi.instance.demand)


def test_tighter_instances_demand_more():
    low = generate(small_params(tightness=0.3))
    high = generate(small_params(tightness=0.95))
    assert sum(map(sum, high.instance.demand)) > sum(map(sum, low.instance.demand))


def test_demand_is_cumulative_across_grades():
    for seed in range(8):
        gi = generate(GenParams(nurses=12, seed=seed, tightness=0.8))
        for row in gi.instance.demand:
            assert all(row[s] <= row[s + 1] for s in range(len(row) - 1))


def test_random_mode_has_no_planted_roster():
    gi = generate(small_params(planted=False, tightness=0.7))
    assert gi.planted is None
    assert gi.planted_cost is None
    assert gi.instance.n == 5


def test_costs_bounded_and_planted_patterns_cheap():
    gi = generate(small_params(planted_cost_max=3))
    inst = gi.instance
    for i, nurse in enumerate(inst.nurses):
        for j, c in nurse.costs.items():
            assert 0 <= c <= 100
        assert nurse.cost_of(gi.planted[i]) <= 3


def test_cost_quantum_coarsens_nonplanted_costs():
    gi = generate(small_params(cost_quantum=5, planted_cost_max=0))
    for i, nurse in enumerate(gi.instance.nurses):
        for j, c in nurse.costs.items():
            assert c % 5 == 0, (i, j, c)
        assert nurse.cost_of(gi.planted[i]) == 0
    assert gi.planted_cost == 0


def test_bad_params_rejected():
    from rosterga.errors import ConfigInvalid

    for kw in (dict(nurses=0), dict(tightness=1.5), dict(cost_quantum=0),
               dict(zero_cost_fraction=-0.1), dict(days_choices=()),
               dict(special_fraction=0.5, special_days=()),
               dict(universe_cap=0), dict(combined_cap=0)):
        with pytest.raises(ConfigInvalid):
            small_params(**kw)


def test_special_fraction_extremes():
    none = generate(small_params(special_fraction=0.0))
    assert not any(nu.is_special for nu in none.instance.nurses)
    allspec = generate(small_params(special_fraction=1.0))
    assert all(nu.is_special for nu in allspec.instance.nurses)


def test_universe_cap_bounds_feasible_sets():
    gi = generate(small_params(universe_cap=5, combined_cap=5))
    for i in range(gi.instance.n):
        assert len(gi.instance.feasible(i)) <= 2 * 5


# ----------------------------------------------------------------- corpora


def test_small_corpus_fits_the_exact_solvers():
    corp = small_corpus(count=8)
    assert len(corp) == 8
    for gi in corp:
        inst = gi.instance
        assert inst.n <= 6
        product = 1
        for i in range(inst.n):
            assert len(inst.feasible(i)) <= 20
            product *= len(inst.feasible(i))
        assert product <= 2_000_000
        assert gi.planted is not None


def test_small_corpus_default_size():
    assert SMALL_CORPUS_SIZE == 50


def test_full_corpus_bands_and_names():
    corp = full_corpus()
    assert len(corp) == FULL_CORPUS_SIZE == 52
    bands = {}
    for gi in corp:
        band = gi.instance.name.split("-")[1]
        bands[band] = bands.get(band, 0) + 1
        assert gi.instance.n == 30
        assert gi.instance.grades == 3
    assert bands == {"loose": 17, "medium": 17, "tight": 18}


def test_corpus_names_are_unique():
    names = [gi.instance.name for gi in full_corpus(count=9)]
    assert len(set(names)) == len(names)


# --------------------------------------------------------------- disk form


def test_round_trip_preserves_instance(tmp_path):
    gi = generate(small_params())
    path = tmp_path / "inst.json"
    write_instance(gi, path)
    back = read_instance(path)
    assert back.instance == gi.instance
    assert back.planted == gi.planted
    # writing the loaded copy must reproduce the bytes exactly
    write_instance(back, tmp_path / "again.json")
    assert (tmp_path / "again.json").read_bytes() == path.read_bytes()


def test_plain_instance_round_trip(tmp_path):
    gi = generate(small_params(planted=False))
    path = tmp_path / "inst.json"
    write_instance(gi.instance, path)
    back = read_instance(path)
    assert back.instance == gi.instance
    assert back.planted is None


def test_read_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        read_instance(path)


def test_read_rejects_missing_keys(tmp_path):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"name": "x", "grades": 1}))
    with pytest.raises(ParseError):
        read_instance(path)


def test_read_rejects_bad_pattern_string(tmp_path):
    gi = generate(small_params())
    path = tmp_path / "inst.json"
    write_instance(gi, path)
    raw = json.loads(path.read_text())
    raw["patterns"][0] = "123"
    path.write_text(json.dumps(raw))
    with pytest.raises(ParseError):
        read_instance(path)


def test_generated_instance_is_frozen():
    gi = generate(small_params())
    with pytest.raises(dataclasses.FrozenInstanceError):
        gi.instance = None
