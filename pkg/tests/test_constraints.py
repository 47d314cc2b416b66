import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cases import SINGLE_VIOLATIONS, permissive_instance
from oracle import brute_force_counts, brute_force_fitness, random_instance, random_rows
from rostering import kernels
from rostering.constraints import (HARD_UNIT_PENALTY, check_hard, compile_instance, evaluate,
                                   soft_penalty)
from rostering.model import (SOFT_IDS, ConstraintConfig, RosterInstance, empty_schedule,
                             schedule_from_rows, set_assignment)


def _set_many(schedule, cells):
    for n, d, v in cells:
        schedule = set_assignment(schedule, n, d, v)
    return schedule


def test_three_nights_one_window(ref):
    s = _set_many(empty_schedule(ref), [(0, 3, "N"), (0, 4, "N"), (0, 5, "N")])
    hard = check_hard(s, ref)
    assert hard["HC1"] == 1
    assert hard["HC3"] == 28  # 12 or 13 blanks every day, limit 5
    assert hard["HC2"] == 0 and hard["HC4"] == 0
    assert not hard.feasible


def test_four_nights_two_windows(ref):
    s = _set_many(empty_schedule(ref), [(0, d, "N") for d in range(4)])
    assert check_hard(s, ref)["HC1"] == 2


def test_empty_schedule_hard(ref):
    hard = check_hard(empty_schedule(ref), ref)
    assert hard["HC1"] == 0 and hard["HC4"] == 0 and hard["HC3"] == 28
    assert not hard.feasible


def test_missing_head_nurse_skill(ref):
    assert "head_nurse" not in ref.nurses[5].skills
    s = set_assignment(empty_schedule(ref), 5, 10, "DH")
    assert check_hard(s, ref)["HC4"] == 1
    s_ok = set_assignment(empty_schedule(ref), 0, 10, "DH")
    assert check_hard(s_ok, ref)["HC4"] == 0


def test_rest_between_late_and_early(ref):
    s = _set_many(empty_schedule(ref), [(3, 7, "L"), (3, 8, "V")])
    assert soft_penalty(s, ref, "SC15") == 1


def test_saturday_without_sunday(ref):
    s = set_assignment(empty_schedule(ref), 4, 5, "D")
    assert soft_penalty(s, ref, "SC3") == 1
    s2 = set_assignment(s, 4, 6, "D")
    assert soft_penalty(s2, ref, "SC3") == 0


@pytest.mark.parametrize("cid", ["SC2", "SC4", "SC6", "SC8", "SC9", "SC11", "SC12", "SC15",
                                 "SC17", "SC18", "SC20", "SC21"])
def test_empty_schedule_soft_zero(ref, cid):
    assert soft_penalty(empty_schedule(ref), ref, cid) == 0


def test_unknown_constraint_id(ref):
    with pytest.raises(KeyError):
        soft_penalty(empty_schedule(ref), ref, "SC22")


def test_dimension_mismatch(ref, desk):
    with pytest.raises(ValueError):
        evaluate(empty_schedule(desk), ref)
    with pytest.raises(ValueError):
        check_hard(empty_schedule(desk), ref)


@pytest.mark.parametrize("cid", sorted(SINGLE_VIOLATIONS))
def test_single_violation_totals(cid):
    build, expected = SINGLE_VIOLATIONS[cid]
    inst, schedule, sc = build()
    b = evaluate(schedule, inst)
    assert b.feasible
    assert b.violations[sc] == 1
    assert b.total == expected == inst.constraints.weights[sc]
    assert b.fitness == expected


def test_breakdown_identities(ref):
    rng = np.random.default_rng(3)
    grid = rng.integers(0, ref.n_options, (13, 28))
    s = schedule_from_rows([[None if v == 5 else ref.shift_ids[v] for v in row] for row in grid],
                           ref)
    b = evaluate(s, ref)
    for k in SOFT_IDS:
        assert b.weighted[k] == b.violations[k] * ref.constraints.weights[k]
    assert b.total == sum(b.weighted.values())
    assert b.hard_penalty == HARD_UNIT_PENALTY * b.hard.total
    assert b.fitness == b.total + b.hard_penalty
    assert b.hard["HC2"] == 0


def test_fitness_equals_total_when_feasible():
    inst, schedule, _ = SINGLE_VIOLATIONS["SC3"][0]()
    b = evaluate(schedule, inst)
    assert b.feasible and b.fitness == b.total


def _double_weights(inst):
    cfg = inst.constraints
    doubled = ConstraintConfig({k: 2 * v for k, v in cfg.weights.items()}, cfg.limits,
                               cfg.bank_holidays, cfg.forbidden_successions)
    return RosterInstance(inst.horizon_days, inst.nurses, inst.shifts, doubled,
                          inst.weekend_weekdays, inst.name)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_weight_linearity(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, 4, 20, 3)
    s = schedule_from_rows(random_rows(rng, inst), inst)
    assert evaluate(s, _double_weights(inst)).total == 2 * evaluate(s, inst).total


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=0, max_size=10, unique=True))
def test_each_isolated_rest_pair_costs_one_weight(slots):
    inst = permissive_instance(30)
    s = empty_schedule(inst)
    before = evaluate(s, inst)
    for k, slot in enumerate(slots):
        d = 3 * slot
        s = _set_many(s, [(0, d, "L"), (0, d + 1, "V")])
        after = evaluate(s, inst)
        assert after.violations["SC15"] == before.violations["SC15"] + 1
        assert after.total == before.total + inst.constraints.weights["SC15"]
        before = after
    assert before.violations["SC15"] == len(slots)


ZERO_WEIGHT = ("SC1", "SC5", "SC7", "SC10", "SC16")


def test_zero_weight_constraints_reported_not_charged(ref):
    s = empty_schedule(ref)
    b = evaluate(s, ref)
    assert b.violations["SC1"] == 13 * (28 - 3)
    assert all(b.weighted[k] == 0 for k in ZERO_WEIGHT)
    rng = np.random.default_rng(11)
    for _ in range(20):
        grid = rng.integers(0, ref.n_options, (13, 28)).astype(np.int8)
        from rostering.model import Schedule
        b = evaluate(Schedule(grid, ref.shift_ids), ref)
        charged = sum(b.violations[k] * ref.constraints.weights[k]
                      for k in SOFT_IDS if k not in ZERO_WEIGHT)
        assert b.total == charged


def test_evaluate_is_pure(ref):
    s = _set_many(empty_schedule(ref), [(0, 0, "N"), (0, 1, "V"), (1, 5, "D")])
    snapshot = s.grid.copy()
    assert evaluate(s, ref) == evaluate(s, ref)
    assert np.array_equal(s.grid, snapshot)


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_brute_force_small(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, 3, 5, 2)
    rows = random_rows(rng, inst, p_off=rng.random())
    b = evaluate(schedule_from_rows(rows, inst), inst)
    sc, hc = brute_force_counts(rows, inst)
    assert b.violations == sc
    assert b.hard.counts == hc
    assert b.fitness == brute_force_fitness(rows, inst)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_matches_brute_force_long_horizon(seed):
    rng = random.Random(seed)
    inst = random_instance(rng, 5, 60, 4)
    rows = random_rows(rng, inst, p_off=rng.random())
    b = evaluate(schedule_from_rows(rows, inst), inst)
    sc, hc = brute_force_counts(rows, inst)
    assert b.violations == sc and b.hard.counts == hc


def test_numba_and_numpy_paths_agree(ref):
    c = compile_instance(ref)
    rng = np.random.default_rng(5)
    grids = rng.integers(0, ref.n_options, (40, 13, 28)).astype(np.int8)
    grids[:10] = np.where(rng.random((10, 13, 28)) < 0.7, ref.n_options - 1, grids[:10])
    assert np.array_equal(c.count(grids, backend=kernels.loops),
                          c.count(grids, backend=kernels.vector))
