"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary by ``conftest.py``. Solver runs
shared by several criteria are cached in module-scoped fixtures.
"""
import math
import random
import time

import numpy as np
import pytest

from cases import SINGLE_VIOLATIONS
from conftest import ACCEPTANCE_RESULTS
from oracle import brute_force_counts, brute_force_fitness, random_instance, random_rows
from rostering.aco import AcoParams, run_aco
from rostering.constraints import check_hard, evaluate
from rostering.experiment import ExperimentConfig, compute_stats, run_experiment
from rostering.model import Schedule, schedule_from_rows
from rostering.parallel import ExecutorConfig, MasterSlaveExecutor, evaluate_batch
from rostering.pso import Particle, PsoParams, run_pso, update_position, update_velocity

# Solver settings used for the trend and feasibility runs.
ACO_SETTINGS = {"variant": "elitist"}
PSO_SETTINGS = {"c1": 1.5, "c2": 1.5, "w": 0.4}


def record(key, ok, detail):
    ACCEPTANCE_RESULTS[key] = (bool(ok), detail)
    assert ok, detail


def _non_increasing(history):
    return all(a >= b for a, b in zip(history, history[1:]))


@pytest.fixture(scope="module")
def desk_runs(desk):
    """50 seeds per solver, population 16, 200 iterations."""
    t0 = time.perf_counter()
    runs = {"aco": [], "pso": []}
    for seed in range(50):
        runs["aco"].append(run_aco(desk, AcoParams(ants=16, iterations=200, seed=seed,
                                                   **ACO_SETTINGS)))
        runs["pso"].append(run_pso(desk, PsoParams(particles=16, iterations=200, seed=seed,
                                                   **PSO_SETTINGS)))
    return runs, time.perf_counter() - t0


@pytest.fixture(scope="module")
def trend_reports(ref):
    """Populations 16 and 32, 1000 iterations, 10 paired seeds per algorithm."""
    t0 = time.perf_counter()
    reports = {}
    histories = []
    for alg, params in (("aco", ACO_SETTINGS), ("pso", PSO_SETTINGS)):
        cfg = ExperimentConfig(alg, (16, 32), iterations=1000, repeats=10, params=params)
        reports[alg] = run_experiment(ref, cfg, lambda p, r, res: histories.append(
            (alg, res.history)))
    return reports, histories, time.perf_counter() - t0


def test_c1_evaluator_matches_brute_force():
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        inst = random_instance(rng, 3, 5, 2)
        rows = random_rows(rng, inst, p_off=rng.random())
        b = evaluate(schedule_from_rows(rows, inst), inst)
        sc, hc = brute_force_counts(rows, inst)
        if b.violations != sc or b.hard.counts != hc or b.fitness != brute_force_fitness(rows,
                                                                                          inst):
            mismatches += 1
    elapsed = time.perf_counter() - t0
    record("C1", mismatches == 0 and elapsed < 30,
           f"{mismatches} mismatches in 1000 instances, {elapsed:.1f}s (limit 30s)")


def test_c2_single_violation_totals():
    got = {}
    for cid, (build, expected) in SINGLE_VIOLATIONS.items():
        inst, schedule, _ = build()
        got[cid] = (evaluate(schedule, inst).total, expected)
    ok = all(a == b for a, b in got.values())
    record("C2", ok, ", ".join(f"{k} total {a} (want {b})" for k, (a, b) in got.items()))


def test_c3_hard_feasibility(desk, desk_runs):
    runs, elapsed = desk_runs
    parts, ok = [], elapsed < 300
    for alg, results in runs.items():
        hards = [check_hard(r.best_schedule, desk) for r in results]
        strict = sum(h["HC1"] + h["HC2"] + h["HC4"] for h in hards)
        hc3_clean = sum(h["HC3"] == 0 for h in hards)
        ok = ok and strict == 0 and hc3_clean >= 45
        parts.append(f"{alg} HC1/2/4 total {strict}, HC3-clean {hc3_clean}/50")
    record("C3", ok, "; ".join(parts) + f"; {elapsed:.0f}s (limit 300s)")


def test_c4_worker_count_transparency(ref):
    rng = np.random.default_rng(4)
    batch_mismatch = 0
    for _ in range(20):
        grids = rng.integers(0, ref.n_options, (32, 13, 28)).astype(np.int8)
        batch = [Schedule(g, ref.shift_ids) for g in grids]
        outs = [evaluate_batch(batch, ref, ExecutorConfig(w)) for w in (1, 4, 8)]
        batch_mismatch += not (outs[0] == outs[1] == outs[2])
    solver_mismatch = 0
    for solve, params in ((run_aco, AcoParams(ants=16, iterations=30, seed=1, **ACO_SETTINGS)),
                          (run_pso, PsoParams(particles=16, iterations=30, seed=1,
                                              **PSO_SETTINGS))):
        results = []
        for w in (1, 4, 8):
            with MasterSlaveExecutor(w) as ex:
                results.append(solve(ref, params, ex))
        solver_mismatch += not all(results[0].same_outcome(r) for r in results[1:])
    record("C4", batch_mismatch == 0 and solver_mismatch == 0,
           f"{batch_mismatch}/20 batches and {solver_mismatch}/2 solvers differ across "
           "workers 1/4/8")


def test_c5_population_trend(trend_reports):
    reports, _, elapsed = trend_reports
    parts, ok = [], elapsed < 900
    for alg, report in reports.items():
        by_pop = {16: {}, 32: {}}
        for pop, seed, fit, _ in report.raw:
            by_pop[pop][seed] = fit
        wins = sum(by_pop[32][s] <= by_pop[16][s] for s in by_pop[16])
        ok = ok and wins >= 8
        parts.append(f"{alg} pop32<=pop16 in {wins}/10")
    record("C5", ok, "; ".join(parts) + f"; {elapsed:.0f}s (limit 900s)")


def test_c6_wall_time_grows_with_population(ref):
    run_aco(ref, AcoParams(ants=2, iterations=2))
    run_pso(ref, PsoParams(particles=2, iterations=2))
    pops = (8, 16, 32, 64)
    parts, ok = [], True
    for alg in ("aco", "pso"):
        cfg = ExperimentConfig(alg, pops, iterations=100, repeats=3, workers=1)
        report = run_experiment(ref, cfg)
        means = [report.aggregates[p][1] for p in pops]
        increasing = all(a < b for a, b in zip(means, means[1:]))
        ok = ok and increasing
        parts.append(f"{alg} " + " < ".join(f"{m:.3f}" for m in means))
    record("C6", ok, "mean seconds at populations 8/16/32/64: " + "; ".join(parts))


def test_c7_maxmin_bounds(ref):
    params = AcoParams(variant="maxmin", ants=16, iterations=500, seed=7)
    violations = []

    def check(it, pheromone, best):
        tau = pheromone.tau
        violations.append(int(np.sum((tau < params.tau_min) | (tau > params.tau_max))))

    run_aco(ref, params, callback=check)
    record("C7", len(violations) == 500 and sum(violations) == 0,
           f"{sum(violations)} out-of-bound entries over {len(violations)} updates")


def test_c8_pheromone_decay(ref):
    params = AcoParams(variant="basic", zeta=0.5, tau0=1.0, ants=16, iterations=60, seed=8)
    nurse = next(n.id for n in ref.nurses if "head_nurse" not in n.skills)
    dh = ref.shift_index("DH")
    worst = [0.0]

    def check(it, pheromone, best):
        expected = params.tau0 * (1 - params.zeta) ** (it + 1)
        got = pheromone.tau[nurse, :, dh]
        worst[0] = max(worst[0], float(np.max(np.abs(got - expected) / expected)))

    run_aco(ref, params, callback=check)
    record("C8", worst[0] <= 1e-9, f"max relative error {worst[0]:.2e} over 60 updates "
           "(limit 1e-9)")


def test_c9_velocity_and_position():
    p = Particle(np.array([2.0]), np.array([1.0]), np.array([3.0]), 0.0)
    params = PsoParams(c1=1.5, c2=1.5, w=0.9, clamping=False)
    v = update_velocity(p, np.array([5.0]), params, r1=np.array([0.25]), r2=np.array([0.75]))
    p.velocity = v
    x = update_position(p, 10)
    dv, dx = abs(v[0] - 4.65), abs(x[0] - 6.65)
    record("C9", dv <= 1e-12 and dx <= 1e-12,
           f"v'={float(v[0])!r} (err {dv:.1e}), x'={float(x[0])!r} (err {dx:.1e})")


def test_c10_monotone_histories(desk_runs, trend_reports):
    runs, _ = desk_runs
    _, trend_histories, _ = trend_reports
    histories = [(alg, r.history) for alg, rs in runs.items() for r in rs] + trend_histories
    bad = sum(not _non_increasing(h) for _, h in histories)
    record("C10", bad == 0, f"{bad} of {len(histories)} elitist-ACO/PSO histories increase")


def _two_pass(xs):
    n = len(xs)
    mean = sum(xs) / n
    sd = math.sqrt(sum((x - mean) ** 2 for x in xs) / (n - 1)) if n > 1 else 0.0
    return mean, sd, sd / math.sqrt(n)


def _rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


def test_c11_statistics():
    st = compute_stats([2, 4, 6])
    example_ok = (abs(st.mean - 4) <= 1e-12 and abs(st.stddev - 2) <= 1e-12
                  and abs(st.sem - 2 / math.sqrt(3)) <= 1e-12)
    rng = random.Random(11)
    worst = 0.0
    for _ in range(10_000):
        xs = [rng.uniform(0, 1e6) for _ in range(rng.randint(1, 40))]
        st = compute_stats(xs)
        ref = _two_pass(xs)
        worst = max(worst, _rel(st.mean, ref[0]), _rel(st.stddev, ref[1]), _rel(st.sem, ref[2]))
    record("C11", example_ok and worst <= 1e-12,
           f"example {'ok' if example_ok else 'wrong'}; max relative error {worst:.1e} over "
           "10^4 samples (limit 1e-12)")
