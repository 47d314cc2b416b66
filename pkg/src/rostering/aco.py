"""Ant colony optimisation over (nurse, day, option) components.

Ants fill the roster cell by cell, sampling each option with probability
proportional to ``tau ** alpha * eta ** beta`` over the options that keep
the skill and night-run hard constraints satisfied. Five pheromone update
rules are available: ``basic``, ``acs``, ``maxmin``, ``rank`` and
``elitist``.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constraints import compile_instance
from .model import RosterInstance, Schedule
from .parallel import MasterSlaveExecutor
from .result import RunResult

VARIANTS = ("basic", "acs", "maxmin", "rank", "elitist")

# Lower floor that keeps every pheromone entry strictly positive.
TAU_FLOOR = np.finfo(np.float64).tiny


@dataclass(frozen=True)
class AcoParams:
    alpha: float = 1.0
    beta: float = 2.0
    eta: float = 0.01
    zeta: float = 0.5
    ants: int = 16
    iterations: int = 100
    variant: str = "basic"
    tau0: float = 1.0
    tau_min: float = 0.01
    tau_max: float = 10.0
    rank_count: int | None = None
    elite_weight: float | None = None
    phi: float = 0.1
    q_deposit: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown ACO variant {self.variant!r}; choose from {VARIANTS}")
        if not 0 < self.zeta < 1:
            raise ValueError("zeta (evaporation rate) must lie in (0, 1)")
        if not 0 < self.phi < 1:
            raise ValueError("phi must lie in (0, 1)")
        if self.tau0 <= 0 or self.tau_min <= 0:
            raise ValueError("pheromone values must stay positive")
        if not self.tau_min <= self.tau0 <= self.tau_max:
            raise ValueError("need tau_min <= tau0 <= tau_max")
        if self.ants < 1:
            raise ValueError("need at least one ant")
        if self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.q_deposit <= 0:
            raise ValueError("q_deposit must be positive")
        if self.rank_count is None:
            object.__setattr__(self, "rank_count", min(6, self.ants))
        if not 1 <= self.rank_count <= self.ants:
            raise ValueError("rank_count must lie in [1, ants]")
        if self.elite_weight is None:
            object.__setattr__(self, "elite_weight", float(self.ants))


@dataclass
class PheromoneMatrix:
    """``tau[nurse, day, option]``; the last option is Off."""

    tau: np.ndarray

    def copy(self) -> "PheromoneMatrix":
        return PheromoneMatrix(self.tau.copy())

    @property
    def shape(self):
        return self.tau.shape


def init_pheromone(instance: RosterInstance, params: AcoParams) -> PheromoneMatrix:
    shape = (instance.n_nurses, instance.horizon_days, instance.n_options)
    return PheromoneMatrix(np.full(shape, float(params.tau0)))


def selection_probabilities(tau_row, feasible, params: AcoParams) -> np.ndarray:
    tau_row = np.asarray(tau_row, dtype=np.float64)
    feasible = np.asarray(feasible, dtype=bool)
    if not feasible.any():
        raise ValueError("no feasible option")
    w = np.where(feasible, tau_row ** params.alpha * params.eta ** params.beta, 0.0)
    total = w.sum()
    if total <= 0.0:
        w = feasible.astype(np.float64)
        total = w.sum()
    return w / total


def construct_colony(pheromone: PheromoneMatrix, instance: RosterInstance, params: AcoParams,
                     rng: np.random.Generator, n_ants: int | None = None) -> np.ndarray:
    """Grids (ants, nurses, days) for a whole colony; ACS local updates mutate ``pheromone``."""
    n_ants = params.ants if n_ants is None else n_ants
    compiled = compile_instance(instance)
    uniforms = rng.random((n_ants, instance.n_nurses, instance.horizon_days))
    out = np.zeros(uniforms.shape, np.int8)
    kernels.construct_colony(pheromone.tau, compiled.option_ok, compiled.option_night, uniforms,
                             float(params.alpha), float(params.eta) ** params.beta,
                             params.variant == "acs", float(params.phi), float(params.tau0), out)
    return out


def construct_solution(pheromone: PheromoneMatrix, instance: RosterInstance, params: AcoParams,
                       rng: np.random.Generator) -> Schedule:
    grid = construct_colony(pheromone, instance, params, rng, n_ants=1)[0]
    return Schedule(grid, instance.shift_ids)


def _deposit(tau, grid, amount):
    n, d = np.indices(grid.shape)
    tau[n, d, grid] += amount


def _apply_update(tau, grids, fitness, best_grid, best_fitness, params):
    """In-place update. Returns the population after elitist replacement."""
    tau *= 1.0 - params.zeta
    q = params.q_deposit
    variant = params.variant
    if variant == "basic":
        for g, f in zip(grids, fitness):
            _deposit(tau, g, q / (1.0 + f))
    elif variant == "acs":
        _deposit(tau, best_grid, q / (1.0 + best_fitness))
    elif variant == "maxmin":
        i = int(np.argmin(fitness))
        _deposit(tau, grids[i], q / (1.0 + fitness[i]))
        np.clip(tau, params.tau_min, params.tau_max, out=tau)
    elif variant == "rank":
        order = np.argsort(fitness, kind="stable")[:params.rank_count]
        for k, i in enumerate(order):
            _deposit(tau, grids[i], (params.rank_count - k) * q / (1.0 + fitness[i]))
    elif variant == "elitist":
        worst = int(np.argmax(fitness))
        grids = list(grids)
        fitness = list(fitness)
        grids[worst], fitness[worst] = best_grid, best_fitness
        for g, f in zip(grids, fitness):
            _deposit(tau, g, q / (1.0 + f))
        _deposit(tau, best_grid, params.elite_weight * q / (1.0 + best_fitness))
    np.maximum(tau, TAU_FLOOR, out=tau)
    return grids, fitness


def update_pheromone(pheromone: PheromoneMatrix, evaluated_ants, best_so_far,
                     params: AcoParams):
    """Evaporate everywhere, then deposit ``q / (1 + fitness)`` per the variant.

    ``evaluated_ants`` is a list of ``(Schedule, fitness)``; ``best_so_far`` a
    single pair. Returns ``(new_pheromone, population)`` where the population
    has its worst ant replaced by the best-so-far under the elitist rule and
    is otherwise unchanged.
    """
    evaluated_ants = list(evaluated_ants)
    if not evaluated_ants:
        raise ValueError("need at least one evaluated ant")
    tau = pheromone.tau.copy()
    grids = [s.grid for s, _ in evaluated_ants]
    fitness = [float(f) for _, f in evaluated_ants]
    best_schedule, best_fitness = best_so_far
    _, new_fit = _apply_update(tau, grids, fitness, best_schedule.grid, float(best_fitness), params)
    population = list(evaluated_ants)
    if params.variant == "elitist":
        worst = int(np.argmax(fitness))
        population[worst] = (best_schedule, best_fitness)
    return PheromoneMatrix(tau), population


def identity_local_search(grids, instance):
    return grids


def run_aco(instance: RosterInstance, params: AcoParams, executor=None,
            local_search=identity_local_search, callback=None) -> RunResult:
    """Construct, evaluate, update for ``params.iterations`` rounds.

    ``callback(iteration, pheromone, best_fitness)`` runs after each update.
    """
    if params.iterations < 1:
        raise ValueError("at least one iteration is required")
    own = executor is None
    if own:
        executor = MasterSlaveExecutor(1)
    compiled = compile_instance(instance)
    rng = np.random.default_rng(params.seed)
    pheromone = init_pheromone(instance, params)
    best_grid, best_fit = None, None
    history = []
    evaluations = 0
    t0 = time.perf_counter()
    try:
        for it in range(params.iterations):
            grids = construct_colony(pheromone, instance, params, rng)
            grids = local_search(grids, instance)
            fit = compiled.fitness(executor.count(grids, compiled))
            evaluations += len(grids)
            i = int(np.argmin(fit))
            if best_fit is None or fit[i] < best_fit:
                best_grid, best_fit = grids[i].copy(), int(fit[i])
            history.append(best_fit)
            _apply_update(pheromone.tau, grids, fit.astype(np.float64), best_grid,
                          float(best_fit), params)
            if callback is not None:
                callback(it, pheromone, best_fit)
    finally:
        if own:
            executor.close()
    return RunResult(Schedule(best_grid, instance.shift_ids), best_fit, history,
                     time.perf_counter() - t0, evaluations, "aco")
