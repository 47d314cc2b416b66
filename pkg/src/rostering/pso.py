"""Particle swarm optimisation on a continuous relaxation of the roster.

Each particle holds one real value per (nurse, day) cell in ``[0, K)``,
where K is the shift count plus one. Decoding floors the value to an option
index (the last index is Off) and repairs cells that would break the skill
or night-run hard constraints by setting them Off.
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

POSITION_EPS = 1e-9


@dataclass(frozen=True)
class PsoParams:
    c1: float = 1.5
    c2: float = 1.5
    w: float = 0.9
    chi: float = 0.729
    v_max: float | None = None  # None -> K / 2
    particles: int = 16
    iterations: int = 100
    clamping: bool = True
    inertia: bool = True
    constriction: bool = False
    asynchronous: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ValueError("c1 and c2 must be non-negative")
        if self.inertia and self.constriction:
            raise ValueError("inertia and constriction variants are mutually exclusive")
        if self.constriction and not 0 < self.chi <= 1:
            raise ValueError("chi must lie in (0, 1]")
        if self.v_max is not None and self.v_max <= 0:
            raise ValueError("v_max must be positive")
        if self.particles < 1:
            raise ValueError("need at least one particle")

    def velocity_limit(self, n_options: int) -> float:
        return n_options / 2 if self.v_max is None else float(self.v_max)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    pbest_position: np.ndarray
    pbest_fitness: float


class Swarm:
    """Stacked particle state: arrays shaped (particles, nurses, days)."""

    def __init__(self, positions, velocities, pbest_positions, pbest_fitness,
                 gbest_position, gbest_fitness):
        self.positions = positions
        self.velocities = velocities
        self.pbest_positions = pbest_positions
        self.pbest_fitness = pbest_fitness
        self.gbest_position = gbest_position
        self.gbest_fitness = gbest_fitness

    def __len__(self):
        return self.positions.shape[0]

    @property
    def particles(self) -> list:
        """Per-particle views; edits write through to the swarm."""
        return [Particle(self.positions[i], self.velocities[i], self.pbest_positions[i],
                         float(self.pbest_fitness[i])) for i in range(len(self))]

    def copy(self) -> "Swarm":
        return Swarm(self.positions.copy(), self.velocities.copy(), self.pbest_positions.copy(),
                     self.pbest_fitness.copy(), self.gbest_position.copy(), self.gbest_fitness)


def _decode_stack(positions, instance):
    compiled = compile_instance(instance)
    positions = np.ascontiguousarray(positions, dtype=np.float64)
    out = np.zeros(positions.shape, np.int8)
    kernels.decode_positions(positions, compiled.option_ok, compiled.option_night,
                             instance.n_options - POSITION_EPS, out)
    return out


def decode_position(position, instance: RosterInstance) -> Schedule:
    position = np.asarray(position, dtype=np.float64)
    if position.shape != (instance.n_nurses, instance.horizon_days):
        raise ValueError(f"position shape {position.shape} does not match instance")
    return Schedule(_decode_stack(position[None], instance)[0], instance.shift_ids)


def _evaluate(positions, instance, executor):
    compiled = compile_instance(instance)
    return compiled.fitness(executor.count(_decode_stack(positions, instance), compiled))


def init_swarm(instance: RosterInstance, params: PsoParams, rng: np.random.Generator,
               executor=None) -> Swarm:
    """Random positions in [0, K) and velocities in [-v_max, v_max], then one evaluation."""
    k = instance.n_options
    shape = (params.particles, instance.n_nurses, instance.horizon_days)
    v_max = params.velocity_limit(k)
    positions = rng.uniform(0.0, k, shape)
    velocities = rng.uniform(-v_max, v_max, shape)
    own = executor is None
    executor = executor or MasterSlaveExecutor(1)
    try:
        fit = _evaluate(positions, instance, executor)
    finally:
        if own:
            executor.close()
    g = int(np.argmin(fit))
    return Swarm(positions, velocities, positions.copy(), fit.astype(np.float64),
                 positions[g].copy(), float(fit[g]))


def velocity_update(velocity, position, pbest, gbest, params: PsoParams, r1, r2,
                    n_options: int) -> np.ndarray:
    """``W*v + c1*r1*(pbest-x) + c2*r2*(gbest-x)``, optionally constricted and clamped.

    ``W`` is ``params.w`` under the inertia variant and 1 otherwise.
    """
    inertia = params.w if params.inertia else 1.0
    v = (inertia * velocity + params.c1 * r1 * (pbest - position)
         + params.c2 * r2 * (gbest - position))
    if params.constriction:
        v = params.chi * v
    if params.clamping:
        lim = params.velocity_limit(n_options)
        v = np.clip(v, -lim, lim)
    return v


def update_velocity(particle: Particle, gbest_position, params: PsoParams,
                    rng: np.random.Generator | None = None, r1=None, r2=None,
                    n_options: int | None = None) -> np.ndarray:
    """New velocity for one particle; ``r1``/``r2`` may be pinned instead of drawn."""
    x = np.asarray(particle.position, dtype=np.float64)
    if np.shape(gbest_position) != x.shape or np.shape(particle.velocity) != x.shape \
            or np.shape(particle.pbest_position) != x.shape:
        raise ValueError("particle and gbest shapes differ")
    if r1 is None:
        r1 = rng.random(x.shape)
    if r2 is None:
        r2 = rng.random(x.shape)
    if params.clamping and params.v_max is None and n_options is None:
        raise ValueError("n_options is needed to derive the default v_max")
    return velocity_update(particle.velocity, x, particle.pbest_position, gbest_position,
                           params, r1, r2, n_options or 0)


def update_position(particle: Particle, n_options: int) -> np.ndarray:
    """``x + v``, held inside [0, K - eps] so decoding stays total."""
    return np.clip(np.asarray(particle.position) + particle.velocity, 0.0,
                   n_options - POSITION_EPS)


def step_swarm(swarm: Swarm, instance: RosterInstance, params: PsoParams, executor,
               rng: np.random.Generator) -> Swarm:
    """One generation, in place: evaluate, refresh pbest/gbest, then move."""
    k = instance.n_options
    fit = _evaluate(swarm.positions, instance, executor).astype(np.float64)
    r1 = rng.random(swarm.positions.shape)
    r2 = rng.random(swarm.positions.shape)
    if not params.asynchronous:
        better = fit < swarm.pbest_fitness
        swarm.pbest_positions[better] = swarm.positions[better]
        swarm.pbest_fitness[better] = fit[better]
        g = int(np.argmin(swarm.pbest_fitness))
        if swarm.pbest_fitness[g] < swarm.gbest_fitness:
            swarm.gbest_fitness = float(swarm.pbest_fitness[g])
            swarm.gbest_position = swarm.pbest_positions[g].copy()
        swarm.velocities = velocity_update(swarm.velocities, swarm.positions,
                                           swarm.pbest_positions, swarm.gbest_position[None],
                                           params, r1, r2, k)
        swarm.positions = np.clip(swarm.positions + swarm.velocities, 0.0, k - POSITION_EPS)
        return swarm
    for i in range(len(swarm)):
        if fit[i] < swarm.pbest_fitness[i]:
            swarm.pbest_fitness[i] = fit[i]
            swarm.pbest_positions[i] = swarm.positions[i]
            if fit[i] < swarm.gbest_fitness:
                swarm.gbest_fitness = float(fit[i])
                swarm.gbest_position = swarm.positions[i].copy()
        swarm.velocities[i] = velocity_update(swarm.velocities[i], swarm.positions[i],
                                              swarm.pbest_positions[i], swarm.gbest_position,
                                              params, r1[i], r2[i], k)
        swarm.positions[i] = np.clip(swarm.positions[i] + swarm.velocities[i], 0.0,
                                     k - POSITION_EPS)
    return swarm


def run_pso(instance: RosterInstance, params: PsoParams, executor=None,
            callback=None) -> RunResult:
    """``callback(iteration, swarm)`` runs after each step."""
    if params.iterations < 1:
        raise ValueError("at least one iteration is required")
    own = executor is None
    if own:
        executor = MasterSlaveExecutor(1)
    rng = np.random.default_rng(params.seed)
    history = []
    t0 = time.perf_counter()
    try:
        swarm = init_swarm(instance, params, rng, executor)
        evaluations = len(swarm)
        for it in range(params.iterations):
            step_swarm(swarm, instance, params, executor, rng)
            evaluations += len(swarm)
            history.append(int(swarm.gbest_fitness))
            if callback is not None:
                callback(it, swarm)
    finally:
        if own:
            executor.close()
    best = decode_position(swarm.gbest_position, instance)
    return RunResult(best, int(swarm.gbest_fitness), history, time.perf_counter() - t0,
                     evaluations, "pso")
