"""Hard-constraint checks and the weighted soft-constraint penalty.

The penalty (``PenaltyBreakdown.fitness``) is what both solvers minimise.
Counting happens in :mod:`rostering.kernels` on a compiled, array-only view
of the instance; this module turns count rows into reports.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import DEFAULT_LIMITS, SOFT_IDS, RosterInstance, Schedule

HARD_IDS = ("HC1", "HC2", "HC3", "HC4")
HARD_UNIT_PENALTY = 10**6

_SOFT_COLS = {k: i for i, k in enumerate(SOFT_IDS)}
_HARD_SLICE = slice(21, 25)


@dataclass(frozen=True)
class HardViolationReport:
    counts: dict

    @property
    def feasible(self) -> bool:
        return all(v == 0 for v in self.counts.values())

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def __getitem__(self, key):
        return self.counts[key]


@dataclass(frozen=True)
class PenaltyBreakdown:
    violations: dict
    weighted: dict
    total: int
    hard: HardViolationReport
    hard_penalty: int
    fitness: int

    @property
    def feasible(self) -> bool:
        return self.hard.feasible


class CompiledInstance:
    """Array view of a :class:`RosterInstance` consumed by the kernels."""

    def __init__(self, instance: RosterInstance):
        shifts = instance.shifts
        n_n, n_d, n_s = instance.n_nurses, instance.horizon_days, len(shifts)
        self.n_nurses, self.n_days, self.n_shifts = n_n, n_d, n_s
        self.shift_ids = instance.shift_ids
        self.start = np.array([s.start for s in shifts], np.int64)
        self.duration = np.array([s.duration for s in shifts], np.int64)
        self.night = np.array([s.is_night for s in shifts], np.bool_)
        self.skill_ok = np.array([[nu.covers(s.required_skill) for s in shifts]
                                  for nu in instance.nurses], np.bool_)
        self.alt_used = np.array(
            [[s.required_skill is not None and s.required_skill not in nu.skills
              and s.required_skill in nu.alt_skills for s in shifts]
             for nu in instance.nurses], np.bool_)
        self.max_minutes = np.array([nu.max_minutes for nu in instance.nurses], np.int64)
        self.day_off_req = np.zeros((n_n, n_d), np.bool_)
        self.shift_on_req = np.zeros((n_n, n_d, n_s), np.bool_)
        self.shift_off_req = np.zeros((n_n, n_d, n_s), np.bool_)
        index = {sid: i for i, sid in enumerate(self.shift_ids)}
        for nu in instance.nurses:
            for d in nu.requested_days_off:
                self.day_off_req[nu.id, d] = True
            for d, sid in nu.requested_shifts_on:
                self.shift_on_req[nu.id, d, index[sid]] = True
            for d, sid in nu.requested_shifts_off:
                self.shift_off_req[nu.id, d, index[sid]] = True
        cfg = instance.constraints
        self.forbidden = np.zeros((n_s, n_s), np.bool_)
        for a, b in cfg.forbidden_successions:
            if a in index and b in index:
                self.forbidden[index[a], index[b]] = True
        blocks = instance.weekend_blocks()
        self.block_start = np.array([b[0] for b in blocks], np.int64)
        self.block_len = np.array([len(b) for b in blocks], np.int64)
        self.bank = np.zeros(n_d, np.bool_)
        for d in cfg.bank_holidays:
            self.bank[d] = True
        self.limits = np.array([cfg.limits[k] for k in DEFAULT_LIMITS], np.int64)
        self.weights = np.array([cfg.weights[k] for k in SOFT_IDS], np.int64)
        # per-option tables for the solvers; the last option is Off
        self.option_ok = np.concatenate([self.skill_ok, np.ones((n_n, 1), np.bool_)], axis=1)
        self.option_night = np.append(self.night, False)

    def kernel_args(self):
        return (self.start, self.duration, self.night, self.skill_ok, self.alt_used,
                self.max_minutes, self.day_off_req, self.shift_on_req, self.shift_off_req,
                self.forbidden, self.block_start, self.block_len, self.bank, self.limits)

    def count(self, grids, backend=None) -> np.ndarray:
        """Count rows (B, 25) for a stack of grids shaped (B, nurses, days)."""
        grids = np.ascontiguousarray(grids, dtype=np.int8)
        if grids.ndim == 2:
            grids = grids[None]
        if grids.shape[1:] != (self.n_nurses, self.n_days):
            raise ValueError(f"grid shape {grids.shape[1:]} does not match instance "
                             f"({self.n_nurses}, {self.n_days})")
        out = np.zeros((grids.shape[0], kernels.N_COUNTS), np.int64)
        fn = kernels.count_batch if backend is None else backend.count_batch
        fn(grids, *self.kernel_args(), out)
        return out

    def fitness(self, counts) -> np.ndarray:
        counts = np.atleast_2d(counts)
        return counts[:, :21] @ self.weights + HARD_UNIT_PENALTY * counts[:, _HARD_SLICE].sum(axis=1)


def compile_instance(instance: RosterInstance) -> CompiledInstance:
    """Compile once per instance object; the result is cached on the instance."""
    cached = instance.__dict__.get("_compiled")
    if cached is None:
        cached = CompiledInstance(instance)
        object.__setattr__(instance, "_compiled", cached)
    return cached


def check_dimensions(schedule: Schedule, instance: RosterInstance):
    if schedule.shape != (instance.n_nurses, instance.horizon_days):
        raise ValueError(f"schedule shape {schedule.shape} does not match instance "
                         f"({instance.n_nurses}, {instance.horizon_days})")
    if schedule.shift_ids != instance.shift_ids:
        raise ValueError("schedule shift catalogue differs from the instance")


def breakdown_from_counts(row, instance: RosterInstance) -> PenaltyBreakdown:
    row = [int(v) for v in row]
    weights = instance.constraints.weights
    violations = {k: row[i] for i, k in enumerate(SOFT_IDS)}
    weighted = {k: violations[k] * weights[k] for k in SOFT_IDS}
    hard = HardViolationReport({k: row[21 + i] for i, k in enumerate(HARD_IDS)})
    total = sum(weighted.values())
    hard_penalty = hard.total * HARD_UNIT_PENALTY
    return PenaltyBreakdown(violations, weighted, total, hard, hard_penalty, total + hard_penalty)


def check_hard(schedule: Schedule, instance: RosterInstance) -> HardViolationReport:
    check_dimensions(schedule, instance)
    row = compile_instance(instance).count(schedule.grid)[0]
    return HardViolationReport({k: int(row[21 + i]) for i, k in enumerate(HARD_IDS)})


def soft_penalty(schedule: Schedule, instance: RosterInstance, constraint_id: str) -> int:
    """Unweighted violation count of one soft constraint (``"SC1"``..``"SC21"``)."""
    if constraint_id not in _SOFT_COLS:
        raise KeyError(f"unknown constraint id {constraint_id!r}")
    check_dimensions(schedule, instance)
    return int(compile_instance(instance).count(schedule.grid)[0, _SOFT_COLS[constraint_id]])


def evaluate(schedule: Schedule, instance: RosterInstance) -> PenaltyBreakdown:
    check_dimensions(schedule, instance)
    return breakdown_from_counts(compile_instance(instance).count(schedule.grid)[0], instance)
