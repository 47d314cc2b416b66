"""Master-slave fitness evaluation.

The solver loop (master) hands a whole generation to the executor, which
splits it into contiguous chunks, evaluates the chunks on a thread pool and
reassembles results in submission order. The kernels release the GIL, and
all randomness stays on the master, so results do not depend on the worker
count.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .constraints import check_dimensions, breakdown_from_counts, compile_instance

WORKERS_ENV = "ROSTERING_WORKERS"


class BatchEvaluationError(RuntimeError):
    def __init__(self, index, cause):
        self.index = index
        super().__init__(f"evaluation failed for batch element {index}: {cause}")


@dataclass(frozen=True)
class ExecutorConfig:
    workers: int = 1

    def __post_init__(self):
        if int(self.workers) != self.workers or self.workers < 1:
            raise ValueError("workers must be an integer >= 1")

    @classmethod
    def from_env(cls, default: int = 1) -> "ExecutorConfig":
        raw = os.environ.get(WORKERS_ENV)
        return cls(int(raw) if raw else default)


class MasterSlaveExecutor:
    """Evaluates batches of grids; usable as a context manager."""

    def __init__(self, config: ExecutorConfig | int | None = None):
        if config is None:
            config = ExecutorConfig.from_env()
        elif isinstance(config, int):
            config = ExecutorConfig(config)
        self.config = config
        self._pool = None
        if config.workers > 1:
            self._pool = ThreadPoolExecutor(config.workers, thread_name_prefix="roster-eval")

    @property
    def workers(self) -> int:
        return self.config.workers

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def count(self, grids: np.ndarray, compiled) -> np.ndarray:
        """Count rows for a (B, nurses, days) stack, in input order."""
        grids = np.ascontiguousarray(grids, dtype=np.int8)
        n = grids.shape[0]
        if n == 0:
            return np.zeros((0, 25), np.int64)
        if self._pool is None or n == 1:
            return compiled.count(grids)
        bounds = np.linspace(0, n, min(self.workers, n) + 1).astype(int)
        futures = [(lo, self._pool.submit(compiled.count, grids[lo:hi]))
                   for lo, hi in zip(bounds[:-1], bounds[1:])]
        parts = []
        for lo, fut in futures:
            try:
                parts.append(fut.result())
            except Exception as exc:
                raise BatchEvaluationError(lo, exc) from exc
        return np.concatenate(parts, axis=0)

    def evaluate_batch(self, schedules, instance) -> list:
        schedules = list(schedules)
        if not schedules:
            return []
        for i, s in enumerate(schedules):
            try:
                check_dimensions(s, instance)
            except ValueError as exc:
                raise BatchEvaluationError(i, exc) from exc
        counts = self.count(np.stack([s.grid for s in schedules]), compile_instance(instance))
        return [breakdown_from_counts(row, instance) for row in counts]


def evaluate_batch(schedules, instance, config: ExecutorConfig | None = None) -> list:
    """``[evaluate(s, instance) for s in schedules]``, computed by a worker pool."""
    with MasterSlaveExecutor(config or ExecutorConfig()) as ex:
        return ex.evaluate_batch(schedules, instance)


def timing_probe(workload, config: ExecutorConfig | None = None) -> float:
    """Wall time in seconds of ``workload(executor)`` on a fresh executor.

    The pool is created before the clock starts; no averaging is done.
    """
    with MasterSlaveExecutor(config or ExecutorConfig()) as ex:
        t0 = time.perf_counter()
        workload(ex)
        return time.perf_counter() - t0
