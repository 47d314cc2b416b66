"""Population sweeps: best fitness and wall time per (population, seed) cell."""
from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aco import AcoParams, run_aco
from .parallel import ExecutorConfig, MasterSlaveExecutor
from .pso import PsoParams, run_pso

RAW_HEADER = ("algorithm", "population", "seed", "best_fitness", "wall_time_s")
AGG_HEADER = ("algorithm", "population", "n", "mean", "stddev", "sem", "min", "max",
              "mean_time_s")
ALGORITHMS = ("aco", "pso")


@dataclass(frozen=True)
class RunStats:
    n: int
    mean: float
    stddev: float
    sem: float
    min: float
    max: float


def compute_stats(samples) -> RunStats:
    """Mean, sample standard deviation (n - 1) and standard error of the mean."""
    x = np.asarray(list(samples), dtype=np.float64)
    if x.size == 0:
        raise ValueError("compute_stats needs at least one sample")
    n = x.size
    mean = float(x.mean())
    std = float(x.std(ddof=1)) if n > 1 else 0.0
    return RunStats(n, mean, std, std / math.sqrt(n), float(x.min()), float(x.max()))


@dataclass(frozen=True)
class ExperimentConfig:
    algorithm: str = "pso"
    population_sweep: tuple = (16, 32)
    iterations: int = 1000
    repeats: int = 10
    params: dict = field(default_factory=dict)
    workers: int = 1
    base_seed: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.label is None:
            object.__setattr__(self, "label", self.algorithm)
        object.__setattr__(self, "population_sweep", tuple(int(p) for p in self.population_sweep))
        if not self.population_sweep:
            raise ValueError("population sweep must not be empty")
        if any(p < 1 for p in self.population_sweep):
            raise ValueError("population sizes must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        ExecutorConfig(self.workers)
        self.solver_params(self.population_sweep[0], 0)  # fail early on bad overrides

    def solver_params(self, population: int, seed: int):
        if self.algorithm == "aco":
            return AcoParams(**{**self.params, "ants": population,
                                "iterations": self.iterations, "seed": seed})
        return PsoParams(**{**self.params, "particles": population,
                            "iterations": self.iterations, "seed": seed})


def cell_seed(base_seed: int, algorithm: str, repeat: int) -> int:
    """Seed for one repeat; the same for every population so cells pair up."""
    digest = hashlib.sha256(f"{base_seed}:{algorithm}:{repeat}".encode()).digest()
    return int.from_bytes(digest[:4], "little")


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    raw: list = field(default_factory=list)  # (population, seed, best_fitness, wall_time)
    aggregates: dict = field(default_factory=dict)  # population -> (RunStats, mean_time)


def run_experiment(instance, config: ExperimentConfig, progress=None) -> ExperimentReport:
    solve = run_aco if config.algorithm == "aco" else run_pso
    report = ExperimentReport(config)
    with MasterSlaveExecutor(ExecutorConfig(config.workers)) as ex:
        for pop in config.population_sweep:
            fits, times = [], []
            for rep in range(config.repeats):
                seed = cell_seed(config.base_seed, config.algorithm, rep)
                result = solve(instance, config.solver_params(pop, seed), ex)
                report.raw.append((pop, seed, result.best_fitness, result.wall_time))
                fits.append(result.best_fitness)
                times.append(result.wall_time)
                if progress is not None:
                    progress(pop, rep, result)
            report.aggregates[pop] = (compute_stats(fits), float(np.mean(times)))
    return report


def emit_csv(report: ExperimentReport, out_dir) -> tuple:
    """Write ``<label>_raw.csv`` and ``<label>_summary.csv``; return both paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    alg = report.config.algorithm
    raw_path = out_dir / f"{report.config.label}_raw.csv"
    agg_path = out_dir / f"{report.config.label}_summary.csv"
    with open(raw_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RAW_HEADER)
        for pop, seed, fit, wall in report.raw:
            w.writerow((alg, pop, seed, fit, repr(float(wall))))
    with open(agg_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(AGG_HEADER)
        for pop, (st, mean_time) in report.aggregates.items():
            w.writerow((alg, pop, st.n, repr(st.mean), repr(st.stddev), repr(st.sem),
                        repr(st.min), repr(st.max), repr(mean_time)))
    return raw_path, agg_path


def read_csv(path) -> list:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def default_experiments(iterations=1000, repeats=10, workers=1, base_seed=0) -> list:
    """ACO at alpha=1, beta=2, eta=0.01, zeta=0.5 plus the PSO c/w grid, populations 16 and 32."""
    common = dict(population_sweep=(16, 32), iterations=iterations, repeats=repeats,
                  workers=workers, base_seed=base_seed)
    out = [ExperimentConfig("aco", label="aco", **common)]
    for c in (1.2, 1.5):
        for w in (0.4, 0.9):
            out.append(ExperimentConfig("pso", params={"c1": c, "c2": c, "w": w},
                                        label=f"pso_c{c}_w{w}", **common))
    return out


_TOP_KEYS = {"iterations", "repeats", "workers", "base_seed", "populations"}
_EXP_KEYS = _TOP_KEYS | {"algorithm", "label", "params"}


def load_experiments(path, workers=None) -> list:
    """Read a TOML file: top-level defaults plus ``[[experiment]]`` tables."""
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    unknown = set(doc) - _TOP_KEYS - {"experiment"}
    if unknown:
        raise ValueError(f"unknown top-level keys: {sorted(unknown)}")
    tables = doc.get("experiment")
    if not tables:
        raise ValueError("config declares no [[experiment]] tables")
    defaults = {k: doc[k] for k in _TOP_KEYS if k in doc}
    out = []
    for table in tables:
        unknown = set(table) - _EXP_KEYS
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        merged = {**defaults, **table}
        if workers is not None:
            merged["workers"] = workers
        if "populations" in merged:
            merged["population_sweep"] = merged.pop("populations")
        out.append(ExperimentConfig(**merged))
    labels = [c.label for c in out]
    if len(set(labels)) != len(labels):
        raise ValueError("experiment labels must be unique")
    return out
