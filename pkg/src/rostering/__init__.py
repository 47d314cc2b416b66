"""Nurse rostering with ant colony and particle swarm metaheuristics."""
from ._accel import USE_NUMBA, backend_name
from .aco import AcoParams, PheromoneMatrix, run_aco
from .constraints import (HardViolationReport, PenaltyBreakdown, check_hard, evaluate,
                          soft_penalty)
from .experiment import ExperimentConfig, RunStats, compute_stats, run_experiment
from .model import (ConstraintConfig, InstanceError, Nurse, RosterInstance, Schedule, ShiftType,
                    empty_schedule, load_instance, parse_instance, reference_instance,
                    serialize_instance, set_assignment)
from .parallel import ExecutorConfig, MasterSlaveExecutor, evaluate_batch
from .pso import PsoParams, Swarm, run_pso
from .result import RunResult

__version__ = "0.1.0"
