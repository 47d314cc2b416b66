from __future__ import annotations

from dataclasses import dataclass, field

from .model import Schedule


@dataclass
class RunResult:
    """Outcome of one solver run; ``history`` is best-so-far fitness per iteration."""

    best_schedule: Schedule
    best_fitness: int
    history: list = field(default_factory=list)
    wall_time: float = 0.0
    evaluations: int = 0
    algorithm: str = ""

    def same_outcome(self, other: "RunResult") -> bool:
        """Equality ignoring wall time."""
        return (self.best_schedule == other.best_schedule
                and self.best_fitness == other.best_fitness
                and list(self.history) == list(other.history)
                and self.evaluations == other.evaluations)
