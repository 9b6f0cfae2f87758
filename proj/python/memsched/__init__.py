"""Memory-aware list scheduling for data-flow graphs."""

from ._core import (
    Dfg,
    Error,
    Library,
    MemoryMapping,
    Schedule,
    TimingAnalysis,
    analyze,
    compute_timing,
    optimal_makespan,
    schedule,
    verify,
)

__all__ = [
    "Dfg",
    "Error",
    "Library",
    "MemoryMapping",
    "Schedule",
    "TimingAnalysis",
    "analyze",
    "compute_timing",
    "optimal_makespan",
    "schedule",
    "verify",
]
