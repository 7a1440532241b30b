"""Solvers, matheuristics and benchmarking tools for FIXB scheduling.

FIXB: permutation flow shops with blocking constraints where some operations
are shiftable between consecutive machines.
"""

from .core import (
    DimensionError,
    Instance,
    Layout,
    Solution,
    ValidationReport,
    count_modes,
    enumerate_modes,
    evaluate,
    mode_workloads,
    two_machine_closed_form,
    validate_instance,
    verify_solution,
)

__version__ = "0.1.0"

__all__ = [
    "DimensionError",
    "Instance",
    "Layout",
    "Solution",
    "ValidationReport",
    "count_modes",
    "enumerate_modes",
    "evaluate",
    "mode_workloads",
    "two_machine_closed_form",
    "validate_instance",
    "verify_solution",
    "__version__",
]
