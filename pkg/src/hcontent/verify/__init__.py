"""Instance generators, inequality suites and constant sweeps."""

from .instances import InstanceSpec, generate
from .suites import SUITES, SuiteConfig, SuiteError, SuiteReport, estimate_constant, run_suite

__all__ = [
    "SUITES",
    "InstanceSpec",
    "SuiteConfig",
    "SuiteError",
    "SuiteReport",
    "estimate_constant",
    "generate",
    "run_suite",
]
