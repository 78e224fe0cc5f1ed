"""Cascaded geometric flight control with sliding variables.

A quaternion sliding-mode attitude loop nested under a linear position loop,
a deterministic rigid-body simulator, and a certification harness that
measures the closed loop's exponential-convergence envelopes.
"""

from . import analysis, attctl, dynamics, posctl, so3, traj
from .harness import (
    ExperimentConfig,
    ExperimentResult,
    config_from_dict,
    config_from_yaml,
    run_experiment,
    run_suite,
)

__all__ = [
    "analysis",
    "attctl",
    "dynamics",
    "posctl",
    "so3",
    "traj",
    "ExperimentConfig",
    "ExperimentResult",
    "config_from_dict",
    "config_from_yaml",
    "run_experiment",
    "run_suite",
]

__version__ = "0.1.0"
