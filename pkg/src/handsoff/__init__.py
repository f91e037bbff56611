"""Maximum hands-off (sparsest) control: L1 and L1/L2 transcription, an
exhaustive L0 oracle, minimum-time search and self-triggered feedback."""

__version__ = "0.1.0"

from .lti import LtiSystem, Verdict, discretize_zoh, expm, matrix_measure, normality_sufficient
from .oracle_1d import ScalarPlant, Unreachable, handsoff_control_1d, min_time_1d
from .self_triggered import (Disturbance, SelfTriggeredConfig, run_episode,
                             measured_sparsity_rate, stability_report)
from .signals import ControlSignal, l0_norm, sparsity_rate
from .solver import ConvexProgram, Status, solve
from .sparse_control import (minimum_time, solve_l0_exact, solve_l1, solve_l1l2, solve_l2,
                             switching_bound)
from .transcription import FiniteHorizonProblem, Objective, transcribe

__all__ = [
    "LtiSystem", "Verdict", "discretize_zoh", "expm", "matrix_measure", "normality_sufficient",
    "ScalarPlant", "Unreachable", "handsoff_control_1d", "min_time_1d",
    "Disturbance", "SelfTriggeredConfig", "run_episode", "measured_sparsity_rate",
    "stability_report", "ControlSignal", "l0_norm", "sparsity_rate",
    "ConvexProgram", "Status", "solve", "minimum_time", "solve_l0_exact", "solve_l1",
    "solve_l1l2", "solve_l2", "switching_bound", "FiniteHorizonProblem", "Objective",
    "transcribe",
]
