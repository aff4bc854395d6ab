"""State transition algorithm applied to nonlinear system identification and PID tuning."""

from .experiments import ExperimentConfig, TrialStats, compute_stats, run_experiment
from .problems import (
    IdentificationProblem,
    TuningProblem,
    example1_identification,
    example1_tuning,
    example2_identification,
    example2_tuning,
    identification_mse,
    tuning_mse,
)
from .pso import PsoConfig, pso_minimize
from .sta import Candidate, RunTrace, SearchSpace, StaConfig, sta_minimize

__version__ = "0.1.0"
