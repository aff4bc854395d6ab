"""
Bounded scalar objectives built on the plant simulators.

Identification compares the recorded response of the true plant with the
response of a candidate model under the same input. Tuning scores a PID gain
vector by the tracking error of the closed loop. Both return a mean squared
error over the first ``n_samples`` points, ``k = 0 .. N-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .plants import (
    DELAY_MODES,
    EXAMPLE1_TRUE,
    FOPDT_TRUE,
    Example1Params,
    FopdtParams,
    MIN_TIME_CONSTANT,
    Trajectory,
    closed_loop_example1,
    closed_loop_fopdt,
    simulate_example1,
    simulate_fopdt,
)
from .sta import SearchSpace

__all__ = [
    "PENALTY",
    "PLANTS",
    "IdentificationProblem",
    "TuningProblem",
    "identification_mse",
    "tuning_mse",
    "example1_identification",
    "example2_identification",
    "example1_tuning",
    "example2_tuning",
]

# Objective value for a run whose state stops being finite or that cannot be
# simulated at all.
PENALTY = 1e12

PLANTS = ("example1", "fopdt")

PARAM_NAMES = {
    "example1": ("theta1", "theta2", "theta3", "theta4"),
    "fopdt": ("K", "T", "tau"),
}
GAIN_NAMES = ("kp", "ki", "kd")


def _measured(plant: str, traj: Trajectory) -> np.ndarray:
    # example1 stacks both states and the output; for fopdt y == x so x alone
    if plant == "example1":
        return np.column_stack([traj.states["x1"], traj.states["x2"], traj.y])
    return traj.states["x"][:, None]


def _simulate_open(plant: str, params, u, n: int, delay: str) -> Trajectory:
    if plant == "example1":
        return simulate_example1(params, u, n)
    if plant == "fopdt":
        return simulate_fopdt(params, u, n, delay)
    raise ValueError(f"unknown plant {plant!r}")


def _check_plant(plant):
    if plant not in PLANTS:
        raise ValueError(f"plant must be one of {PLANTS}, got {plant!r}")


@dataclass
class IdentificationProblem:
    """Parameter estimation posed as bounded minimization.

    ``reference`` holds the measured signals of the true plant, one row per
    sample. It is recorded at construction unless given.
    """

    plant: str
    true_params: np.ndarray
    u: np.ndarray
    space: SearchSpace
    n_samples: int
    delay: str = "round"
    reference: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        _check_plant(self.plant)
        if self.delay not in DELAY_MODES:
            raise ValueError(f"delay must be one of {DELAY_MODES}, got {self.delay!r}")
        self.true_params = np.asarray(self.true_params, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.space.dim != len(PARAM_NAMES[self.plant]):
            raise ValueError(f"{self.plant} needs a {len(PARAM_NAMES[self.plant])}-D space")
        if self.u.size < self.n_samples:
            raise ValueError("input shorter than n_samples")
        if self.reference is None:
            ref = _simulate_open(self.plant, self.true_params, self.u, self.n_samples, self.delay)
            if ref.diverged:
                raise ValueError("reference run of the true plant diverged")
            self.reference = _measured(self.plant, ref)

    @property
    def param_names(self) -> tuple[str, ...]:
        return PARAM_NAMES[self.plant]

    def __call__(self, theta) -> float:
        return identification_mse(self, theta)


@dataclass
class TuningProblem:
    """PID gain selection for a fixed plant model."""

    plant: str
    plant_params: np.ndarray
    y_ref: float
    space: SearchSpace
    n_samples: int
    delay: str = "round"

    def __post_init__(self):
        _check_plant(self.plant)
        if self.delay not in DELAY_MODES:
            raise ValueError(f"delay must be one of {DELAY_MODES}, got {self.delay!r}")
        self.plant_params = np.asarray(self.plant_params, dtype=float)
        if self.space.dim != 3:
            raise ValueError("tuning space must be 3-D (kp, ki, kd)")

    param_names = GAIN_NAMES

    def closed_loop(self, gains) -> Trajectory:
        if self.plant == "example1":
            return closed_loop_example1(gains, self.y_ref, self.n_samples, self.plant_params)
        return closed_loop_fopdt(gains, self.y_ref, self.n_samples, self.plant_params, self.delay)

    def __call__(self, gains) -> float:
        return tuning_mse(self, gains)


def identification_mse(problem: IdentificationProblem, theta_hat) -> float:
    theta_hat = np.asarray(theta_hat, dtype=float)
    if theta_hat.shape != problem.true_params.shape:
        raise ValueError(
            f"expected {problem.true_params.size} parameters, got {theta_hat.size}"
        )
    try:
        traj = _simulate_open(problem.plant, theta_hat, problem.u, problem.n_samples, problem.delay)
    except ValueError:
        return PENALTY
    if traj.diverged:
        return PENALTY
    with np.errstate(over="ignore", invalid="ignore"):
        err = problem.reference - _measured(problem.plant, traj)
        value = float(np.sum(err * err) / problem.n_samples)
    return value if np.isfinite(value) else PENALTY


def tuning_mse(problem: TuningProblem, gains) -> float:
    try:
        traj = problem.closed_loop(np.asarray(gains, dtype=float))
    except ValueError:
        return PENALTY
    if traj.diverged:
        return PENALTY
    with np.errstate(over="ignore", invalid="ignore"):
        err = problem.y_ref - traj.y
        value = float(np.sum(err * err) / problem.n_samples)
    return value if np.isfinite(value) else PENALTY


# -- the two worked examples -------------------------------------------------


def example1_identification(n_samples: int = 8, u=1.0) -> IdentificationProblem:
    """Bilinear plant, 4 parameters in [0, 2], constant unit input."""
    return IdentificationProblem(
        "example1",
        EXAMPLE1_TRUE.as_vector(),
        np.broadcast_to(np.asarray(u, dtype=float), (n_samples,)).copy(),
        SearchSpace.uniform(0.0, 2.0, 4),
        n_samples,
    )


def example2_identification(
    n_samples: int = 350, u=1.0, delay: str = "round"
) -> IdentificationProblem:
    """FOPDT plant, (K, T, tau) in [0, 20], unit step input."""
    return IdentificationProblem(
        "fopdt",
        FOPDT_TRUE.as_vector(),
        np.broadcast_to(np.asarray(u, dtype=float), (n_samples,)).copy(),
        SearchSpace.uniform(0.0, 20.0, 3),
        n_samples,
        delay,
    )


def example1_tuning(plant_params=None, y_ref: float = 2.0, n_samples: int = 50) -> TuningProblem:
    params = EXAMPLE1_TRUE.as_vector() if plant_params is None else plant_params
    Example1Params.from_vector(params)
    return TuningProblem("example1", params, y_ref, SearchSpace.uniform(0.0, 1.0, 3), n_samples)


def example2_tuning(
    plant_params=None, y_ref: float = 1.0, n_samples: int = 1500, delay: str = "round"
) -> TuningProblem:
    params = FOPDT_TRUE.as_vector() if plant_params is None else plant_params
    fp = FopdtParams.from_vector(params)
    if fp.t_const <= MIN_TIME_CONSTANT or fp.tau < 0:
        raise ValueError(f"plant needs T > 0 and tau >= 0, got T={fp.t_const}, tau={fp.tau}")
    return TuningProblem(
        "fopdt", params, y_ref, SearchSpace.uniform(0.0, 1.0, 3), n_samples, delay
    )
