"""
State transition algorithm for bounded continuous minimization.

A solution is treated as a state and each candidate-generating move as a
state transition. Four transformations are used:

- rotation, a random step of length at most ``alpha`` around the incumbent
- translation, a line search along the last improving direction
- expansion, a Gaussian componentwise rescaling that can reach the whole space
- axesion, the same rescaling restricted to a single random coordinate

Each transformation is applied ``se`` times per call (search enforcement) and
the best of the batch competes with the incumbent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Candidate",
    "SearchSpace",
    "StaConfig",
    "TraceRow",
    "RunTrace",
    "rotate",
    "translate",
    "expand",
    "axesion",
    "clamp",
    "operator_batch",
    "sta_minimize",
    "OPERATORS",
]

Objective = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class Candidate:
    """Decision vector together with its cached objective value."""

    x: np.ndarray
    value: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "value", float(self.value))

    @classmethod
    def evaluate(cls, objective: Objective, x) -> "Candidate":
        x = np.asarray(x, dtype=float)
        return cls(x, objective(x))


@dataclass(frozen=True)
class SearchSpace:
    """Componentwise box ``lower <= x <= upper``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-D with the same length")
        if not np.all(lower < upper):
            raise ValueError("lower must be strictly less than upper componentwise")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def uniform(cls, low: float, high: float, dim: int) -> "SearchSpace":
        return cls(np.full(dim, low), np.full(dim, high))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower, self.upper)


@dataclass(frozen=True)
class StaConfig:
    """Hyperparameters of the state transition algorithm.

    Defaults follow the published comparison setting: 30 candidates per
    operator call, 100 iterations, ``alpha`` halved each iteration from 1
    down to 1e-4 and then restarted, all other factors equal to 1.
    """

    se: int = 30
    max_iter: int = 100
    alpha_max: float = 1.0
    alpha_min: float = 1e-4
    fc: float = 2.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.se, (int, np.integer)) or self.se < 1:
            raise ValueError(f"se must be a positive integer, got {self.se!r}")
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if not 0 < self.alpha_min < self.alpha_max:
            raise ValueError("need 0 < alpha_min < alpha_max")
        if not self.fc > 1:
            raise ValueError(f"fc must be greater than 1, got {self.fc!r}")
        for name in ("beta", "gamma", "delta"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    best_value: float
    alpha: float
    best_x: np.ndarray


@dataclass
class RunTrace:
    """Per-iteration record of an optimizer run.

    ``alpha`` holds the step parameter in force during the iteration (the
    rotation factor for STA, the inertia weight for PSO).
    """

    rows: list[TraceRow] = field(default_factory=list)
    n_evals: int = 0

    def append(self, iteration: int, best: Candidate, alpha: float) -> None:
        self.rows.append(TraceRow(iteration, best.value, float(alpha), best.x.copy()))

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def best_values(self) -> np.ndarray:
        return np.array([r.best_value for r in self.rows])

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.rows])

    def records(self) -> list[dict]:
        return [
            {
                "iteration": r.iteration,
                "best_value": r.best_value,
                "alpha": r.alpha,
                "best_x": r.best_x.tolist(),
            }
            for r in self.rows
        ]


# -- transformations --------------------------------------------------------


def rotate(x, alpha: float, R_r) -> np.ndarray:
    """Rotation transformation ``x + alpha / (n ||x||) * R_r @ x``.

    With entries of ``R_r`` in [-1, 1] the step length never exceeds ``alpha``.
    The zero vector is returned unchanged.
    """
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm == 0.0:
        return x.copy()
    return x + alpha / (x.size * norm) * (np.asarray(R_r, dtype=float) @ x)


def translate(x_k, x_prev, beta: float, R_t: float) -> np.ndarray:
    """Translation transformation along the ray from ``x_prev`` through ``x_k``.

    Coincident points define no direction, ``x_k`` is returned unchanged.
    """
    x_k = np.asarray(x_k, dtype=float)
    d = x_k - np.asarray(x_prev, dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        return x_k.copy()
    return x_k + beta * R_t * d / norm


def expand(x, gamma: float, R_e) -> np.ndarray:
    """Expansion transformation ``x + gamma * R_e @ x``.

    ``R_e`` may be passed either as the diagonal matrix or as its diagonal.
    """
    x = np.asarray(x, dtype=float)
    return x + gamma * _diag(R_e) * x


def axesion(x, delta: float, R_a) -> np.ndarray:
    """Axesion transformation ``x + delta * R_a @ x``, ``R_a`` with one nonzero."""
    x = np.asarray(x, dtype=float)
    return x + delta * _diag(R_a) * x


def _diag(R) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    return np.diag(R) if R.ndim == 2 else R


def clamp(x, space: SearchSpace) -> np.ndarray:
    return np.minimum(space.upper, np.maximum(space.lower, x))


# -- random realizations ----------------------------------------------------
# Each draw function produces ``se`` candidate points from the incumbent. All
# randomness for a batch is drawn before any evaluation.


def _draw_rotation(x, se, rng, cfg, x_prev=None):
    R = rng.uniform(-1.0, 1.0, size=(se, x.size, x.size))
    return [rotate(x, cfg["alpha"], R[i]) for i in range(se)]


def _draw_translation(x, se, rng, cfg, x_prev=None):
    if x_prev is None:
        raise ValueError("translation needs the previous best point")
    R = rng.uniform(0.0, 1.0, size=se)
    return [translate(x, x_prev, cfg["beta"], R[i]) for i in range(se)]


def _draw_expansion(x, se, rng, cfg, x_prev=None):
    g = rng.standard_normal(size=(se, x.size))
    return [expand(x, cfg["gamma"], g[i]) for i in range(se)]


def _draw_axesion(x, se, rng, cfg, x_prev=None):
    idx = rng.integers(0, x.size, size=se)
    g = rng.standard_normal(size=se)
    out = []
    for i in range(se):
        diag = np.zeros(x.size)
        diag[idx[i]] = g[i]
        out.append(axesion(x, cfg["delta"], diag))
    return out


OPERATORS = {
    "rotate": _draw_rotation,
    "translate": _draw_translation,
    "expand": _draw_expansion,
    "axesion": _draw_axesion,
}


def operator_batch(
    incumbent: Candidate,
    operator: str,
    se: int,
    objective: Objective,
    space: SearchSpace,
    rng: np.random.Generator,
    *,
    alpha: float = 1.0,
    beta: float = 1.0,
    gamma: float = 1.0,
    delta: float = 1.0,
    x_prev=None,
) -> Candidate:
    """Apply one transformation ``se`` times and keep the best point.

    Every generated point is clamped into ``space`` before evaluation. The
    incumbent is returned when no generated point is strictly better, so the
    result never has a larger value than ``incumbent``.
    """
    try:
        draw = OPERATORS[operator]
    except KeyError:
        raise ValueError(f"unknown operator {operator!r}") from None
    factors = {"alpha": alpha, "beta": beta, "gamma": gamma, "delta": delta}
    points = [clamp(p, space) for p in draw(incumbent.x, se, rng, factors, x_prev)]

    best = incumbent
    for p in points:
        value = float(objective(p))
        if value < best.value:
            best = Candidate(p, value)
    return best


def sta_minimize(
    objective: Objective,
    space: SearchSpace,
    config: StaConfig = StaConfig(),
    x0=None,
    callback: Optional[Callable[[int, Candidate, float], None]] = None,
) -> tuple[Candidate, RunTrace]:
    """Minimize ``objective`` over ``space`` with the state transition algorithm.

    Parameters
    ----------
    objective : callable
        Maps a 1-D array to a float. Assumed deterministic, values are cached.
    space : SearchSpace
        Box constraints. Every evaluated point lies inside it.
    config : StaConfig
        Hyperparameters and seed.
    x0 : array_like, optional
        Starting point, clamped into ``space``. Drawn uniformly when omitted.
    callback : callable, optional
        Called as ``callback(iteration, best, alpha)`` after each iteration.

    Returns
    -------
    best : Candidate
    trace : RunTrace
        One row per iteration with the best value after that iteration and
        the rotation factor used during it.
    """
    rng = np.random.default_rng(config.seed)
    trace = RunTrace()

    def counted(x):
        trace.n_evals += 1
        return float(objective(x))

    start = space.sample(rng) if x0 is None else clamp(np.asarray(x0, dtype=float), space)
    best = Candidate(start, counted(start))

    kw = dict(beta=config.beta, gamma=config.gamma, delta=config.delta)
    alpha = config.alpha_max
    for it in range(config.max_iter):
        if alpha < config.alpha_min:
            alpha = config.alpha_max
        for op in ("expand", "rotate", "axesion"):
            before = best
            best = operator_batch(best, op, config.se, counted, space, rng, alpha=alpha, **kw)
            if best.value < before.value:
                best = operator_batch(
                    best, "translate", config.se, counted, space, rng,
                    alpha=alpha, x_prev=before.x, **kw,
                )
        trace.append(it, best, alpha)
        if callback is not None:
            callback(it, best, alpha)
        alpha = alpha / config.fc
    return best, trace
