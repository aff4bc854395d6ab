"""Global-best particle swarm optimizer with a linearly decreasing inertia weight."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .sta import Candidate, RunTrace, SearchSpace, clamp

__all__ = ["PsoConfig", "Particle", "pso_minimize", "inertia_weight"]


@dataclass(frozen=True)
class PsoConfig:
    """PSO settings. Defaults: 30 particles, 100 iterations, c1 = c2 = 1, w 0.9 -> 0.4."""

    swarm_size: int = 30
    max_iter: int = 100
    c1: float = 1.0
    c2: float = 1.0
    w_start: float = 0.9
    w_end: float = 0.4
    seed: Optional[int] = None

    def __post_init__(self):
        if not isinstance(self.swarm_size, (int, np.integer)) or self.swarm_size < 1:
            raise ValueError(f"swarm_size must be a positive integer, got {self.swarm_size!r}")
        if not isinstance(self.max_iter, (int, np.integer)) or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if self.w_start < self.w_end:
            raise ValueError("w_start must not be smaller than w_end")


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    personal_best: Candidate


def inertia_weight(config: PsoConfig, t: int) -> float:
    if config.max_iter == 1:
        return config.w_start
    return config.w_start + (config.w_end - config.w_start) * t / (config.max_iter - 1)


def pso_minimize(
    objective: Callable[[np.ndarray], float],
    space: SearchSpace,
    config: PsoConfig = PsoConfig(),
    x0=None,
) -> tuple[Candidate, RunTrace]:
    """Minimize ``objective`` over ``space``.

    Velocities start at zero and are not limited; positions are clamped to
    the box after every move. ``x0`` optionally fixes initial positions, one
    row per particle (fewer rows than ``swarm_size`` are topped up with
    uniform draws).

    The trace records the global best after each iteration and the inertia
    weight used in it.
    """
    rng = np.random.default_rng(config.seed)
    n, m = space.dim, config.swarm_size
    trace = RunTrace()

    def evaluate(x):
        trace.n_evals += 1
        return float(objective(x))

    pos = rng.uniform(space.lower, space.upper, size=(m, n))
    if x0 is not None:
        given = np.atleast_2d(np.asarray(x0, dtype=float))[:m]
        pos[: len(given)] = clamp(given, space)
    swarm = [Particle(p, np.zeros(n), Candidate(p, evaluate(p))) for p in pos]
    gbest = min((s.personal_best for s in swarm), key=lambda c: c.value)

    for t in range(config.max_iter):
        w = inertia_weight(config, t)
        r1 = rng.uniform(size=(m, n))
        r2 = rng.uniform(size=(m, n))
        for i, s in enumerate(swarm):
            s.velocity = (
                w * s.velocity
                + config.c1 * r1[i] * (s.personal_best.x - s.position)
                + config.c2 * r2[i] * (gbest.x - s.position)
            )
            s.position = clamp(s.position + s.velocity, space)
        for s in swarm:
            value = evaluate(s.position)
            if value < s.personal_best.value:
                s.personal_best = Candidate(s.position, value)
                if value < gbest.value:
                    gbest = s.personal_best
        trace.append(t, gbest, w)
    return gbest, trace
