import numpy as np
import pytest

from sta_ident.pso import PsoConfig, inertia_weight, pso_minimize
from sta_ident.sta import SearchSpace


def sphere(x):
    return float(np.dot(x, x))


def test_sphere_reference_run():
    space = SearchSpace.uniform(-10, 10, 2)
    for seed in range(5):
        best, _ = pso_minimize(sphere, space, PsoConfig(seed=seed))
        assert best.value <= 1e-4


def test_particle_at_optimum_keeps_gbest_zero():
    best, trace = pso_minimize(sphere, SearchSpace.uniform(-10, 10, 2), PsoConfig(seed=3), x0=[[0.0, 0.0]])
    assert best.value == 0.0
    assert np.all(trace.best_values == 0.0)


def test_inertia_weight_schedule():
    cfg = PsoConfig(max_iter=100, seed=0)
    _, trace = pso_minimize(sphere, SearchSpace.uniform(-1, 1, 2), cfg)
    t = np.arange(100)
    np.testing.assert_allclose(trace.alphas, 0.9 + (0.4 - 0.9) * t / 99, rtol=0, atol=1e-15)
    assert trace.alphas[0] == 0.9 and trace.alphas[-1] == pytest.approx(0.4, abs=1e-15)
    assert inertia_weight(PsoConfig(max_iter=1), 0) == 0.9


def test_monotone_feasible_deterministic():
    space = SearchSpace([-1.0, 0.0, 2.0], [1.0, 0.5, 3.0])
    seen = []

    def f(x):
        seen.append(x.copy())
        return float(np.sum((x - 0.7) ** 2))

    best, trace = pso_minimize(f, space, PsoConfig(max_iter=40, swarm_size=12, seed=9))
    assert np.all(np.diff(trace.best_values) <= 0)
    assert all(space.contains(p) for p in seen)
    assert trace.n_evals == len(seen) == 12 * 41
    again, trace2 = pso_minimize(f, space, PsoConfig(max_iter=40, swarm_size=12, seed=9))
    assert trace.records() == trace2.records()
    assert again.value == best.value


def test_objective_errors_propagate():
    def boom(x):
        raise RuntimeError("bad")

    with pytest.raises(RuntimeError):
        pso_minimize(boom, SearchSpace.uniform(0, 1, 2), PsoConfig(seed=0))


@pytest.mark.parametrize("kwargs", [dict(swarm_size=0), dict(max_iter=0), dict(w_start=0.3, w_end=0.4)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        PsoConfig(**kwargs)
