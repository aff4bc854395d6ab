import numpy as np
import pytest

from sta_ident.problems import (
    PENALTY,
    IdentificationProblem,
    TuningProblem,
    example1_identification,
    example1_tuning,
    example2_identification,
    example2_tuning,
)
from sta_ident.sta import SearchSpace

from . import oracles


def test_true_params_give_zero():
    assert example1_identification()([0.5, 0.3, 1.8, 0.9]) == 0.0
    assert example2_identification()([10, 5, 9]) == 0.0
    assert example2_identification(delay="linear")([10, 5, 9]) == 0.0


def test_example1_perturbed_theta4():
    want = oracles.example1_identification_mse([0.5, 0.3, 1.8, 0.8])
    got = example1_identification()([0.5, 0.3, 1.8, 0.8])
    assert want > 0
    assert oracles.rel_close(got, want, 1e-12)


@pytest.mark.parametrize("i", range(4))
@pytest.mark.parametrize("eps", [-0.05, 0.05])
def test_example1_single_parameter_perturbation_is_worse(i, eps):
    theta = np.array([0.5, 0.3, 1.8, 0.9])
    theta[i] += eps
    assert example1_identification()(theta) > 0


def test_example1_identification_random_candidates():
    problem = example1_identification()
    rng = np.random.default_rng(10)
    for theta in rng.uniform(0, 2, (100, 4)):
        got = problem(theta)
        if got == PENALTY:
            continue
        assert oracles.rel_close(got, oracles.example1_identification_mse(theta), 1e-12)


@pytest.mark.parametrize("mode", ["round", "linear"])
def test_example2_identification_random_candidates(mode):
    problem = example2_identification(delay=mode)
    rng = np.random.default_rng(11)
    thetas = rng.uniform(0, 20, (100, 3))
    thetas[:, 1] = np.maximum(thetas[:, 1], 0.2)
    for theta in thetas:
        got = problem(theta)
        assert oracles.rel_close(got, oracles.fopdt_identification_mse(theta, mode=mode), 1e-12)


def test_example2_penalizes_degenerate_time_constant():
    assert example2_identification()([10, 0.0, 9]) == PENALTY


def test_example1_penalizes_divergence():
    assert example1_identification(n_samples=60)([2, 2, 2, 2]) == PENALTY


def test_wrong_parameter_count():
    with pytest.raises(ValueError):
        example1_identification()([0.5, 0.3, 1.8])


def test_tuning_zero_gains():
    assert example2_tuning()([0, 0, 0]) == 1.0
    assert example1_tuning()([0, 0, 0]) == pytest.approx(
        oracles.tuning_mse(oracles.example1_closed_loop([0, 0, 0])[0], 2.0), rel=1e-15
    )


def test_example1_tuning_random_candidates():
    problem = example1_tuning()
    rng = np.random.default_rng(12)
    for g in rng.uniform(0, 1, (100, 3)):
        got = problem(g)
        y = oracles.example1_closed_loop(g)[0]
        want = oracles.tuning_mse(y, 2.0)
        if got == PENALTY:
            assert not np.isfinite(want) or want > 1e12
            continue
        assert oracles.rel_close(got, want, 1e-12)


def test_example2_tuning_random_candidates():
    problem = example2_tuning()
    rng = np.random.default_rng(13)
    # small gains keep the 90-sample dead-time loop stable and the MSE informative
    for g in rng.uniform(0, 0.05, (100, 3)):
        want = oracles.tuning_mse(oracles.fopdt_closed_loop(g)[0], 1.0)
        assert oracles.rel_close(problem(g), want, 1e-10)


def test_tuning_unstable_loop_penalized():
    problem = TuningProblem("fopdt", [10, 5, 9], 1.0, SearchSpace.uniform(0, 1, 3), 20000)
    assert problem([1, 1, 1]) == PENALTY


def test_problem_validation():
    with pytest.raises(ValueError):
        IdentificationProblem("tank", [1, 2], np.ones(5), SearchSpace.uniform(0, 1, 2), 5)
    with pytest.raises(ValueError):
        IdentificationProblem("fopdt", [10, 5, 9], np.ones(5), SearchSpace.uniform(0, 1, 3), 10)
    with pytest.raises(ValueError):
        TuningProblem("fopdt", [10, 5, 9], 1.0, SearchSpace.uniform(0, 1, 2), 10)


def test_custom_input_sequence():
    u = np.sin(np.arange(12) * 0.4)
    problem = example1_identification(n_samples=12, u=u)
    theta = [0.4, 0.2, 1.5, 0.7]
    x1a, x2a, ya = oracles.example1_run([0.5, 0.3, 1.8, 0.9], list(u), 12)
    x1b, x2b, yb = oracles.example1_run(theta, list(u), 12)
    want = sum((a - b) ** 2 for pa, pb in ((x1a, x1b), (x2a, x2b), (ya, yb)) for a, b in zip(pa, pb)) / 12
    assert oracles.rel_close(problem(theta), want, 1e-12)


# Reported tuning values that this plant/controller arrangement does not reproduce.
# Kept as strict xfails so a future change that starts matching them is noticed.
_MISMATCH = "literal loop does not reproduce the reported figure; see README, Known deviations"


@pytest.mark.xfail(strict=True, reason=_MISMATCH)
def test_reported_example1_tuning_value():
    assert example1_tuning()([0.1445, 0.3410, 0.0922]) == pytest.approx(0.1000, abs=1e-3)


@pytest.mark.xfail(strict=True, reason=_MISMATCH)
def test_reported_example2_pi_tuning_value():
    assert example2_tuning()([1.0, 0.3196, 0.0]) == pytest.approx(6.3256e-2, abs=1e-4)


@pytest.mark.xfail(strict=True, reason=_MISMATCH)
def test_reported_example2_pid_tuning_value():
    pid = example2_tuning()([1.0, 0.3393, 0.2837])
    assert pid == pytest.approx(6.3258e-2, abs=1e-4)
    assert pid > example2_tuning()([1.0, 0.3196, 0.0])


def test_reported_example1_gains_settle():
    # the terminal behaviour of the reported gains does hold
    tr = example1_tuning().closed_loop([0.1445, 0.3410, 0.0922])
    assert abs(tr.states["x1"][-10:].mean()) <= 1e-2
    assert abs(tr.states["x2"][-10:].mean() - 1.1111) <= 1e-2
    assert abs(tr.y[-10:].mean() - 2.0) <= 1e-2
