"""Benchmark test functions for optimizer smoke tests, with default bounds."""

import numpy as np

__all__ = ["sphere", "rastrigin", "rosenbrock", "BENCHMARKS"]


def sphere(x):
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, x))


def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


# name -> (function, lower, upper)
BENCHMARKS = {
    "sphere": (sphere, -10.0, 10.0),
    "rastrigin": (rastrigin, -5.12, 5.12),
    "rosenbrock": (rosenbrock, -5.0, 10.0),
}
