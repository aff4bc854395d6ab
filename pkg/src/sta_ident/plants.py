"""
Discrete-time plant simulators and the incremental PID controller.

Two plants are provided:

``example1``
    Unstable bilinear system with states ``x1, x2`` and output
    ``y = theta3*x2 - theta4*x1**2``, started from ``x1 = x2 = 1``.
``fopdt``
    First order plus dead time plant discretized as
    ``x(k+1) = (1 - 1/(10T)) x(k) + K/(10T) u(k - 10 tau)``, ``y = x``,
    started from rest. A non-integer lag ``10 tau`` is rounded to whole
    samples, or optionally interpolated between the two neighbouring input
    samples (``delay="linear"``).

Trajectories cover ``k = 0 .. n_steps - 1``. Signals before ``k = 0`` are
zero. A run whose state stops being finite is flagged ``diverged`` and cut
short at the first non-finite sample.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.signal import lfilter

__all__ = [
    "Example1Params",
    "FopdtParams",
    "PidGains",
    "PidState",
    "Trajectory",
    "EXAMPLE1_TRUE",
    "FOPDT_TRUE",
    "simulate_example1",
    "simulate_fopdt",
    "pid_step",
    "closed_loop_example1",
    "closed_loop_fopdt",
    "fopdt_delay",
    "DELAY_MODES",
    "MIN_TIME_CONSTANT",
]

# Smallest accepted time constant; the recurrence divides by 10*T.
MIN_TIME_CONSTANT = 1e-9


@dataclass(frozen=True)
class Example1Params:
    theta1: float
    theta2: float
    theta3: float
    theta4: float

    @classmethod
    def from_vector(cls, v) -> "Example1Params":
        v = [float(a) for a in v]
        if len(v) != 4:
            raise ValueError(f"example1 has 4 parameters, got {len(v)}")
        return cls(*v)

    def as_vector(self) -> np.ndarray:
        return np.array([self.theta1, self.theta2, self.theta3, self.theta4])


@dataclass(frozen=True)
class FopdtParams:
    k_gain: float
    t_const: float
    tau: float

    @classmethod
    def from_vector(cls, v) -> "FopdtParams":
        v = [float(a) for a in v]
        if len(v) != 3:
            raise ValueError(f"fopdt has 3 parameters (K, T, tau), got {len(v)}")
        return cls(*v)

    def as_vector(self) -> np.ndarray:
        return np.array([self.k_gain, self.t_const, self.tau])

    @property
    def delay_steps(self) -> int:
        return fopdt_delay(self.tau)[0]


EXAMPLE1_TRUE = Example1Params(0.5, 0.3, 1.8, 0.9)
FOPDT_TRUE = FopdtParams(10.0, 5.0, 9.0)


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    @classmethod
    def from_vector(cls, v) -> "PidGains":
        kp, ki, kd = (float(a) for a in v)
        return cls(kp, ki, kd)

    def as_vector(self) -> np.ndarray:
        return np.array([self.kp, self.ki, self.kd])


@dataclass(frozen=True)
class PidState:
    """Controller memory: ``u(k-1)``, ``e(k-1)``, ``e(k-2)``."""

    u_prev: float = 0.0
    e_prev1: float = 0.0
    e_prev2: float = 0.0


@dataclass
class Trajectory:
    """Time-indexed signals of one simulation.

    ``states`` maps state names (``x1``, ``x2`` or ``x``) to arrays. ``u`` is
    the plant input and ``e`` the tracking error, ``e`` is ``None`` for open
    loop runs.
    """

    states: dict[str, np.ndarray]
    y: np.ndarray
    u: np.ndarray
    e: Optional[np.ndarray] = None
    diverged: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.y)

    @property
    def k(self) -> np.ndarray:
        return np.arange(len(self.y))

    def columns(self) -> list[str]:
        cols = ["k", *self.states, "y", "u"]
        if self.e is not None:
            cols.append("e")
        return cols

    def to_csv(self, path=None, order: Optional[Sequence[str]] = None) -> Optional[str]:
        """Write one row per sample, columns ``k, <states>, y, u[, e]`` by default.

        ``order`` rearranges the columns. Returns the text when no path is given.
        """
        n = len(self)
        data = {"k": self.k, **self.states, "y": self.y, "u": self.u[:n]}
        if self.e is not None:
            data["e"] = self.e
        cols = list(order) if order is not None else self.columns()
        if sorted(cols) != sorted(data):
            raise ValueError(f"columns must be a permutation of {list(data)}")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for i in range(n):
            w.writerow([int(data[c][i]) if c == "k" else repr(float(data[c][i])) for c in cols])
        if path is None:
            return buf.getvalue()
        with open(path, "w", newline="") as fh:
            fh.write(buf.getvalue())
        return None


def _as_input(u, n_steps: int) -> np.ndarray:
    if np.isscalar(u):
        return np.full(n_steps, float(u))
    u = np.asarray(u, dtype=float)
    if u.size < n_steps:
        raise ValueError(f"input has {u.size} samples, need at least {n_steps}")
    return u[:n_steps]


def _check_steps(n_steps):
    if not isinstance(n_steps, (int, np.integer)) or n_steps < 1:
        raise ValueError(f"n_steps must be a positive integer, got {n_steps!r}")


# -- example 1 --------------------------------------------------------------


def simulate_example1(params, u, n_steps: int) -> Trajectory:
    """Open-loop run of the bilinear plant.

    ``u`` is a sequence of at least ``n_steps`` samples or a constant.
    """
    _check_steps(n_steps)
    p = params if isinstance(params, Example1Params) else Example1Params.from_vector(params)
    u = _as_input(u, n_steps)
    # plain floats overflow to inf quietly; divergence is caught below
    u_list = u.tolist()
    t1, t2, t3, t4 = p.theta1, p.theta2, p.theta3, p.theta4

    x1 = np.empty(n_steps)
    x2 = np.empty(n_steps)
    y = np.empty(n_steps)
    a, b = 1.0, 1.0
    n = n_steps
    diverged = False
    for k in range(n_steps):
        sq = a * a
        yk = t3 * b - t4 * sq
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(yk)):
            n, diverged = k, True
            break
        x1[k], x2[k], y[k] = a, b, yk
        a, b = t1 * a * b, t2 * sq + u_list[k]
    return Trajectory({"x1": x1[:n], "x2": x2[:n]}, y[:n], u[:n], diverged=diverged)


def closed_loop_example1(gains, y_ref: float, n_steps: int, params=EXAMPLE1_TRUE) -> Trajectory:
    """Bilinear plant under incremental PID control.

    Each step reads ``y(k)``, forms ``e(k) = y_ref - y(k)``, computes ``u(k)``
    and advances the plant with it.
    """
    _check_steps(n_steps)
    g = gains if isinstance(gains, PidGains) else PidGains.from_vector(gains)
    p = params if isinstance(params, Example1Params) else Example1Params.from_vector(params)
    t1, t2, t3, t4 = p.theta1, p.theta2, p.theta3, p.theta4
    kp, ki, kd = g.kp, g.ki, g.kd

    x1 = np.empty(n_steps)
    x2 = np.empty(n_steps)
    y = np.empty(n_steps)
    u = np.empty(n_steps)
    e = np.empty(n_steps)
    a, b = 1.0, 1.0
    u1 = e1 = e2 = 0.0
    n = n_steps
    diverged = False
    for k in range(n_steps):
        sq = a * a
        yk = t3 * b - t4 * sq
        if not (math.isfinite(a) and math.isfinite(b) and math.isfinite(yk)):
            n, diverged = k, True
            break
        ek = y_ref - yk
        uk = u1 + kp * (ek - e1) + ki * ek + kd * (ek - 2.0 * e1 + e2)
        x1[k], x2[k], y[k], u[k], e[k] = a, b, yk, uk, ek
        a, b = t1 * a * b, t2 * sq + uk
        u1, e2, e1 = uk, e1, ek
    return Trajectory({"x1": x1[:n], "x2": x2[:n]}, y[:n], u[:n], e[:n], diverged=diverged)


# -- incremental PID --------------------------------------------------------


def pid_step(gains: PidGains, state: PidState, e_k: float) -> tuple[float, PidState]:
    """One step of the velocity-form PID.

    ``u(k) = u(k-1) + kp (e(k) - e(k-1)) + ki e(k) + kd (e(k) - 2 e(k-1) + e(k-2))``
    """
    du = (
        gains.kp * (e_k - state.e_prev1)
        + gains.ki * e_k
        + gains.kd * (e_k - 2.0 * state.e_prev1 + state.e_prev2)
    )
    u_k = state.u_prev + du
    return u_k, PidState(u_k, e_k, state.e_prev1)


# -- FOPDT ------------------------------------------------------------------


DELAY_MODES = ("round", "linear")


def fopdt_delay(tau: float, mode: str = "round") -> tuple[int, float]:
    """Input lag ``10 tau`` in samples as ``(whole steps, fraction)``.

    ``round`` uses ``round(10 tau)`` whole steps and no fraction. ``linear``
    keeps the fraction ``f`` and feeds the plant ``(1 - f) u(k-d) + f u(k-d-1)``.
    Both agree when ``10 tau`` is an integer.
    """
    if not tau >= 0:
        raise ValueError(f"tau must be non-negative, got {tau!r}")
    lag = 10.0 * tau
    if mode == "round":
        return int(round(lag)), 0.0
    if mode != "linear":
        raise ValueError(f"delay mode must be one of {DELAY_MODES}, got {mode!r}")
    d = int(np.floor(lag))
    f = lag - d
    # snap lags that are integers up to rounding noise, e.g. 10 * 0.3
    if f < 1e-9 or f > 1.0 - 1e-9:
        d, f = int(round(lag)), 0.0
    return d, f


def _delay_taps(tau: float, mode: str) -> tuple[int, np.ndarray]:
    d, f = fopdt_delay(tau, mode)
    return d, (np.array([1.0]) if f == 0.0 else np.array([1.0 - f, f]))


def _fopdt_coefficients(p: FopdtParams) -> tuple[float, float]:
    if not p.t_const > MIN_TIME_CONSTANT:
        raise ValueError(f"time constant must be positive, got {p.t_const!r}")
    c = 1.0 / (10.0 * p.t_const)
    return 1.0 - c, p.k_gain * c


def simulate_fopdt(params, u, n_steps: int, delay: str = "round") -> Trajectory:
    """Open-loop run of the delayed first order plant from rest.

    Raises ``ValueError`` for a non-positive time constant or negative delay.
    """
    _check_steps(n_steps)
    p = params if isinstance(params, FopdtParams) else FopdtParams.from_vector(params)
    a, b = _fopdt_coefficients(p)
    d, taps = _delay_taps(p.tau, delay)
    u = _as_input(u, n_steps)

    # x(k) = a x(k-1) + b * (taps applied to u at lag d+1)
    num = np.zeros(d + 1 + taps.size)
    num[d + 1:] = b * taps
    with np.errstate(over="ignore", invalid="ignore"):
        x = lfilter(num, [1.0, -a], u)
    return _finish_fopdt(x, u, None)


def closed_loop_fopdt(
    gains, y_ref: float, n_steps: int, params=FOPDT_TRUE, delay: str = "round"
) -> Trajectory:
    """Delayed first order plant under incremental PID control.

    The loop is linear, so it is run as a single recursive filter. With
    ``a, b`` the plant coefficients and ``d`` the input lag, the plant is
    ``b z^-(d+1) taps(z) / (1 - a z^-1)`` and the controller
    ``(c0 + c1 z^-1 + c2 z^-2) / (1 - z^-1)``.
    """
    _check_steps(n_steps)
    g = gains if isinstance(gains, PidGains) else PidGains.from_vector(gains)
    p = params if isinstance(params, FopdtParams) else FopdtParams.from_vector(params)
    a, b = _fopdt_coefficients(p)
    d, taps = _delay_taps(p.tau, delay)

    ctrl = np.array([g.kp + g.ki + g.kd, -(g.kp + 2.0 * g.kd), g.kd])
    # plant * controller numerator, aligned on powers of z^-1
    loop_num = np.zeros(d + 1 + taps.size + 2)
    loop_num[d + 1:] = b * np.convolve(taps, ctrl)
    # (1 - a z^-1)(1 - z^-1)
    den = np.zeros(loop_num.size)
    den[:3] = [1.0, -(1.0 + a), a]
    closed_den = den + loop_num

    r = np.full(n_steps, float(y_ref))
    with np.errstate(over="ignore", invalid="ignore"):
        y = lfilter(loop_num, closed_den, r)
        e = r - y
        u = lfilter(ctrl, [1.0, -1.0], e)
    return _finish_fopdt(y, u, e)


def _finish_fopdt(x, u, e) -> Trajectory:
    ok = np.isfinite(x)
    if e is not None:
        ok &= np.isfinite(u) & np.isfinite(e)
    diverged = not ok.all()
    n = int(np.argmin(ok)) if diverged else len(x)
    x = x[:n]
    return Trajectory(
        {"x": x}, x.copy(), np.asarray(u)[:n], None if e is None else e[:n], diverged=diverged
    )


def step_input(n_steps: int, level: float = 1.0) -> np.ndarray:
    return np.full(n_steps, float(level))


def trajectory_from_rows(rows: Sequence[dict]) -> Trajectory:
    """Rebuild a trajectory from CSV rows written by :meth:`Trajectory.to_csv`."""
    keys = list(rows[0])
    states = {c: np.array([float(r[c]) for r in rows]) for c in keys if c in ("x", "x1", "x2")}
    e = np.array([float(r["e"]) for r in rows]) if "e" in keys else None
    return Trajectory(
        states,
        np.array([float(r["y"]) for r in rows]),
        np.array([float(r["u"]) for r in rows]),
        e,
    )
