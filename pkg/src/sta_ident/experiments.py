"""
Multi-trial experiment runner and report writer.

An experiment runs ``n_trials`` independent optimizer runs with seeds
``seed + i`` on one problem and summarizes the final objective values. Reports
written to the output directory:

``stats.json`` / ``stats.csv``
    aggregate statistics, best parameters, evaluation count
``trace_trial<i>.csv``
    per-iteration best value, step parameter and decision vector
``best_params.json``
    best decision vector over all trials
``closed_loop.csv``
    tuning experiments only, closed loop under the best gains
"""

from __future__ import annotations

import csv
import json
import logging
import math
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from .plants import DELAY_MODES
from .problems import (
    PARAM_NAMES,
    IdentificationProblem,
    TuningProblem,
    example1_identification,
    example1_tuning,
    example2_identification,
    example2_tuning,
)
from .pso import PsoConfig, pso_minimize
from .sta import Candidate, RunTrace, SearchSpace, StaConfig, sta_minimize

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "TrialStats",
    "ExperimentResult",
    "EXPERIMENTS",
    "compute_stats",
    "build_problem",
    "run_experiment",
    "emit_reports",
    "median_trial",
    "load_config",
]

log = logging.getLogger(__name__)

EXPERIMENTS = (
    "example1-identify",
    "example1-tune",
    "example2-identify",
    "example2-tune",
    "custom",
)
ALGORITHMS = ("sta", "pso")


class ConfigError(ValueError):
    """Experiment configuration rejected before any run."""


@dataclass
class ExperimentConfig:
    experiment: str
    algorithm: str = "sta"
    config: dict = field(default_factory=dict)
    n_trials: int = 30
    seed: int = 0
    out_dir: Optional[str] = None
    use_true_params: bool = False
    plant_params: Optional[list] = None
    delay: str = "round"
    median_trace: bool = False
    problem: Optional[dict] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if not isinstance(self.n_trials, int) or isinstance(self.n_trials, bool) or self.n_trials < 1:
            raise ConfigError(f"n_trials must be a positive integer, got {self.n_trials!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.delay not in DELAY_MODES:
            raise ConfigError(f"delay must be one of {DELAY_MODES}, got {self.delay!r}")
        if not isinstance(self.config, dict):
            raise ConfigError("config must be an object")
        if "seed" in self.config:
            raise ConfigError("set the seed at top level, trial seeds are seed + i")
        try:
            self.algorithm_config(0)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {self.algorithm} config: {exc}") from None
        if (self.experiment == "custom") != (self.problem is not None):
            raise ConfigError("a problem block is required for, and only for, custom experiments")
        if self.plant_params is not None and self.use_true_params:
            raise ConfigError("plant_params and use_true_params are mutually exclusive")

    @property
    def is_tuning(self) -> bool:
        if self.experiment == "custom":
            return self.problem.get("task") == "tune"
        return self.experiment.endswith("-tune")

    def algorithm_config(self, seed: int) -> Union[StaConfig, PsoConfig]:
        cls = StaConfig if self.algorithm == "sta" else PsoConfig
        return cls(**self.config, seed=seed)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        if "experiment" not in d:
            raise ConfigError("missing required key 'experiment'")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


@dataclass(frozen=True)
class TrialStats:
    best: float
    mean: float
    worst: float
    st_dev: float
    per_trial: tuple[float, ...]


def compute_stats(values) -> TrialStats:
    """Best (min), mean, worst (max) and sample standard deviation.

    The standard deviation uses the ``n - 1`` denominator and is 0 for a
    single value.
    """
    values = [float(v) for v in values]
    if not values:
        raise ValueError("need at least one value")
    if not all(math.isfinite(v) for v in values):
        raise ValueError("values must be finite")
    sd = statistics.stdev(values) if len(values) > 1 else 0.0
    return TrialStats(min(values), statistics.fmean(values), max(values), sd, tuple(values))


def median_trial(values) -> int:
    """Index of the trial with the lower-median final value (ties by index)."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    return order[(len(order) - 1) // 2]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    problem: Union[IdentificationProblem, TuningProblem]
    stats: TrialStats
    bests: list[Candidate]
    traces: list[RunTrace]
    files: list[Path] = field(default_factory=list)

    @property
    def best_trial(self) -> int:
        return int(np.argmin([b.value for b in self.bests]))

    @property
    def best(self) -> Candidate:
        return self.bests[self.best_trial]

    @property
    def evals_total(self) -> int:
        return sum(t.n_evals for t in self.traces)

    @property
    def median_trial(self) -> int:
        return median_trial(list(self.stats.per_trial))


# -- problem construction ----------------------------------------------------


def _identify_plant(cfg: ExperimentConfig, problem: IdentificationProblem) -> np.ndarray:
    best, _ = sta_minimize(problem, problem.space, StaConfig(seed=cfg.seed))
    log.info("identified plant parameters %s (mse %.3e)", best.x.tolist(), best.value)
    return best.x


def build_problem(cfg: ExperimentConfig) -> Union[IdentificationProblem, TuningProblem]:
    """Construct the objective for an experiment.

    Tuning experiments use, in order of precedence, explicit ``plant_params``,
    the true plant when ``use_true_params`` is set, or parameters identified
    by one default STA run with the base seed.
    """
    if cfg.experiment == "custom":
        return _custom_problem(cfg)
    example = cfg.experiment.split("-")[0]
    if cfg.experiment.endswith("-identify"):
        if example == "example1":
            return example1_identification()
        return example2_identification(delay=cfg.delay)

    if cfg.plant_params is not None:
        params = np.asarray(cfg.plant_params, dtype=float)
    elif cfg.use_true_params:
        params = None
    elif example == "example1":
        params = _identify_plant(cfg, example1_identification())
    else:
        params = _identify_plant(cfg, example2_identification(delay=cfg.delay))
    try:
        if example == "example1":
            return example1_tuning(params)
        return example2_tuning(params, delay=cfg.delay)
    except ValueError as exc:
        raise ConfigError(f"plant_params: {exc}") from None


_CUSTOM_KEYS = {"task", "plant", "true_params", "plant_params", "lower", "upper", "n_samples", "u", "y_ref"}


def _custom_problem(cfg: ExperimentConfig):
    p = cfg.problem
    if not isinstance(p, dict):
        raise ConfigError("problem must be an object")
    unknown = sorted(set(p) - _CUSTOM_KEYS)
    if unknown:
        raise ConfigError(f"unknown problem keys: {', '.join(unknown)}")
    try:
        space = SearchSpace(p["lower"], p["upper"])
        n = int(p["n_samples"])
        if p.get("task") == "identify":
            u = p.get("u", 1.0)
            u = np.full(n, float(u)) if np.isscalar(u) else np.asarray(u, dtype=float)
            return IdentificationProblem(p["plant"], p["true_params"], u, space, n, cfg.delay)
        if p.get("task") == "tune":
            return TuningProblem(p["plant"], p["plant_params"], float(p["y_ref"]), space, n, cfg.delay)
    except KeyError as exc:
        raise ConfigError(f"problem block is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid problem block: {exc}") from None
    raise ConfigError("problem.task must be 'identify' or 'tune'")


# -- running -----------------------------------------------------------------


def run_experiment(cfg: Union[ExperimentConfig, dict], write: bool = True) -> ExperimentResult:
    """Run all trials and, if ``cfg.out_dir`` is set and ``write``, emit reports."""
    if isinstance(cfg, dict):
        cfg = ExperimentConfig.from_dict(cfg)
    problem = build_problem(cfg)
    minimize = sta_minimize if cfg.algorithm == "sta" else pso_minimize

    bests, traces = [], []
    for i in range(cfg.n_trials):
        best, trace = minimize(problem, problem.space, cfg.algorithm_config(cfg.seed + i))
        log.info("trial %d: %.6e", i, best.value)
        bests.append(best)
        traces.append(trace)

    stats = compute_stats([b.value for b in bests])
    result = ExperimentResult(cfg, problem, stats, bests, traces)
    if write and cfg.out_dir is not None:
        result.files = emit_reports(result, cfg.out_dir)
    return result


# -- reports -----------------------------------------------------------------


def stats_document(result: ExperimentResult) -> dict[str, Any]:
    cfg, s = result.config, result.stats
    doc = {
        "experiment": cfg.experiment,
        "algorithm": cfg.algorithm,
        "n_trials": cfg.n_trials,
        "best": s.best,
        "mean": s.mean,
        "worst": s.worst,
        "st_dev": s.st_dev,
        "best_params": result.best.x.tolist(),
        "param_names": list(result.problem.param_names),
        "best_trial": result.best_trial,
        "median_trial": result.median_trial,
        "evals_total": result.evals_total,
        "per_trial": list(s.per_trial),
        "config": cfg.to_dict(),
    }
    if isinstance(result.problem, TuningProblem):
        doc["plant_params"] = result.problem.plant_params.tolist()
    return doc


def _write_trace(path: Path, trial: int, trace: RunTrace, names) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "iteration", "best_value", "alpha_or_w", *names])
        for r in trace.rows:
            w.writerow([trial, r.iteration, repr(r.best_value), repr(r.alpha), *map(repr, r.best_x.tolist())])


def emit_reports(result: ExperimentResult, out_dir) -> list[Path]:
    """Write all report files into ``out_dir``.

    If writing fails part way, a ``PARTIAL`` marker listing the files that
    were completed is left behind and the error is re-raised.
    """
    out = Path(out_dir)
    written: list[Path] = []
    names = list(result.problem.param_names)
    try:
        out.mkdir(parents=True, exist_ok=True)
        stale = out / "PARTIAL"
        if stale.exists():
            stale.unlink()

        doc = stats_document(result)
        doc["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        path = out / "stats.json"
        path.write_text(json.dumps(doc, indent=2) + "\n")
        written.append(path)

        path = out / "stats.csv"
        cols = ["experiment", "algorithm", "n_trials", "best", "mean", "worst", "st_dev", "evals_total"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            w.writerow([repr(doc[c]) if isinstance(doc[c], float) else doc[c] for c in cols])
        written.append(path)

        for i, trace in enumerate(result.traces):
            path = out / f"trace_trial{i}.csv"
            _write_trace(path, i, trace, names)
            written.append(path)
        if result.config.median_trace:
            m = result.median_trial
            path = out / "trace_median.csv"
            _write_trace(path, m, result.traces[m], names)
            written.append(path)

        best = result.best
        path = out / "best_params.json"
        path.write_text(
            json.dumps(
                {
                    "params": dict(zip(names, best.x.tolist())),
                    "vector": best.x.tolist(),
                    "objective": best.value,
                    "trial": result.best_trial,
                },
                indent=2,
            )
            + "\n"
        )
        written.append(path)

        if isinstance(result.problem, TuningProblem):
            path = out / "closed_loop.csv"
            traj = result.problem.closed_loop(best.x)
            traj.to_csv(path, order=["k", "y", "u", "e", *traj.states])
            written.append(path)
    except OSError:
        try:
            (out / "PARTIAL").write_text("".join(f"{p.name}\n" for p in written))
        except OSError:
            pass
        raise
    log.info("wrote %d files to %s", len(written), out)
    return written
