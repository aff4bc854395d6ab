"""Command line entry point.

    sta-ident identify --example 1 --algo sta --trials 30 --out runs/ex1-id
    sta-ident tune --example 2 --algo pso --use-true-params --out runs/ex2-tune
    sta-ident simulate --example 1 --params 0.5 0.3 1.8 0.9 --steps 8
    sta-ident bench --function sphere --dim 2
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .experiments import ConfigError, ExperimentConfig, compute_stats, load_config, run_experiment
from .functions import BENCHMARKS
from .plants import DELAY_MODES, simulate_example1, simulate_fopdt
from .pso import PsoConfig, pso_minimize
from .sta import SearchSpace, StaConfig, sta_minimize


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--example", type=int, choices=(1, 2), help="worked example number")
    p.add_argument("--algo", choices=("sta", "pso"), help="optimizer (default sta)")
    p.add_argument("--config", metavar="FILE", help="JSON experiment config")
    p.add_argument("--trials", type=int, help="number of independent trials (default 30)")
    p.add_argument("--seed", type=int, help="base seed, trial i uses seed + i (default 0)")
    p.add_argument("--out", metavar="DIR", help="output directory for reports")
    p.add_argument("--delay", choices=DELAY_MODES, help="FOPDT lag handling (default round)")
    p.add_argument("--median-trace", action="store_true", help="also write trace_median.csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sta-ident",
        description="State transition algorithm for system identification and PID tuning.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("identify", help="estimate plant parameters")
    _add_common(p)
    p = sub.add_parser("tune", help="tune PID gains off-line")
    _add_common(p)
    p.add_argument("--use-true-params", action="store_true",
                   help="tune against the true plant instead of an identified one")

    p = sub.add_parser("simulate", help="open-loop plant response as CSV")
    p.add_argument("--example", type=int, choices=(1, 2), required=True)
    p.add_argument("--params", type=float, nargs="+", required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--input", type=float, default=1.0, help="constant input level")
    p.add_argument("--delay", choices=DELAY_MODES, default="round")
    p.add_argument("--out", metavar="FILE")

    p = sub.add_parser("bench", help="optimizer smoke test on a benchmark function")
    p.add_argument("--function", choices=sorted(BENCHMARKS), default="sphere")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--algo", choices=("sta", "pso"), default="sta")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--iters", type=int, default=100)
    return parser


def _experiment_config(args, task: str) -> ExperimentConfig:
    d = load_config(args.config) if args.config else {}
    if args.example is not None:
        exp = f"example{args.example}-{task}"
        if d.get("experiment", exp) != exp:
            raise ConfigError(f"--example {args.example} conflicts with config experiment {d['experiment']!r}")
        d["experiment"] = exp
    elif "experiment" not in d:
        raise ConfigError("give --example or a config file with an experiment")
    elif d["experiment"] != "custom" and not d["experiment"].endswith(f"-{task}"):
        raise ConfigError(f"config experiment {d['experiment']!r} is not a {task} experiment")
    for key, value in (
        ("algorithm", args.algo),
        ("n_trials", args.trials),
        ("seed", args.seed),
        ("out_dir", args.out),
        ("delay", args.delay),
    ):
        if value is not None:
            d[key] = value
    if args.median_trace:
        d["median_trace"] = True
    if getattr(args, "use_true_params", False):
        d["use_true_params"] = True
    return ExperimentConfig.from_dict(d)


def _cmd_experiment(args, task: str) -> int:
    cfg = _experiment_config(args, task)
    result = run_experiment(cfg)
    s = result.stats
    names = result.problem.param_names
    print(f"{cfg.experiment} / {cfg.algorithm}: {cfg.n_trials} trials, {result.evals_total} evaluations")
    print(f"  best {s.best:.4e}  mean {s.mean:.4e}  worst {s.worst:.4e}  st.dev {s.st_dev:.4e}")
    print("  best params: " + ", ".join(f"{n}={v:.6g}" for n, v in zip(names, result.best.x)))
    if cfg.out_dir:
        print(f"  reports in {cfg.out_dir}")
    return 0


def _cmd_simulate(args) -> int:
    if args.example == 1:
        traj = simulate_example1(args.params, args.input, args.steps)
    else:
        traj = simulate_fopdt(args.params, args.input, args.steps, args.delay)
    text = traj.to_csv()
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if traj.diverged:
        print(f"warning: state diverged after {len(traj)} steps", file=sys.stderr)
    return 0


def _cmd_bench(args) -> int:
    func, lo, hi = BENCHMARKS[args.function]
    space = SearchSpace.uniform(lo, hi, args.dim)
    values = []
    for i in range(args.trials):
        if args.algo == "sta":
            best, _ = sta_minimize(func, space, StaConfig(max_iter=args.iters, seed=args.seed + i))
        else:
            best, _ = pso_minimize(func, space, PsoConfig(max_iter=args.iters, seed=args.seed + i))
        values.append(best.value)
    s = compute_stats(values)
    print(json.dumps({"function": args.function, "dim": args.dim, "algorithm": args.algo,
                      "best": s.best, "mean": s.mean, "worst": s.worst, "st_dev": s.st_dev}))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command in ("identify", "tune"):
            return _cmd_experiment(args, "identify" if args.command == "identify" else "tune")
        if args.command == "simulate":
            return _cmd_simulate(args)
        return _cmd_bench(args)
    except ValueError as exc:
        parser.exit(2, f"sta-ident: error: {exc}\n")


if __name__ == "__main__":
    sys.exit(main())
