"""Command-line front end.

Two subcommands: `run` executes seeded benchmark trials and writes
trials.csv plus summary.csv; `verify` checks a run against the explicit
regret and violation bounds (scalar family) or reports the hindsight
comparator's feasibility (margin problem).

Options can come from a flat key=value config file via --config; flags
override file entries, file entries override defaults, and unknown file
keys are rejected.  Exit codes: 0 success, 1 usage error, 2 runtime
failure (missing dataset file, infeasible intersection, failed bound
check).
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass

from .bounds import comparator_solve, verify_synthetic1d
from .clasp import ConstraintMode, ConvexStepSchedule, StronglyConvexStepSchedule
from .geometry import InfeasibleIntersection, ProjectionSettings
from .metrics import aggregate_trials
from .problems import PROBLEM_CLASSES, PROBLEM_NAMES, make_problem
from .runner import (
    ALGORITHM_NAMES,
    run_trials,
    trial_rng,
    write_summary_csv,
    write_trials_csv,
)

__all__ = ["RunConfig", "UsageError", "parse_config", "cmd_run",
           "cmd_verify", "main"]


class UsageError(Exception):
    """Bad flags, bad config keys, or invalid value ranges."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    problem: str
    algorithm: str = "clasp"
    schedule: str = "convex"
    beta: float = 0.5
    modulus: float | None = None
    mode: str = "transient"
    rounds: int = 1000
    trials: int = 100
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 10_000
    dataset: str | None = None
    out: str = "."
    workers: int = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


_MODES = {
    "transient": ConstraintMode.TRANSIENT,
    "persistent": ConstraintMode.PERSISTENT,
    "multi": ConstraintMode.MULTI,
}

_DEFAULTS = {
    "algorithm": "clasp",
    "schedule": "convex",
    "beta": 0.5,
    "modulus": None,
    "mode": "transient",
    "rounds": None,
    "trials": 100,
    "seed": 0,
    "tol": 1e-8,
    "max_iter": 10_000,
    "dataset": None,
    "out": ".",
    "workers": 1,
}

_KEY_TYPES = {
    "algorithm": str, "problem": str, "schedule": str, "mode": str,
    "dataset": str, "out": str,
    "beta": float, "modulus": float, "tol": float,
    "rounds": int, "trials": int, "seed": int, "max_iter": int,
    "workers": int,
}

_KEY_ALIASES = {"algo": "algorithm", "m": "modulus"}


def _build_parser() -> _Parser:
    parser = _Parser(prog="cocobench",
                     description="constrained online learning workbench")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, help_text in (
        ("run", "execute seeded trials and write CSV outputs"),
        ("verify", "check explicit bounds / comparator feasibility"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None,
                       help="flat key=value config file")
        p.add_argument("--algo", dest="algorithm", default=None,
                       help="one of %s" % (", ".join(ALGORITHM_NAMES)))
        p.add_argument("--problem", default=None,
                       help="one of %s" % (", ".join(PROBLEM_NAMES)))
        p.add_argument("--schedule", default=None,
                       help="convex or strongly-convex")
        p.add_argument("--beta", type=float, default=None,
                       help="convex-schedule exponent in (0,1)")
        p.add_argument("--modulus", type=float, default=None,
                       help="strong-convexity modulus for the "
                            "strongly-convex schedule")
        p.add_argument("--mode", default=None,
                       help="transient, persistent, or multi")
        p.add_argument("--rounds", type=int, default=None,
                       help="horizon T (default: problem preset)")
        p.add_argument("--trials", type=int, default=None,
                       help="number of seeded trials")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--tol", type=float, default=None,
                       help="projection stopping tolerance")
        p.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                       help="projection cycle cap")
        p.add_argument("--dataset", default=None,
                       help="wine data file (svm only)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes for trials")
    return parser


def _read_config_file(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except FileNotFoundError:
        raise UsageError("config file not found: %s" % path) from None
    entries = {}
    for i, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(
                "config line %d is not key=value: %r" % (i, raw)
            )
        key, value = line.split("=", 1)
        key = key.strip().lower().replace("-", "_")
        key = _KEY_ALIASES.get(key, key)
        if key not in _KEY_TYPES:
            raise UsageError("unknown config key %r (line %d)" % (key, i))
        try:
            entries[key] = _KEY_TYPES[key](value.strip())
        except ValueError:
            raise UsageError(
                "config key %r has invalid value %r" % (key, value.strip())
            ) from None
    return entries


def parse_config(argv=None) -> RunConfig:
    """Merge flags over config-file entries over defaults, validate
    ranges, and return the frozen configuration."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise UsageError("a subcommand is required: run or verify")
    file_entries = _read_config_file(ns.config) if ns.config else {}

    def pick(key):
        flag = getattr(ns, key, None)
        if flag is not None:
            return flag
        if key in file_entries:
            return file_entries[key]
        return _DEFAULTS.get(key)

    problem = pick("problem")
    if problem is None:
        raise UsageError("problem is required (--problem)")
    if problem not in PROBLEM_NAMES:
        raise UsageError(
            "unknown problem %r; choose from %s"
            % (problem, ", ".join(PROBLEM_NAMES))
        )
    cls = PROBLEM_CLASSES[problem]

    algorithm = pick("algorithm")
    if algorithm not in ALGORITHM_NAMES:
        raise UsageError(
            "unknown algorithm %r; choose from %s"
            % (algorithm, ", ".join(ALGORITHM_NAMES))
        )
    if algorithm in cls.excluded_algorithms:
        raise UsageError(
            "algorithm %r is excluded on problem %r" % (algorithm, problem)
        )

    schedule = pick("schedule")
    if schedule not in ("convex", "strongly-convex"):
        raise UsageError("schedule must be convex or strongly-convex")
    beta = float(pick("beta"))
    if not (0.0 < beta < 1.0):
        raise UsageError("beta must lie strictly in (0, 1), got %g" % beta)
    modulus = pick("modulus")
    if schedule == "strongly-convex":
        if modulus is None and cls.strong_modulus > 0:
            modulus = cls.strong_modulus
        if modulus is None or float(modulus) <= 0:
            raise UsageError(
                "the strongly-convex schedule needs a positive modulus "
                "(--modulus); problem %r declares none" % problem
            )
        modulus = float(modulus)

    mode = pick("mode")
    if mode not in _MODES:
        raise UsageError("mode must be transient, persistent, or multi")
    if mode != "transient" and algorithm != "clasp":
        raise UsageError(
            "mode %r applies to clasp only; baselines keep their own "
            "constraint memory" % mode
        )
    if mode == "multi" and problem not in ("linreg", "linreg-long"):
        raise UsageError(
            "multi mode needs a problem revealing several constraints "
            "per round; %r reveals one" % problem
        )

    rounds = pick("rounds")
    if rounds is None:
        rounds = cls.default_horizon
    if int(rounds) < 1:
        raise UsageError("rounds must be at least 1")
    trials = int(pick("trials"))
    if trials < 1:
        raise UsageError("trials must be at least 1")
    seed = int(pick("seed"))
    tol = float(pick("tol"))
    if tol <= 0:
        raise UsageError("tol must be positive")
    max_iter = int(pick("max_iter"))
    if max_iter < 1:
        raise UsageError("max_iter must be at least 1")
    workers = int(pick("workers"))
    if workers < 1:
        raise UsageError("workers must be at least 1")

    dataset = pick("dataset")
    if problem == "svm" and dataset is None:
        raise UsageError("the svm problem needs --dataset")

    command = ns.command
    if command == "verify":
        if algorithm != "clasp":
            raise UsageError("verify checks the clasp learner only")
        if problem not in ("synthetic-1d", "svm"):
            raise UsageError(
                "verify supports synthetic-1d (bound checks) and svm "
                "(comparator feasibility); %r has no tractable hindsight "
                "solve" % problem
            )

    return RunConfig(
        command=command, problem=problem, algorithm=algorithm,
        schedule=schedule, beta=beta, modulus=modulus, mode=mode,
        rounds=int(rounds), trials=trials, seed=seed, tol=tol,
        max_iter=max_iter, dataset=dataset, out=pick("out"),
        workers=workers,
    )


def _build_schedule(cfg: RunConfig):
    if cfg.schedule == "strongly-convex":
        return StronglyConvexStepSchedule(cfg.modulus)
    return ConvexStepSchedule(cfg.beta)


def cmd_run(cfg: RunConfig) -> int:
    """Execute the configured trials and write trials.csv and
    summary.csv into the output directory."""
    problem = make_problem(cfg.problem, cfg.dataset)
    schedule = _build_schedule(cfg)
    settings = ProjectionSettings(cfg.tol, cfg.max_iter)
    records = run_trials(problem, cfg.algorithm, schedule,
                         _MODES[cfg.mode], cfg.rounds, cfg.trials,
                         cfg.seed, settings, workers=cfg.workers)
    summary = aggregate_trials(records)
    trials_path = os.path.join(cfg.out, "trials.csv")
    summary_path = os.path.join(cfg.out, "summary.csv")
    write_trials_csv(trials_path, records)
    write_summary_csv(summary_path, summary)
    print("wrote %s and %s (%d trials x %d rounds, algorithm %s)"
          % (trials_path, summary_path, cfg.trials, cfg.rounds,
             cfg.algorithm))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    """Bound verification (scalar family) or comparator feasibility
    report (margin problem)."""
    settings = ProjectionSettings(cfg.tol, cfg.max_iter)
    if cfg.problem == "synthetic-1d":
        report = verify_synthetic1d(_build_schedule(cfg), T=cfg.rounds,
                                    master_seed=cfg.seed,
                                    settings=settings)
        for line in report.lines():
            print(line)
        if report.all_passed:
            print("all %d bound checks passed" % len(report.checks))
            return 0
        print("bound checks FAILED", file=sys.stderr)
        return 2
    problem = make_problem(cfg.problem, cfg.dataset)
    rng = trial_rng(cfg.seed, 0)
    problem.init_action(rng)
    rounds = list(problem.rounds(rng, cfg.rounds))
    result = comparator_solve(rounds, problem.action_set(),
                              settings=settings)
    if not result.feasible:
        print("comparator infeasible over %d rounds: the constraint "
              "intersection is empty (residual %.3g); regret is "
              "undefined, report cumulative loss instead"
              % (cfg.rounds, result.residual))
        return 2
    print("comparator found: objective %.6g (stagnation gap %.3g, "
          "membership residual %.3g)"
          % (result.objective, result.gap, result.residual))
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        print("try: cocobench run --problem synthetic-1d, or "
              "cocobench --help", file=sys.stderr)
        return 1
    try:
        if cfg.command == "run":
            return cmd_run(cfg)
        return cmd_verify(cfg)
    except UsageError as exc:
        print("usage error: %s" % exc, file=sys.stderr)
        return 1
    except InfeasibleIntersection as exc:
        print("infeasible: %s" % exc, file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
