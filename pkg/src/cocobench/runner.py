"""Seeded trial execution and CSV emission.

Every trial owns its own generator, derived from (master seed, trial
index), so results do not depend on execution order or on how many
worker processes ran them; CSV assembly always orders by trial index.
Floats are written with 12 significant digits so identical configs
produce identical bytes.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .baselines import DriftPlusPenaltyAdagrad, Recoo, Switch, run_baseline
from .clasp import ConstraintMode, run
from .geometry import ProjectionSettings
from .metrics import RunRecord, TrialSummary, compute_metrics
from .problems import synthetic1d_hindsight

__all__ = [
    "trial_rng",
    "run_single_trial",
    "run_trials",
    "write_trials_csv",
    "write_summary_csv",
    "ALGORITHM_NAMES",
]

ALGORITHM_NAMES = ("clasp", "recoo", "dpp-adagrad", "switch")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """The generator owned by one trial: PCG64 seeded from the pair
    (master seed, trial index)."""
    return np.random.default_rng(
        np.random.SeedSequence([int(master_seed), int(trial_index)])
    )


def _make_baseline(name: str, action_set, schedule,
                   settings: ProjectionSettings):
    if name == "recoo":
        return Recoo(action_set, settings=settings)
    if name == "dpp-adagrad":
        return DriftPlusPenaltyAdagrad(action_set, settings=settings)
    if name == "switch":
        return Switch(action_set, schedule=schedule, settings=settings)
    raise ValueError(
        "unknown algorithm %r; choose from %s"
        % (name, ", ".join(ALGORITHM_NAMES))
    )


def run_single_trial(problem, algorithm: str, schedule,
                     mode: ConstraintMode, T: int, master_seed: int,
                     trial_index: int,
                     settings: ProjectionSettings = ProjectionSettings()
                     ) -> RunRecord:
    """Execute one seeded trial and fill its score curves.

    The trial's generator first draws the initial action, then the
    round data.  On problems with closed-form hindsight solutions the
    regret curve against the exact prefix-optimal comparator is filled
    in; elsewhere the regret fields stay empty.
    """
    rng = trial_rng(master_seed, trial_index)
    x1 = problem.init_action(rng)
    action_set = problem.action_set()
    hindsight_data = None
    if problem.supports_comparator and hasattr(problem, "round_data"):
        hindsight_data = problem.round_data(rng, T)
        stream = problem.rounds_from_data(*hindsight_data)
    else:
        stream = problem.rounds(rng, T,
                                multi=(mode is ConstraintMode.MULTI))
    if algorithm == "clasp":
        record = run(stream, action_set, schedule, x1, mode, settings)
    else:
        learner = _make_baseline(algorithm, action_set, schedule, settings)
        record = run_baseline(learner, stream, x1)
    compute_metrics(record)
    if hindsight_data is not None:
        xs, fs = synthetic1d_hindsight(*hindsight_data)
        record.regret_curve = record.cum_loss - fs
        record.comparator = np.array([xs[-1]])
    return record


def _trial_worker(args) -> RunRecord:
    return run_single_trial(*args)


def run_trials(problem, algorithm: str, schedule, mode: ConstraintMode,
               T: int, n_trials: int, master_seed: int,
               settings: ProjectionSettings = ProjectionSettings(),
               workers: int = 1) -> list:
    """Run n_trials seeded trials, optionally on a process pool.

    Results are identical for any worker count: trial i depends only on
    (master_seed, i), and the returned list is ordered by index.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    tasks = [
        (problem, algorithm, schedule, mode, T, master_seed, i, settings)
        for i in range(n_trials)
    ]
    if workers <= 1:
        return [_trial_worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_trial_worker, tasks))


def _fmt(v: float) -> str:
    return "%.12g" % v


def write_trials_csv(path, records) -> None:
    """Per-round rows for every trial: trial, t, cum_loss,
    regret_or_blank, ccv1, ccv2, eta, dist_xt, dist_xhat.

    The regret field is left empty (not zero) for runs without a
    comparator.
    """
    lines = ["trial,t,cum_loss,regret_or_blank,ccv1,ccv2,eta,"
             "dist_xt,dist_xhat"]
    for i, r in enumerate(records):
        if r.cum_loss is None:
            compute_metrics(r)
        for t in range(r.horizon):
            regret = ("" if r.regret_curve is None
                      else _fmt(r.regret_curve[t]))
            lines.append(",".join([
                str(i),
                str(t + 1),
                _fmt(r.cum_loss[t]),
                regret,
                _fmt(r.ccv1[t]),
                _fmt(r.ccv2[t]),
                _fmt(r.etas[t]),
                _fmt(r.round_distances[t]),
                _fmt(r.step_distances[t]),
            ]))
    _write_lines(path, lines)


def write_summary_csv(path, summary: TrialSummary) -> None:
    """Aggregated rows: t, metric, mean, ci95, grouped by metric in a
    fixed order."""
    lines = ["t,metric,mean,ci95"]
    order = [m for m in ("cum_loss", "regret", "ccv1", "ccv2")
             if m in summary.metrics]
    for name in order:
        mean, half = summary.metrics[name]
        for t in range(summary.horizon):
            lines.append(",".join([
                str(t + 1), name, _fmt(mean[t]), _fmt(half[t]),
            ]))
    _write_lines(path, lines)


def _write_lines(path, lines) -> None:
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
