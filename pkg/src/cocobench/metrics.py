"""Run records, scoring, and trial aggregation.

A RunRecord is the per-round trajectory a learner produced plus the
derived score curves: cumulative loss, regret against a fixed
comparator when one exists, and three flavors of cumulative constraint
violation.  ccv1 sums positive parts, ccv2 sums their squares, and
ccv_hist additionally re-evaluates every past constraint at the current
action, which only makes sense (and is only affordable) for runs that
retain their constraint oracles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "RunRecord",
    "TrialSummary",
    "compute_metrics",
    "aggregate_trials",
    "fit_rate",
]


@dataclass
class RunRecord:
    """Trajectory and diagnostics of one run over T rounds.

    actions[t-1] is the committed point x_t; gradient_points[t-1] is
    the pre-projection step taken after round t was revealed.
    round_distances and step_distances are the distances of x_t and of
    the pre-projection point to round t's feasible set, and
    next_violations[t-1] is the raw constraint value of round t at the
    already-projected next action (its positive part is the residual
    the projection tolerance controls).  Oracle lists are kept only
    when the caller asked for them.
    """

    actions: np.ndarray
    gradient_points: np.ndarray
    losses: np.ndarray
    violations: np.ndarray
    round_distances: np.ndarray
    step_distances: np.ndarray
    etas: np.ndarray
    next_violations: np.ndarray
    mode: str = "transient"
    algorithm: str = "clasp"
    loss_oracles: list | None = None
    constraint_oracles: list | None = None
    cum_loss: np.ndarray | None = None
    ccv1: np.ndarray | None = None
    ccv2: np.ndarray | None = None
    ccv_hist: np.ndarray | None = None
    regret_curve: np.ndarray | None = None
    comparator: np.ndarray | None = None

    @property
    def horizon(self) -> int:
        return int(self.losses.size)

    @property
    def regret(self) -> float | None:
        if self.regret_curve is None:
            return None
        return float(self.regret_curve[-1])


@dataclass(frozen=True)
class TrialSummary:
    """Per-round mean and normal-approximation 95% half-width for each
    metric, over a batch of equal-horizon trials."""

    horizon: int
    n_trials: int
    metrics: dict = field(default_factory=dict)


def compute_metrics(record: RunRecord,
                    comparator: np.ndarray | None = None,
                    with_history_score: bool = False) -> RunRecord:
    """Fill the derived score curves on a record, in place.

    With a comparator the per-round regret curve is cumulative learner
    loss minus cumulative comparator loss, which needs the retained
    loss oracles.  The history score ccv_hist needs the retained
    constraint oracles and costs O(T^2) oracle calls.
    """
    record.cum_loss = np.cumsum(record.losses)
    record.ccv1 = np.cumsum(record.violations)
    record.ccv2 = np.cumsum(record.violations ** 2)
    if comparator is not None:
        if record.loss_oracles is None:
            raise ValueError(
                "regret needs the run's loss oracles; rerun with them kept"
            )
        comp_losses = np.array(
            [f.value(comparator) for f in record.loss_oracles]
        )
        record.regret_curve = record.cum_loss - np.cumsum(comp_losses)
        record.comparator = np.asarray(comparator, dtype=float).copy()
    if with_history_score:
        if record.constraint_oracles is None:
            raise ValueError(
                "history score needs the run's constraint oracles"
            )
        T = record.horizon
        hist = np.empty(T)
        for t in range(T):
            x = record.actions[t]
            s = 0.0
            for tau in range(t + 1):
                g = record.constraint_oracles[tau]
                if isinstance(g, (list, tuple)):
                    v = max(gm.positive_part(x) for gm in g)
                else:
                    v = g.positive_part(x)
                s += v * v
            hist[t] = s
        record.ccv_hist = np.cumsum(hist)
    return record


def aggregate_trials(records: list) -> TrialSummary:
    """Mean curve and 1.96 * sd / sqrt(n) half-width per metric.

    All records must share the horizon.  The regret curve is summarized
    only when every record has one; a single trial gets zero
    half-widths (no spread to estimate).
    """
    if not records:
        raise ValueError("no records to aggregate")
    T = records[0].horizon
    if any(r.horizon != T for r in records):
        raise ValueError("records disagree on horizon")
    for r in records:
        if r.cum_loss is None:
            compute_metrics(r)
    names = ["cum_loss", "ccv1", "ccv2"]
    if all(r.regret_curve is not None for r in records):
        names.append("regret")
    out = {}
    n = len(records)
    for name in names:
        attr = "regret_curve" if name == "regret" else name
        stack = np.vstack([getattr(r, attr) for r in records])
        mean = stack.mean(axis=0)
        if n > 1:
            half = 1.96 * stack.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            half = np.zeros(T)
        out[name] = (mean, half)
    return TrialSummary(horizon=T, n_trials=n, metrics=out)


def fit_rate(horizons, values) -> float:
    """Slope of log(values) against log(horizons) by least squares.

    The growth exponent of a score curve sampled at a few horizons.
    Needs at least three strictly increasing horizons and strictly
    positive values.
    """
    horizons = np.asarray(horizons, dtype=float)
    values = np.asarray(values, dtype=float)
    if horizons.size != values.size or horizons.size < 3:
        raise ValueError("need at least three matching points")
    if np.any(np.diff(horizons) <= 0):
        raise ValueError("horizons must be strictly increasing")
    if np.any(values <= 0):
        raise ValueError("values must be strictly positive for a log fit")
    slope, _ = np.polyfit(np.log(horizons), np.log(values), 1)
    return float(slope)
