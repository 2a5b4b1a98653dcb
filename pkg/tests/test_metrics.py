"""Scoring tests: violation accumulators, regret against a fixed
comparator, the history score, trial aggregation with confidence
half-widths, and the log-log rate fitter.
"""

import numpy as np
import pytest

from cocobench.clasp import ConstraintMode, ConvexStepSchedule, run
from cocobench.geometry import Box
from cocobench.metrics import (
    RunRecord,
    aggregate_trials,
    compute_metrics,
    fit_rate,
)
from cocobench.oracles import Affine, Quadratic1D


def _record(losses, violations, **kw):
    T = len(losses)
    return RunRecord(
        actions=np.zeros((T, 1)),
        gradient_points=np.zeros((T, 1)),
        losses=np.asarray(losses, dtype=float),
        violations=np.asarray(violations, dtype=float),
        round_distances=np.zeros(T),
        step_distances=np.zeros(T),
        etas=np.ones(T),
        next_violations=np.zeros(T),
        **kw,
    )


def test_single_round_violation_squares():
    rec = compute_metrics(_record([1.0], [0.5]))
    assert rec.ccv1[-1] == 0.5
    assert rec.ccv2[-1] == 0.25
    assert rec.cum_loss[-1] == 1.0


def test_all_feasible_run_scores_zero_violation():
    rec = compute_metrics(_record([1.0, 2.0, 3.0], [0.0, 0.0, 0.0]))
    assert np.all(rec.ccv1 == 0) and np.all(rec.ccv2 == 0)
    assert rec.cum_loss[-1] == 6.0


def test_cumulative_curves_nondecreasing_and_exact():
    rng = np.random.default_rng(51)
    losses = rng.uniform(0, 2, 300)
    viols = rng.uniform(0, 1, 300) * (rng.uniform(size=300) < 0.5)
    rec = compute_metrics(_record(losses, viols))
    assert np.all(np.diff(rec.ccv1) >= 0)
    assert np.all(np.diff(rec.ccv2) >= 0)
    assert rec.cum_loss[-1] == pytest.approx(np.sum(losses), abs=1e-12)
    assert rec.ccv1[-1] == pytest.approx(np.sum(viols), abs=1e-12)


def test_regret_zero_against_own_trajectory():
    # a learner that never moves has zero regret against its own point
    K = Box(np.zeros(1), np.ones(1))
    rounds = [(Affine(np.zeros(1), 0.3), Affine(np.array([1.0]), 2.0))
              for _ in range(10)]
    rec = run(rounds, K, ConvexStepSchedule(0.5), np.array([0.4]),
              keep_oracles=True)
    compute_metrics(rec, comparator=np.array([0.4]))
    assert np.allclose(rec.regret_curve, 0.0, atol=1e-12)


def test_regret_curve_matches_hand_computation():
    K = Box(np.zeros(1), np.ones(1))
    rounds = [(Quadratic1D(0.0), Affine(np.array([1.0]), 2.0)),
              (Quadratic1D(1.0), Affine(np.array([1.0]), 2.0))]
    rec = run(rounds, K, ConvexStepSchedule(0.5), np.array([1.0]),
              keep_oracles=True)
    compute_metrics(rec, comparator=np.array([0.5]))
    # learner: x1=1 loss 1; x2 = clip(1 - 1*2*1) = 0, loss (0-1)^2 = 1
    # comparator at 0.5 loses 0.25 each round
    assert rec.cum_loss[-1] == pytest.approx(2.0)
    assert rec.regret_curve[0] == pytest.approx(0.75)
    assert rec.regret_curve[1] == pytest.approx(1.5)
    assert rec.regret == pytest.approx(1.5)


def test_regret_requires_kept_oracles():
    rec = _record([1.0], [0.0])
    with pytest.raises(ValueError):
        compute_metrics(rec, comparator=np.array([0.0]))


def test_history_score_collapses_for_persistent_runs():
    # persistent projection satisfies all past constraints, so each
    # round's history sum reduces to the current violation squared
    rng = np.random.default_rng(52)
    n, T = 2, 40
    K = Box(np.zeros(n), np.ones(n))
    mid = np.full(n, 0.25)
    rounds = []
    for _ in range(T):
        a = rng.uniform(0, 2, n)
        rounds.append((Affine(rng.normal(size=n), 0.0),
                       Affine(a, float(a @ mid + rng.uniform(0.05, 0.5)))))
    rec = run(rounds, K, ConvexStepSchedule(0.5), mid,
              mode=ConstraintMode.PERSISTENT, keep_oracles=True)
    compute_metrics(rec, with_history_score=True)
    assert rec.ccv_hist is not None
    assert np.allclose(rec.ccv_hist, rec.ccv2, atol=1e-10)


def test_history_score_needs_constraint_oracles():
    with pytest.raises(ValueError):
        compute_metrics(_record([1.0], [0.0]), with_history_score=True)


def test_aggregate_identical_records_zero_halfwidth():
    recs = [compute_metrics(_record([1.0, 2.0], [0.1, 0.2]))
            for _ in range(5)]
    summary = aggregate_trials(recs)
    assert summary.n_trials == 5 and summary.horizon == 2
    for mean, half in summary.metrics.values():
        assert np.all(half == 0.0)
    assert np.allclose(summary.metrics["cum_loss"][0], [1.0, 3.0])


def test_aggregate_two_records_mean():
    r0 = compute_metrics(_record([0.0], [0.0]))
    r1 = compute_metrics(_record([2.0], [0.0]))
    summary = aggregate_trials([r0, r1])
    assert summary.metrics["cum_loss"][0][0] == pytest.approx(1.0)


def test_aggregate_halfwidth_monte_carlo():
    # 10,000 unit-normal "trials" of a single round: the half-width
    # should come out near 1.96/sqrt(10000) = 0.0196
    rng = np.random.default_rng(53)
    recs = [compute_metrics(_record([float(v)], [0.0]))
            for v in rng.normal(size=10_000)]
    summary = aggregate_trials(recs)
    half = summary.metrics["cum_loss"][1][0]
    assert abs(half - 1.96 / 100) <= 0.1 * (1.96 / 100)


def test_aggregate_validates_input():
    with pytest.raises(ValueError):
        aggregate_trials([])
    with pytest.raises(ValueError):
        aggregate_trials([compute_metrics(_record([1.0], [0.0])),
                          compute_metrics(_record([1.0, 2.0], [0.0, 0.0]))])


def test_aggregate_regret_only_when_all_have_it():
    r0 = compute_metrics(_record([1.0], [0.0]))
    r1 = compute_metrics(_record([1.0], [0.0]))
    assert "regret" not in aggregate_trials([r0, r1]).metrics
    r0.regret_curve = np.array([0.5])
    assert "regret" not in aggregate_trials([r0, r1]).metrics
    r1.regret_curve = np.array([1.5])
    summary = aggregate_trials([r0, r1])
    assert summary.metrics["regret"][0][0] == pytest.approx(1.0)


def test_fit_rate_known_exponents():
    T = np.array([100, 200, 400, 800, 1600], dtype=float)
    assert fit_rate(T, np.sqrt(T)) == pytest.approx(0.5, abs=1e-12)
    assert fit_rate(T, np.full(5, 3.7)) == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(54)
    noisy = T * (1 + 1e-6 * rng.standard_normal(5))
    assert abs(fit_rate(T, noisy) - 1.0) <= 1e-3


def test_fit_rate_input_validation():
    with pytest.raises(ValueError):
        fit_rate([10, 20], [1.0, 2.0])
    with pytest.raises(ValueError):
        fit_rate([10, 5, 20], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        fit_rate([10, 20, 40], [1.0, -2.0, 3.0])
