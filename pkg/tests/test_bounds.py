"""Tests for the hindsight comparator solver and bound verification."""

import numpy as np
import pytest

from bruteforce import grid_minimize

from cocobench.bounds import (
    BoundCheck,
    BoundReport,
    ccv2_chain_bound,
    comparator_solve,
    default_horizon_grid,
    regret_bound_curve,
    verify_bounds,
    verify_synthetic1d,
)
from cocobench.clasp import (
    ConstraintMode,
    ConvexStepSchedule,
    StronglyConvexStepSchedule,
    run,
)
from cocobench.geometry import Box
from cocobench.metrics import compute_metrics
from cocobench.oracles import Affine, NormResidual, Quadratic1D
from cocobench.problems import Synthetic1DProblem, synthetic1d_hindsight
from cocobench.runner import trial_rng


def _never_active(n=1):
    return Affine(np.full(n, 1e-3), 1e9)


# ---------------------------------------------------------------------------
# comparator solver


def test_comparator_symmetric_losses_balance_at_zero():
    rounds = [
        (Quadratic1D(0.3), _never_active()),
        (Quadratic1D(-0.3), _never_active()),
    ]
    out = comparator_solve(rounds, Box(-np.ones(1), np.ones(1)))
    assert out.feasible
    assert abs(out.point[0]) < 1e-3
    assert abs(out.objective - 2 * 0.3 ** 2) < 1e-3
    assert out.residual < 1e-6


def test_comparator_clamped_by_constraint():
    # the unconstrained optimum 0.5 is cut off by the halfspace x <= -0.5
    rounds = [(Quadratic1D(0.5), Affine(np.ones(1), -0.5))]
    out = comparator_solve(rounds, Box(-np.ones(1), np.ones(1)))
    assert out.feasible
    assert abs(out.point[0] + 0.5) < 1e-3
    assert abs(out.objective - 1.0) < 1e-3


def test_comparator_certified_empty_by_opposing_halfspaces():
    # x <= 0.2 and x >= 0.8 cannot both hold; detected without iterating
    rounds = [
        (Quadratic1D(0.5), Affine(np.ones(1), 0.2)),
        (Quadratic1D(0.5), Affine(-np.ones(1), -0.8)),
    ]
    out = comparator_solve(rounds, Box(np.zeros(1), np.ones(1)))
    assert not out.feasible
    assert out.point is None and out.objective is None
    assert out.residual == np.inf


def test_comparator_infeasible_with_unreachable_halfspace():
    # the box [0, 1] never meets x <= -2; no opposing-pair certificate,
    # so the projection stalls with a macroscopic residual
    rounds = [(Quadratic1D(0.5), Affine(np.ones(1), -2.0))]
    out = comparator_solve(rounds, Box(np.zeros(1), np.ones(1)))
    assert not out.feasible
    assert out.residual > 0.1


def test_comparator_empty_round_list_rejected():
    with pytest.raises(ValueError):
        comparator_solve([], Box(np.zeros(1), np.ones(1)))


def test_comparator_matches_grid_oracle_on_random_2d():
    # five random 5-round instances; losses are affine-residual norms,
    # constraints keep a neighbourhood of the origin feasible
    master = np.random.default_rng(2024)
    box = Box(np.zeros(2), np.ones(2))
    for _ in range(5):
        rng = np.random.default_rng(master.integers(2 ** 31))
        rounds = []
        for _ in range(5):
            H = rng.uniform(-1.0, 1.0, (2, 2))
            y = rng.uniform(-1.0, 1.0, 2)
            a = rng.uniform(0.0, 1.0, 2)
            b = rng.uniform(0.5, 1.5)
            rounds.append((NormResidual(H, y), Affine(a, b)))
        out = comparator_solve(rounds, box, iters=4000)
        assert out.feasible
        assert out.residual < 1e-6

        losses = [f for f, _ in rounds]
        cons = [g for _, g in rounds]

        def objective(pts):
            total = np.zeros(len(pts))
            for f in losses:
                total += np.linalg.norm(pts @ f.H.T - f.y, axis=1)
            return total

        def feasible(pts):
            ok = np.ones(len(pts), dtype=bool)
            for g in cons:
                ok &= pts @ g.a - g.b <= 1e-9
            return ok

        _, grid_val = grid_minimize(objective, box.lo, box.hi,
                                    feasible=feasible, resolution=1e-3)
        assert abs(out.objective - grid_val) < 1e-3


# ---------------------------------------------------------------------------
# bound formulas


def test_regret_bound_curve_convex_values():
    curve = regret_bound_curve(ConvexStepSchedule(0.5), D=1.0, L=2.0, T=2)
    # t^beta D^2/2 + (L^2/2) sum s^-beta
    expect0 = 0.5 + 2.0
    expect1 = np.sqrt(2.0) * 0.5 + 2.0 * (1.0 + 1.0 / np.sqrt(2.0))
    assert np.allclose(curve, [expect0, expect1])


def test_regret_bound_curve_strongly_convex_values():
    curve = regret_bound_curve(StronglyConvexStepSchedule(1.0), D=1.0,
                               L=2.0, T=3)
    assert np.allclose(curve, [2.0, 3.0, 2.0 * (1 + 0.5 + 1 / 3.0)])


def test_regret_bound_curve_rejects_unknown_schedule():
    with pytest.raises(TypeError, match="unknown schedule"):
        regret_bound_curve(object(), 1.0, 1.0, 5)


def test_ccv2_chain_bound_value():
    # L^2 (2 gap + (4 L D + 4 theta L^2) eta_sum)
    got = ccv2_chain_bound(D=1.0, L=2.0, theta=1.0, eta_sum=3.0,
                           start_gap_sq=4.0)
    assert got == 4.0 * (8.0 + (8.0 + 16.0) * 3.0)


def test_default_horizon_grid():
    assert default_horizon_grid(128) == [2, 4, 8, 16, 32, 64, 128]
    assert default_horizon_grid(10) == [1, 2, 5, 10]
    assert default_horizon_grid(1) == [1]


def test_bound_report_formatting():
    report = BoundReport((
        BoundCheck("alpha", 1.0, 2.0, True),
        BoundCheck("beta", 3.0, 2.0, False),
    ))
    assert not report.all_passed
    lines = report.lines()
    assert lines[0].startswith("PASS") and "alpha" in lines[0]
    assert lines[1].startswith("FAIL") and "beta" in lines[1]
    assert str(report) == "\n".join(lines)
    assert BoundReport((BoundCheck("a", 1.0, 2.0, True),)).all_passed


# ---------------------------------------------------------------------------
# verification on real runs


def _synthetic_record(schedule, T, master_seed=0):
    problem = Synthetic1DProblem()
    rng = trial_rng(master_seed, 0)
    x1 = problem.init_action(rng)
    centers, limits = problem.round_data(rng, T)
    record = run(problem.rounds_from_data(centers, limits),
                 problem.action_set(), schedule, x1,
                 ConstraintMode.TRANSIENT)
    compute_metrics(record)
    xs, fs = synthetic1d_hindsight(centers, limits)
    record.regret_curve = record.cum_loss - fs
    record.comparator = np.array([xs[-1]])
    return problem, record


def test_verify_bounds_passes_on_compliant_run():
    schedule = ConvexStepSchedule(0.5)
    problem, record = _synthetic_record(schedule, 128)
    report = verify_bounds(record, problem.diameter, problem.lipschitz,
                           schedule.theta, schedule)
    assert report.all_passed, str(report)
    names = [c.name for c in report.checks]
    assert any("regret" in n for n in names)
    assert "ccv2-chain" in names


def test_verify_bounds_monotone_in_lipschitz():
    # the inequalities must stay valid under a looser constant
    schedule = ConvexStepSchedule(0.5)
    problem, record = _synthetic_record(schedule, 128)
    report = verify_bounds(record, problem.diameter,
                           10.0 * problem.lipschitz, schedule.theta, schedule)
    assert report.all_passed, str(report)


def test_verify_bounds_requires_comparator():
    schedule = ConvexStepSchedule(0.5)
    problem, record = _synthetic_record(schedule, 16)
    record.comparator = None
    with pytest.raises(ValueError, match="comparator"):
        verify_bounds(record, problem.diameter, problem.lipschitz,
                      schedule.theta, schedule)


def test_verify_synthetic1d_convex_all_pass():
    report = verify_synthetic1d(ConvexStepSchedule(0.5), T=256)
    assert report.all_passed, str(report)
    names = [c.name for c in report.checks]
    assert any(n.startswith("ccv2-chain@T=") for n in names)
    assert any("growth-exponent" in n for n in names)


def test_verify_synthetic1d_strongly_convex_all_pass():
    report = verify_synthetic1d(StronglyConvexStepSchedule(2.0), T=256)
    assert report.all_passed, str(report)
    # the exponent fit is a convex-schedule check only
    assert not any("growth-exponent" in c.name for c in report.checks)


def test_verify_synthetic1d_single_round_and_grid_validation():
    report = verify_synthetic1d(ConvexStepSchedule(0.5), T=1)
    assert report.all_passed, str(report)
    with pytest.raises(ValueError, match="grid horizons"):
        verify_synthetic1d(ConvexStepSchedule(0.5), T=4, grid=[0, 2])
    with pytest.raises(ValueError, match="grid horizons"):
        verify_synthetic1d(ConvexStepSchedule(0.5), T=4, grid=[8])
