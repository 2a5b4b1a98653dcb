"""Learner tests: step schedules, constraint selection, round-set
assembly for all three modes, the single-step update, and full runs
replayed against the brute-force projection oracle.
"""

import numpy as np
import pytest

from bruteforce import box_rows, project_polyhedron

from cocobench.clasp import (
    ConstraintMode,
    ConvexStepSchedule,
    LearnerState,
    StronglyConvexStepSchedule,
    build_round_set,
    clasp_step,
    run,
    select_active_constraint,
)
from cocobench.geometry import (
    Box,
    InfeasibleIntersection,
    ProjectionSettings,
    project,
)
from cocobench.oracles import Affine, AffineMax, Quadratic1D


def test_step_schedule_values():
    assert ConvexStepSchedule(0.5).step_size(4) == pytest.approx(0.5)
    assert StronglyConvexStepSchedule(2.0).step_size(5) == pytest.approx(0.1)
    assert ConvexStepSchedule(0.3).step_size(1) == 1.0
    assert StronglyConvexStepSchedule(1.0).step_size(1) == 1.0


def test_step_schedule_validation():
    with pytest.raises(ValueError):
        ConvexStepSchedule(1.5)
    with pytest.raises(ValueError):
        ConvexStepSchedule(0.0)
    with pytest.raises(ValueError):
        StronglyConvexStepSchedule(0.0)
    with pytest.raises(ValueError):
        ConvexStepSchedule(0.5).step_size(0)


def test_step_schedules_nonincreasing_with_theta_first():
    for sched in (ConvexStepSchedule(0.25), ConvexStepSchedule(0.9),
                  StronglyConvexStepSchedule(0.5),
                  StronglyConvexStepSchedule(3.0)):
        etas = [sched.step_size(t) for t in range(1, 200)]
        assert all(b <= a for a, b in zip(etas, etas[1:]))
        assert sched.theta == etas[0]
        assert all(e * e <= sched.theta * e + 1e-15 for e in etas)


def test_select_active_constraint():
    gs = [Affine(np.array([1.0]), 1.0),      # value x - 1
          Affine(np.array([1.0]), 0.7),      # value x - 0.7
          Affine(np.array([1.0]), 0.9)]      # value x - 0.9
    # at x = 1: violations (0, 0.3, 0.1) -> index 1
    assert select_active_constraint(gs, np.array([1.0])) == 1
    # all zero at x = 0.5 -> lowest index
    assert select_active_constraint(gs, np.array([0.5])) == 0
    tied = [Affine(np.array([1.0]), 0.5), Affine(np.array([1.0]), 0.5)]
    assert select_active_constraint(tied, np.array([1.0])) == 0
    with pytest.raises(ValueError):
        select_active_constraint([], np.array([1.0]))


def test_build_round_set_transient():
    K = Box(np.zeros(1), np.ones(1))
    C = Affine(np.array([1.0]), 0.5).sublevel_set()
    s = build_round_set(ConstraintMode.TRANSIENT, K, C)
    assert np.allclose(project(s, [0.9]), [0.5])
    assert np.allclose(project(s, [-0.2]), [0.0])


def test_build_round_set_multi_follows_selection():
    K = Box(np.zeros(1), np.ones(1))
    gs = [Affine(np.array([1.0]), 1.0), Affine(np.array([1.0]), 0.7)]
    active = select_active_constraint(gs, np.array([1.0]))
    assert active == 1
    s = build_round_set(ConstraintMode.MULTI, K, gs[active].sublevel_set())
    assert np.allclose(project(s, [0.9]), [0.7])


def test_build_round_set_persistent_nested():
    K = Box(np.zeros(1), np.ones(1))
    c1 = Affine(np.array([1.0]), 0.7).sublevel_set()
    c2 = Affine(np.array([1.0]), 0.5).sublevel_set()
    s = build_round_set(ConstraintMode.PERSISTENT, K, c2, history=(c1,))
    assert np.allclose(project(s, [0.9]), [0.5], atol=1e-7)


def test_clasp_step_interior_and_clamped():
    K = Box(np.zeros(1), np.ones(1))
    half = Affine(np.array([1.0]), 0.5).sublevel_set()
    s = build_round_set(ConstraintMode.TRANSIENT, K, half)
    state = LearnerState(1, np.array([0.3]))
    new, xhat, info = clasp_step(state, Affine(np.array([1.0]), 0.0), s, 0.2)
    assert xhat == pytest.approx(0.1)
    assert new.x[0] == pytest.approx(0.1)
    assert new.t == 2
    state = LearnerState(1, np.array([0.4]))
    new, xhat, info = clasp_step(state, Affine(np.array([-1.0]), 0.0), s, 0.5)
    assert xhat == pytest.approx(0.9)
    assert new.x[0] == pytest.approx(0.5, abs=1e-7)
    assert info.converged


def test_run_single_round():
    K = Box(np.zeros(1), np.ones(1))
    rec = run([(Quadratic1D(0.8), Affine(np.array([1.0]), 0.2))],
              K, ConvexStepSchedule(0.5), np.array([0.5]))
    assert rec.losses.shape == (1,)
    assert rec.losses[0] == pytest.approx(0.09)
    assert rec.violations[0] == pytest.approx(0.3)
    assert rec.etas[0] == 1.0


def test_run_constant_rounds_converges_to_feasible_optimum():
    K = Box(np.zeros(1), np.ones(1))
    rounds = [(Quadratic1D(0.4), Affine(np.array([1.0]), 0.6))
              for _ in range(200)]
    rec = run(rounds, K, StronglyConvexStepSchedule(2.0), np.array([1.0]))
    assert abs(rec.actions[-1, 0] - 0.4) < 1e-3
    assert rec.violations[-1] == 0.0


def test_run_is_deterministic():
    rng = np.random.default_rng(31)
    K = Box(np.zeros(2), np.ones(2))
    data = [(rng.normal(size=2), rng.uniform(0, 2, 2), rng.uniform(0, 1))
            for _ in range(200)]
    def rounds():
        return [(Affine(c, 0.0), Affine(a, b)) for c, a, b in data]
    r1 = run(rounds(), K, ConvexStepSchedule(0.5), np.array([0.5, 0.5]))
    r2 = run(rounds(), K, ConvexStepSchedule(0.5), np.array([0.5, 0.5]))
    assert np.array_equal(r1.actions, r2.actions)
    assert np.array_equal(r1.violations, r2.violations)


def test_run_replay_against_bruteforce_projection():
    # replay every round of a 3-D run, projecting with the independent
    # active-set oracle; trajectories must agree
    rng = np.random.default_rng(32)
    n, T = 3, 50
    lo, hi = np.zeros(n), np.ones(n)
    K = Box(lo, hi)
    data = [(rng.normal(size=n), rng.uniform(0, 2, n), rng.uniform(0.1, 1))
            for _ in range(T)]
    rounds = [(Affine(c, 0.0), Affine(a, b)) for c, a, b in data]
    sched = ConvexStepSchedule(0.5)
    x1 = np.full(n, 0.5)
    rec = run(rounds, K, sched, x1)
    Abox, bbox = box_rows(lo, hi)
    x = x1.copy()
    for t, (c, a, b) in enumerate(data, start=1):
        assert np.linalg.norm(rec.actions[t - 1] - x) <= 1e-5, f"round {t}"
        xhat = x - sched.step_size(t) * c
        x = project_polyhedron(xhat, np.vstack([Abox, a[None, :]]),
                               np.concatenate([bbox, [b]]))
        assert x is not None
    # final committed point equals one more projection past the record
    assert np.linalg.norm(rec.gradient_points[-1]
                          - (rec.actions[-1] - sched.step_size(T) * data[-1][0])) <= 1e-12


def test_run_rejects_bad_starts_and_empty_streams():
    K = Box(np.zeros(1), np.ones(1))
    with pytest.raises(ValueError):
        run([(Quadratic1D(0.5), Affine(np.array([1.0]), 0.5))],
            K, ConvexStepSchedule(0.5), np.array([1.5]))
    with pytest.raises(ValueError):
        run([], K, ConvexStepSchedule(0.5), np.array([0.5]))


def test_per_round_feasibility_transient():
    rng = np.random.default_rng(33)
    n, T = 4, 150
    K = Box(np.zeros(n), np.ones(n))
    rounds = [(Affine(rng.normal(size=n), 0.0),
               Affine(rng.uniform(0, 2, n), float(rng.uniform(0, 1))))
              for _ in range(T)]
    rec = run(rounds, K, ConvexStepSchedule(0.5), np.full(n, 0.5))
    # next_violations holds g_t evaluated at the already-projected
    # x_{t+1}: the round's own constraint must be satisfied
    assert np.max(rec.next_violations) <= 1e-6


def test_per_round_feasibility_persistent_covers_history():
    rng = np.random.default_rng(34)
    n, T = 2, 60
    K = Box(np.zeros(n), np.ones(n))
    mid = np.full(n, 0.25)
    rounds = []
    for _ in range(T):
        a = rng.uniform(0, 2, n)
        rounds.append((Affine(rng.normal(size=n), 0.0),
                       Affine(a, float(a @ mid + rng.uniform(0.05, 0.5)))))
    rec = run(rounds, K, ConvexStepSchedule(0.5), mid,
              mode=ConstraintMode.PERSISTENT, keep_oracles=True)
    assert np.max(rec.next_violations) <= 1e-6
    assert rec.mode == "persistent"


def test_multi_mode_records_worst_violation():
    K = Box(np.zeros(1), np.ones(1))
    gs = [Affine(np.array([1.0]), 0.9), Affine(np.array([1.0]), 0.6)]
    rec = run([(Quadratic1D(0.0), gs)], K, ConvexStepSchedule(0.5),
              np.array([1.0]), mode=ConstraintMode.MULTI)
    assert rec.violations[0] == pytest.approx(0.4)
    # scalarized AffineMax sees the same worst violation
    gmax = AffineMax(np.array([[1.0], [1.0]]), np.array([0.9, 0.6]))
    assert gmax.positive_part([1.0]) == pytest.approx(0.4)


def test_mode_and_constraint_shape_must_agree():
    K = Box(np.zeros(1), np.ones(1))
    gs = [Affine(np.array([1.0]), 0.5)]
    with pytest.raises(TypeError):
        run([(Quadratic1D(0.0), gs)], K, ConvexStepSchedule(0.5),
            np.array([0.5]))
    with pytest.raises(TypeError):
        run([(Quadratic1D(0.0), Affine(np.array([1.0]), 0.5))], K,
            ConvexStepSchedule(0.5), np.array([0.5]),
            mode=ConstraintMode.MULTI)


def test_infeasible_transient_round_raises_with_round_number():
    K = Box(np.zeros(1), np.ones(1))
    rounds = [(Quadratic1D(0.5), Affine(np.array([1.0]), 0.5)),
              (Quadratic1D(0.5), Affine(np.array([-1.0]), -2.0))]  # x >= 2
    with pytest.raises(InfeasibleIntersection, match="round 2"):
        run(rounds, K, ConvexStepSchedule(0.5), np.array([0.5]))


def test_tight_projection_budget_still_exact_on_affine_rounds():
    # starved settings force the stall path; the run must stay feasible
    rng = np.random.default_rng(35)
    n, T = 3, 40
    K = Box(np.zeros(n), np.ones(n))
    rounds = [(Affine(rng.normal(size=n), 0.0),
               Affine(rng.uniform(0, 2, n), float(rng.uniform(0.2, 1))))
              for _ in range(T)]
    rec = run(rounds, K, ConvexStepSchedule(0.5), np.full(n, 0.5),
              settings=ProjectionSettings(tol=1e-8, max_iter=5))
    assert np.max(rec.next_violations) <= 1e-6
