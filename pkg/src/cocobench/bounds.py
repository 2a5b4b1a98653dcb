"""Hindsight comparators and explicit bound verification.

The regret and violation guarantees come with fully explicit right
sides once the instance constants are known: the action-set diameter D,
the shared Lipschitz bound L, the first step size theta, and the step
schedule.  verify_bounds evaluates those inequalities on a finished run
and reports each one as a (name, left, right, pass) line.

The inequalities checked, writing S for the sum of step sizes over the
run and x* for the comparator:

* regret against the schedule bound at every prefix:
  D^2 T^beta / 2 + (L^2/2) sum t^(-beta) for the convex schedule, and
  (L^2/2) sum 1/t for the strongly convex one;
* step-distance sum: sum_t d_t(xhat_{t+1})^2 <= ||x1 - x*||^2
  + (2 L D + theta L^2) S;
* action-distance sum: sum_t d_t(x_t)^2 <= 2 sum_t d_t(xhat_{t+1})^2
  + 2 theta L^2 S;
* violation sum: sum_t (g_t^+(x_t))^2 <= L^2 sum_t d_t(x_t)^2;
* their composition: ccv2 <= L^2 (2 ||x1 - x*||^2
  + (4 L D + 4 theta L^2) S).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clasp import ConstraintMode, ConvexStepSchedule, StronglyConvexStepSchedule, run
from .geometry import (
    Ball,
    Box,
    DiameterUnavailable,
    FeasibleSet,
    Halfspace,
    Intersection,
    ProjectionSettings,
    flatten,
    membership_gap,
    project_info,
    set_diameter,
)
from .metrics import RunRecord, compute_metrics, fit_rate
from .problems import Synthetic1DProblem, synthetic1d_hindsight
from .runner import trial_rng

__all__ = [
    "ComparatorResult",
    "comparator_solve",
    "BoundCheck",
    "BoundReport",
    "regret_bound_curve",
    "ccv2_chain_bound",
    "verify_bounds",
    "verify_synthetic1d",
    "default_horizon_grid",
]


@dataclass(frozen=True)
class ComparatorResult:
    """Outcome of the offline hindsight solve.

    feasible False means the constraint intersection was detected
    empty; then point and objective are None and residual carries the
    evidence (the smallest membership residual the projection reached,
    or inf when opposing halfspaces certify emptiness outright).  gap
    is a stagnation estimate: how much the objective improved over the
    last half of the iterations, not a duality certificate.
    """

    feasible: bool
    point: np.ndarray | None = None
    objective: float | None = None
    gap: float | None = None
    residual: float = 0.0


def _constraint_sets(rounds):
    sets = []
    for _, g in rounds:
        if isinstance(g, (list, tuple)):
            sets.extend(gm.sublevel_set() for gm in g)
        else:
            sets.append(g.sublevel_set())
    return sets


def _dedupe_pieces(pieces):
    """Collapse parallel halfspaces to the tightest one per direction.

    Directions are compared after normalization, rounded to 12
    decimals; first-seen order is preserved so the result is
    deterministic.  Also returns an emptiness certificate: a pair of
    opposing directions whose tightest offsets are incompatible proves
    the intersection empty without any iteration.
    """
    others = []
    tightest: dict = {}
    order = []
    for p in pieces:
        if not isinstance(p, Halfspace):
            others.append(p)
            continue
        nrm = float(np.linalg.norm(p.normal))
        direction = p.normal / nrm
        key = tuple(np.round(direction, 12))
        off = p.offset / nrm
        if key not in tightest:
            tightest[key] = (direction, off)
            order.append(key)
        elif off < tightest[key][1]:
            tightest[key] = (tightest[key][0], off)
    for key in order:
        neg = tuple(-np.asarray(key))
        if neg in tightest:
            if tightest[key][1] + tightest[neg][1] < 0.0:
                return None, True
    deduped = [Halfspace(d, off) for d, off in
               (tightest[k] for k in order)]
    return others + deduped, False


def _start_point(action_set: FeasibleSet) -> np.ndarray:
    for p in flatten(action_set):
        if isinstance(p, Box):
            return 0.5 * (p.lo + p.hi)
        if isinstance(p, Ball):
            return p.center.copy()
    return np.zeros(action_set.dim)


def comparator_solve(rounds, action_set: FeasibleSet, iters: int = 2000,
                     settings: ProjectionSettings = ProjectionSettings(),
                     infeasibility_tol: float = 1e-5) -> ComparatorResult:
    """Hindsight minimizer of the summed losses over the action set
    intersected with every revealed constraint set.

    Offline projected subgradient with steps D / (G sqrt(k)), where G
    sums the losses' declared Lipschitz bounds and D is the action-set
    diameter (1 when unavailable); the best feasible iterate is
    returned.  Emptiness of the intersection is detected either by an
    opposing-halfspace certificate after deduplication or by a
    projection that stalls with a macroscopic membership residual.
    """
    rounds = list(rounds)
    if not rounds:
        raise ValueError("no rounds given")
    pieces = flatten(action_set) + [
        q for s in _constraint_sets(rounds) for q in flatten(s)
    ]
    deduped, certified_empty = _dedupe_pieces(pieces)
    if certified_empty:
        return ComparatorResult(feasible=False, residual=np.inf)
    target = Intersection(tuple(deduped)) if len(deduped) > 1 else deduped[0]

    x0 = _start_point(action_set)
    info = project_info(target, x0, settings)
    gap0 = membership_gap(target, info.point)
    if not info.converged and gap0 > infeasibility_tol:
        return ComparatorResult(feasible=False, residual=gap0)

    losses = [f for f, _ in rounds]
    G = sum(f.lipschitz_bound for f in losses)
    try:
        D = set_diameter(action_set)
    except DiameterUnavailable:
        D = 1.0

    def objective(x):
        return float(sum(f.value(x) for f in losses))

    x = info.point
    best_x, best_val = x, objective(x)
    half = max(1, iters // 2)
    best_at_half = best_val
    for k in range(1, iters + 1):
        direction = np.zeros(x.size)
        for f in losses:
            direction += f.subgradient(x)
        if G > 0:
            step = D / (G * np.sqrt(k))
        else:
            break
        x = project_info(target, x - step * direction, settings).point
        val = objective(x)
        if val < best_val:
            best_val, best_x = val, x
        if k == half:
            best_at_half = best_val
    return ComparatorResult(
        feasible=True,
        point=best_x,
        objective=best_val,
        gap=max(0.0, best_at_half - best_val),
        residual=membership_gap(target, best_x),
    )


@dataclass(frozen=True)
class BoundCheck:
    """One verified inequality: lhs <= rhs + tolerance."""

    name: str
    lhs: float
    rhs: float
    passed: bool
    tolerance: float = 0.0


@dataclass(frozen=True)
class BoundReport:
    checks: tuple

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list:
        out = []
        for c in self.checks:
            out.append(
                "%s  %s: lhs=%.6g rhs=%.6g (slack %.3g)"
                % ("PASS" if c.passed else "FAIL", c.name, c.lhs, c.rhs,
                   c.rhs + c.tolerance - c.lhs)
            )
        return out

    def __str__(self) -> str:
        return "\n".join(self.lines())


def _check(name, lhs, rhs, tolerance=0.0) -> BoundCheck:
    lhs = float(lhs)
    rhs = float(rhs)
    return BoundCheck(name, lhs, rhs, lhs <= rhs + tolerance, tolerance)


def regret_bound_curve(schedule, D: float, L: float, T: int) -> np.ndarray:
    """Schedule-specific regret upper bound at every prefix horizon."""
    tt = np.arange(1, T + 1, dtype=float)
    if isinstance(schedule, ConvexStepSchedule):
        return (tt ** schedule.beta) * D * D / 2.0 \
            + (L * L / 2.0) * np.cumsum(tt ** (-schedule.beta))
    if isinstance(schedule, StronglyConvexStepSchedule):
        return (L * L / 2.0) * np.cumsum(1.0 / tt)
    raise TypeError("unknown schedule type %r" % type(schedule).__name__)


def ccv2_chain_bound(D: float, L: float, theta: float,
                     eta_sum: float, start_gap_sq: float) -> float:
    """Right side of the composed violation bound: L^2 (2 ||x1 - x*||^2
    + (4 L D + 4 theta L^2) sum eta_t)."""
    return L * L * (2.0 * start_gap_sq
                    + (4.0 * L * D + 4.0 * theta * L * L) * eta_sum)


def verify_bounds(record: RunRecord, D: float, L: float, theta: float,
                  schedule) -> BoundReport:
    """Check every explicit inequality on a finished run.

    The record must carry the distance diagnostics and step sizes, a
    comparator, and a regret curve; the comparator must be feasible for
    every recorded round (the caller's responsibility, satisfied by
    construction for hindsight solutions).  Distance-sum checks allow
    additive slack 1e-6 per round for accumulated projection
    tolerance; the regret check allows only float-level slack.
    """
    if record.comparator is None or record.regret_curve is None:
        raise ValueError("record has no comparator/regret data")
    if record.cum_loss is None:
        compute_metrics(record)
    T = record.horizon
    slack = 1e-6 * T
    x1 = record.actions[0]
    start_gap_sq = float(np.dot(x1 - record.comparator,
                                x1 - record.comparator))
    eta_sum = float(np.sum(record.etas))
    step_sq = float(np.sum(record.step_distances ** 2))
    action_sq = float(np.sum(record.round_distances ** 2))
    viol_sq = float(record.ccv2[-1])

    bound_curve = regret_bound_curve(schedule, D, L, T)
    margin = record.regret_curve - bound_curve
    worst = int(np.argmax(margin))
    checks = [
        _check(
            "regret-prefix (worst t=%d of %d)" % (worst + 1, T),
            record.regret_curve[worst],
            bound_curve[worst],
            1e-9 * max(1.0, abs(float(bound_curve[worst]))),
        ),
        _check(
            "step-distance-sum",
            step_sq,
            start_gap_sq + (2.0 * L * D + theta * L * L) * eta_sum,
            slack,
        ),
        _check(
            "action-distance-sum",
            action_sq,
            2.0 * step_sq + 2.0 * theta * L * L * eta_sum,
            slack,
        ),
        _check("violation-sum", viol_sq, L * L * action_sq, slack),
        _check(
            "ccv2-chain",
            viol_sq,
            ccv2_chain_bound(D, L, theta, eta_sum, start_gap_sq),
            slack,
        ),
    ]
    return BoundReport(tuple(checks))


def default_horizon_grid(T: int) -> list:
    """Geometric grid of up to seven horizons ending at T, halving
    downward."""
    grid = [int(T)]
    while len(grid) < 7 and grid[0] > 1:
        grid.insert(0, grid[0] // 2)
    return grid


def verify_synthetic1d(schedule, T: int = 2 ** 14, master_seed: int = 0,
                       grid: list | None = None,
                       settings: ProjectionSettings = ProjectionSettings()
                       ) -> BoundReport:
    """Run the learner on the scalar family and check every explicit
    bound, plus violation-growth checks on a horizon grid.

    The per-prefix regret is exact: the scalar family's hindsight
    optimum has a closed form at every prefix, so the regret curve uses
    the prefix-optimal comparator rather than a fixed one.  The grid
    checks compare ccv2 at each grid horizon against the composed chain
    bound with that horizon's own comparator, and, for the convex
    schedule, fit the growth exponent of ccv2 over the top grid
    horizons (threshold 1 - beta + 0.1).
    """
    problem = Synthetic1DProblem()
    rng = trial_rng(master_seed, 0)
    x1 = problem.init_action(rng)
    centers, limits = problem.round_data(rng, T)
    record = run(problem.rounds_from_data(centers, limits),
                 problem.action_set(), schedule, x1,
                 ConstraintMode.TRANSIENT, settings)
    compute_metrics(record)
    xs, fs = synthetic1d_hindsight(centers, limits)
    record.regret_curve = record.cum_loss - fs
    record.comparator = np.array([xs[-1]])

    D, L = problem.diameter, problem.lipschitz
    theta = schedule.theta
    report = verify_bounds(record, D, L, theta, schedule)
    checks = list(report.checks)

    if grid is None:
        grid = default_horizon_grid(T)
    grid = [int(h) for h in grid]
    if any(h < 1 or h > T for h in grid):
        raise ValueError("grid horizons must lie in [1, T]")
    eta_cum = np.cumsum(record.etas)
    slack_per_round = 1e-6
    for h in grid:
        gap_sq = float((x1[0] - xs[h - 1]) ** 2)
        checks.append(_check(
            "ccv2-chain@T=%d" % h,
            record.ccv2[h - 1],
            ccv2_chain_bound(D, L, theta, float(eta_cum[h - 1]), gap_sq),
            slack_per_round * h,
        ))
    if isinstance(schedule, ConvexStepSchedule) and len(grid) >= 3:
        top = grid[-5:] if len(grid) >= 5 else grid
        values = record.ccv2[np.array(top) - 1]
        if np.all(values > 0):
            slope = fit_rate(top, values)
            checks.append(_check(
                "ccv2-growth-exponent (grid %s)" % top,
                slope,
                1.0 - schedule.beta + 0.1,
            ))
    return BoundReport(tuple(checks))
