"""Projected online subgradient learner for constrained rounds.

Protocol per round t: the learner has committed to x_t inside the base
action set K; the adversary reveals a convex loss f_t and a convex
constraint g_t; the learner pays f_t(x_t), is charged the violation
g_t(x_t)^+, and moves with a single diminishing-step subgradient step
followed by one projection onto the round's feasible set.  Which set
that is depends on the constraint mode:

* transient: K intersected with this round's sublevel set only;
* multi: the round reveals several constraints and the learner
  projects onto K intersected with the sublevel set of the most
  violated one (lowest index on ties);
* persistent: constraints accumulate, and the learner projects onto K
  intersected with every sublevel set revealed so far.

Two step schedules are supported: t^(-beta) for convex losses and
1/(modulus * t) when every loss is strongly convex.  theta denotes the
first step size; the analysis assumes the schedule is nonincreasing
with that starting value, and both schedules satisfy it.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import (
    FeasibleSet,
    InfeasibleIntersection,
    Intersection,
    ProjectionResult,
    ProjectionSettings,
    as_vector,
    membership_gap,
    project_info,
)
from .metrics import RunRecord

__all__ = [
    "ConstraintMode",
    "ConvexStepSchedule",
    "StronglyConvexStepSchedule",
    "LearnerState",
    "select_active_constraint",
    "build_round_set",
    "clasp_step",
    "run",
]

# A projection that stalls at max_iter but lands within this distance of
# every constraint piece is accepted as converged-enough; a larger
# residual means the round's feasible set is (numerically) empty.
INFEASIBILITY_TOL = 1e-5


@dataclass(frozen=True)
class ConvexStepSchedule:
    """eta_t = t^(-beta) with beta strictly inside (0, 1)."""

    beta: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.beta < 1.0):
            raise ValueError("beta must lie strictly in (0, 1)")

    def step_size(self, t: int) -> float:
        if t < 1:
            raise ValueError("rounds are numbered from 1")
        return float(t) ** (-self.beta)

    @property
    def theta(self) -> float:
        return self.step_size(1)


@dataclass(frozen=True)
class StronglyConvexStepSchedule:
    """eta_t = 1 / (modulus * t) for losses that are all strongly
    convex with the given modulus."""

    modulus: float

    def __post_init__(self):
        if not (self.modulus > 0 and np.isfinite(self.modulus)):
            raise ValueError("modulus must be a positive finite float")

    def step_size(self, t: int) -> float:
        if t < 1:
            raise ValueError("rounds are numbered from 1")
        return 1.0 / (self.modulus * t)

    @property
    def theta(self) -> float:
        return self.step_size(1)


class ConstraintMode(Enum):
    TRANSIENT = "transient"
    MULTI = "multi"
    PERSISTENT = "persistent"


@dataclass(frozen=True)
class LearnerState:
    """Rounds completed so far and the committed action."""

    t: int
    x: np.ndarray


def select_active_constraint(constraints, x) -> int:
    """Index of the most violated constraint at x, lowest index on
    ties (argmax of positive parts)."""
    if len(constraints) == 0:
        raise ValueError("no constraints to select from")
    violations = np.array([g.positive_part(x) for g in constraints])
    return int(np.argmax(violations))


def build_round_set(mode: ConstraintMode, action_set: FeasibleSet,
                    revealed: FeasibleSet,
                    history: tuple = ()) -> Intersection:
    """Assemble the set the learner projects onto this round.

    revealed is the sublevel set chosen for this round (already the
    selected one in multi mode); history holds the previously revealed
    sets and is consulted only in persistent mode.
    """
    if mode is ConstraintMode.PERSISTENT:
        return Intersection((action_set, *history, revealed))
    return Intersection((action_set, revealed))


def clasp_step(state: LearnerState, loss, round_set: FeasibleSet,
               eta: float,
               settings: ProjectionSettings = ProjectionSettings()
               ) -> tuple[LearnerState, np.ndarray, ProjectionResult]:
    """One update: subgradient step on the revealed loss, then a single
    projection onto the round's feasible set.

    Returns the advanced state, the pre-projection point, and the
    projection diagnostics; a non-converged projection still advances
    to the best iterate and the caller decides what to do with it.
    """
    xhat = state.x - eta * loss.subgradient(state.x)
    info = project_info(round_set, xhat, settings)
    return LearnerState(state.t + 1, info.point), xhat, info


def _check_stalled(info: ProjectionResult, round_set, t: int) -> None:
    if info.converged:
        return
    gap = membership_gap(round_set, info.point)
    if gap > INFEASIBILITY_TOL:
        raise InfeasibleIntersection(
            "round %d: feasible set is numerically empty "
            "(projection stalled at residual %.3g)" % (t, gap)
        )


def run(rounds, action_set: FeasibleSet, schedule, x1,
        mode: ConstraintMode = ConstraintMode.TRANSIENT,
        settings: ProjectionSettings = ProjectionSettings(),
        keep_oracles: bool = False) -> RunRecord:
    """Run the learner over a stream of (loss, constraint) rounds.

    rounds yields pairs (loss_oracle, constraint_oracle); in multi mode
    the constraint entry is a sequence of oracles instead.  x1 must lie
    in the action set.  The trajectory records, per round, the loss and
    violation charged at x_t, the step size, the distances of both x_t
    and the pre-projection point to the round's feasible set, and the
    raw enforced-constraint value at the already-projected next point.
    The final projection (after the last round) is performed too, so
    the distance diagnostics cover every round.

    Raises InfeasibleIntersection, naming the round, when a round's
    feasible set is detected to be empty.
    """
    x1 = as_vector(x1)
    if membership_gap(action_set, x1) > 1e-8:
        raise ValueError("x1 must lie in the action set")
    state = LearnerState(0, x1)
    history: tuple = ()
    losses, violations, etas = [], [], []
    actions, gradient_points = [], []
    round_dists, step_dists, next_viols = [], [], []
    kept_f, kept_g = [], []

    for t, (f, g) in enumerate(rounds, start=1):
        x = state.x
        if mode is ConstraintMode.MULTI:
            if not isinstance(g, (list, tuple)):
                raise TypeError("multi mode expects a sequence of "
                                "constraints per round")
            active = select_active_constraint(g, x)
            violation = g[active].positive_part(x)
            revealed = g[active].sublevel_set()
            enforced = [g[active]]
        else:
            if isinstance(g, (list, tuple)):
                raise TypeError(
                    "got a constraint sequence outside multi mode"
                )
            violation = g.positive_part(x)
            revealed = g.sublevel_set()
            enforced = [g]
        round_set = build_round_set(mode, action_set, revealed, history)
        if mode is ConstraintMode.PERSISTENT:
            history = history + (revealed,)
            enforced = list(kept_g) + [g] if keep_oracles else enforced

        eta = schedule.step_size(t)
        at_info = project_info(round_set, x, settings)
        _check_stalled(at_info, round_set, t)
        d_at = float(np.linalg.norm(x - at_info.point))

        state, xhat, step_info = clasp_step(state, f, round_set, eta,
                                            settings)
        _check_stalled(step_info, round_set, t)
        d_step = float(np.linalg.norm(xhat - state.x))

        if mode is ConstraintMode.PERSISTENT and not keep_oracles:
            # without retained oracles only the current round's raw
            # value is reported; the historical sets are still enforced
            # geometrically by the projection
            next_v = g.value(state.x)
        else:
            next_v = max(gm.value(state.x) for gm in enforced)

        actions.append(x)
        gradient_points.append(xhat)
        losses.append(f.value(x))
        violations.append(violation)
        etas.append(eta)
        round_dists.append(d_at)
        step_dists.append(d_step)
        next_viols.append(next_v)
        if keep_oracles:
            kept_f.append(f)
            kept_g.append(g)

    if not losses:
        raise ValueError("the round stream was empty")
    return RunRecord(
        actions=np.asarray(actions),
        gradient_points=np.asarray(gradient_points),
        losses=np.asarray(losses),
        violations=np.asarray(violations),
        round_distances=np.asarray(round_dists),
        step_distances=np.asarray(step_dists),
        etas=np.asarray(etas),
        next_violations=np.asarray(next_viols),
        mode=mode.value,
        algorithm="clasp",
        loss_oracles=kept_f if keep_oracles else None,
        constraint_oracles=kept_g if keep_oracles else None,
    )
