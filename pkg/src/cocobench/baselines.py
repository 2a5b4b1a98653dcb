"""Baseline online learners run under the same round protocol.

Three baselines, each keeping its own notion of constraint memory:

* Recoo: a regularized primal-dual update with a rectified scalar
  multiplier; the primal step descends the loss plus multiplier-scaled
  constraint gradient and projects onto the base set only.
* DriftPlusPenaltyAdagrad: a virtual-queue method; the queue absorbs
  violations, the descent direction mixes loss and violated-constraint
  gradients weighted by the queue, and the step length is scaled by the
  accumulated gradient energy.
* Switch: a projected gradient step onto the intersection of the base
  set with every constraint set revealed so far; it refuses to continue
  when that intersection empties out, and its per-round projection cost
  grows with the horizon.

All three see exactly the rounds the main learner sees and produce the
same RunRecord shape, so the scoring and CSV layers do not care which
algorithm produced a run.
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    FeasibleSet,
    InfeasibleIntersection,
    Intersection,
    ProjectionSettings,
    as_vector,
    membership_gap,
    project_info,
    set_diameter,
    DiameterUnavailable,
)
from .clasp import ConvexStepSchedule, INFEASIBILITY_TOL
from .metrics import RunRecord

__all__ = [
    "Recoo",
    "DriftPlusPenaltyAdagrad",
    "Switch",
    "run_baseline",
]


class Recoo:
    """Rectified-multiplier primal-dual baseline.

    The multiplier tracks the running constraint level, lam <-
    max(0, lam + gamma_t * g_t(x_t)), decaying on strictly feasible
    rounds and never going negative.  The primal update takes one step
    on f_t + lam * g_t and projects onto the base set.  Both step
    sequences shrink like 1/sqrt(t).
    """

    name = "recoo"

    def __init__(self, action_set: FeasibleSet, step_scale: float = 1.0,
                 multiplier_scale: float = 1.0,
                 settings: ProjectionSettings = ProjectionSettings()):
        self.action_set = action_set
        self.step_scale = float(step_scale)
        self.multiplier_scale = float(multiplier_scale)
        self.settings = settings
        self.x = None
        self.lam = 0.0

    def start(self, x1) -> None:
        self.x = as_vector(x1).copy()
        self.lam = 0.0

    def step(self, f, g, t: int) -> float:
        """Advance past round t; returns the step size used."""
        eta = self.step_scale / np.sqrt(t)
        gamma = self.multiplier_scale / np.sqrt(t)
        gval = g.value(self.x)
        direction = f.subgradient(self.x) + self.lam * g.subgradient(self.x)
        self.lam = max(0.0, self.lam + gamma * gval)
        info = project_info(self.action_set, self.x - eta * direction,
                            self.settings)
        self.x = info.point
        return float(eta)


class DriftPlusPenaltyAdagrad:
    """Virtual-queue baseline with accumulated-energy step scaling.

    Queue update Q <- max(0, Q + g_t(x_t)^+); descent direction
    V_t * grad f_t + Q * grad g_t^+ (the constraint term is zero on
    satisfied rounds); step length step_scale / sqrt(sum of squared
    direction norms so far); projection onto the base set only.

    Since the step length is normalized by the direction's own energy,
    the loss weight V_t only sets the mix between the loss pull and the
    queue's push.  The queue grows with every violated round, so a
    fixed weight eventually freezes the loss signal out; the default
    V_t = t^(3/4) keeps the loss term ahead of the queue without
    knowing the horizon, which is the behavior this family is known
    for: lowest loss, bought with the largest violations.  Pass a
    float to pin the weight instead.  step_scale defaults to half the
    base-set diameter over sqrt(2).
    """

    name = "dpp-adagrad"

    def __init__(self, action_set: FeasibleSet,
                 loss_weight: float | None = None,
                 step_scale: float | None = None,
                 settings: ProjectionSettings = ProjectionSettings()):
        self.action_set = action_set
        self.loss_weight = None if loss_weight is None else float(loss_weight)
        if step_scale is None:
            try:
                step_scale = set_diameter(action_set) / (2.0 * np.sqrt(2.0))
            except DiameterUnavailable:
                step_scale = 1.0
        self.step_scale = float(step_scale)
        self.settings = settings
        self.x = None
        self.queue = 0.0
        self.energy = 0.0

    def start(self, x1) -> None:
        self.x = as_vector(x1).copy()
        self.queue = 0.0
        self.energy = 0.0

    def step(self, f, g, t: int) -> float:
        violation = g.positive_part(self.x)
        self.queue = max(0.0, self.queue + violation)
        weight = float(t) ** 0.75 if self.loss_weight is None else self.loss_weight
        direction = weight * f.subgradient(self.x)
        if g.value(self.x) > 0.0:
            direction = direction + self.queue * g.subgradient(self.x)
        self.energy += float(np.dot(direction, direction))
        if self.energy > 0.0:
            eta = self.step_scale / np.sqrt(self.energy)
        else:
            eta = 0.0
        info = project_info(self.action_set, self.x - eta * direction,
                            self.settings)
        self.x = info.point
        return float(eta)


class Switch:
    """Projected gradient step onto the full revealed history.

    Keeps every constraint set seen so far and projects each gradient
    step onto the base set intersected with all of them; refuses (by
    raising InfeasibleIntersection) when that intersection is detected
    to be empty.  Memory and per-projection cost grow linearly in t,
    which is the point of comparing against it.
    """

    name = "switch"

    def __init__(self, action_set: FeasibleSet, schedule=None,
                 settings: ProjectionSettings = ProjectionSettings()):
        self.action_set = action_set
        self.schedule = schedule or ConvexStepSchedule(0.5)
        self.settings = settings
        self.x = None
        self.history = []

    def start(self, x1) -> None:
        self.x = as_vector(x1).copy()
        self.history = []

    def step(self, f, g, t: int) -> float:
        self.history.append(g.sublevel_set())
        eta = self.schedule.step_size(t)
        target = Intersection((self.action_set, *self.history))
        info = project_info(target, self.x - eta * f.subgradient(self.x),
                            self.settings)
        if not info.converged:
            gap = membership_gap(target, info.point)
            if gap > INFEASIBILITY_TOL:
                raise InfeasibleIntersection(
                    "round %d: accumulated constraint sets have empty "
                    "intersection (residual %.3g)" % (t, gap)
                )
        self.x = info.point
        return float(self.schedule.step_size(t))


def run_baseline(algorithm, rounds, x1,
                 keep_oracles: bool = False) -> RunRecord:
    """Drive a baseline over a round stream, recording the same
    trajectory fields as the main learner.

    The round-set distance diagnostics do not apply to baselines (they
    do not form per-round feasible sets the same way), so those columns
    are zero; next_violations still reports the revealed constraint's
    raw value at the next action.  Multi-constraint rounds are
    scalarized by the caller before reaching a baseline.
    """
    algorithm.start(x1)
    losses, violations, etas, next_viols = [], [], [], []
    actions, gradient_points = [], []
    kept_f, kept_g = [], []
    for t, (f, g) in enumerate(rounds, start=1):
        if isinstance(g, (list, tuple)):
            raise TypeError("baselines expect one constraint per round; "
                            "scalarize first")
        x = np.array(algorithm.x, copy=True)
        losses.append(f.value(x))
        violations.append(g.positive_part(x))
        eta = algorithm.step(f, g, t)
        etas.append(eta)
        actions.append(x)
        gradient_points.append(x)
        next_viols.append(g.value(algorithm.x))
        if keep_oracles:
            kept_f.append(f)
            kept_g.append(g)
    if not losses:
        raise ValueError("the round stream was empty")
    T = len(losses)
    return RunRecord(
        actions=np.asarray(actions),
        gradient_points=np.asarray(gradient_points),
        losses=np.asarray(losses),
        violations=np.asarray(violations),
        round_distances=np.zeros(T),
        step_distances=np.zeros(T),
        etas=np.asarray(etas),
        next_violations=np.asarray(next_viols),
        mode="transient",
        algorithm=algorithm.name,
        loss_oracles=kept_f if keep_oracles else None,
        constraint_oracles=kept_g if keep_oracles else None,
    )
