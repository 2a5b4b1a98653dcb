"""Constrained online convex optimization workbench.

A small library for running projected online learners against streams
of convex losses and convex constraints, measuring regret and
cumulative constraint violation, checking the runs against explicit
upper bounds, and reproducing benchmark tables from seeded trials.
"""

from .geometry import (
    AffineMaxSublevel,
    Ball,
    Box,
    DiameterUnavailable,
    DimensionMismatch,
    FeasibleSet,
    Halfspace,
    InfeasibleIntersection,
    Intersection,
    ProjectionResult,
    ProjectionSettings,
    contains,
    distance,
    flatten,
    membership_gap,
    project,
    project_info,
    set_diameter,
)
from .oracles import (
    Affine,
    AffineMax,
    ConvexOracle,
    HalfSquaredNorm,
    NormResidual,
    Quadratic1D,
    estimate_lipschitz,
)
from .clasp import (
    ConstraintMode,
    ConvexStepSchedule,
    LearnerState,
    StronglyConvexStepSchedule,
    build_round_set,
    clasp_step,
    run,
    select_active_constraint,
)
from .metrics import (
    RunRecord,
    TrialSummary,
    aggregate_trials,
    compute_metrics,
    fit_rate,
)
from .baselines import (
    DriftPlusPenaltyAdagrad,
    Recoo,
    Switch,
    run_baseline,
)
from .bounds import (
    BoundCheck,
    BoundReport,
    ComparatorResult,
    comparator_solve,
    regret_bound_curve,
    verify_bounds,
)

__version__ = "0.1.0"
