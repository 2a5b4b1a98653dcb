"""Benchmark problem families and dataset ingestion.

Each problem bundles an action set, its diameter and Lipschitz data, an
initial-action sampler, and a seeded generator of (loss, constraint)
rounds.  Problem objects are plain picklable state so trial workers can
receive them whole.

Sampling conventions are fixed so runs are bitwise reproducible: every
trial owns a numpy Generator; the initial action is drawn first, then
round data in documented field order.
"""

from __future__ import annotations

import numpy as np

from .geometry import Ball, Box, FeasibleSet
from .oracles import Affine, AffineMax, HalfSquaredNorm, NormResidual, Quadratic1D

__all__ = [
    "Synthetic1DProblem",
    "LinearRegressionProblem",
    "WineSvmProblem",
    "gen_linear_regression_round",
    "gen_svm_round",
    "load_wine_dataset",
    "synthetic1d_hindsight",
    "make_problem",
    "PROBLEM_NAMES",
]


class Synthetic1DProblem:
    """Scalar testbed with closed-form hindsight solutions.

    Losses (x - c_t)^2 with c_t uniform on (0, 1); constraints
    x - d_t <= 0 with d_t uniform on (0, 1); action set [0, 1].  The
    point 0 satisfies every constraint, so the comparator always
    exists.  The loss gradient 2(x - c) stays within [-2, 2] on the
    action set, the constraint gradient is 1, so the shared Lipschitz
    bound is 2; the diameter is 1; every loss is 2-strongly convex.
    """

    name = "synthetic-1d"
    dim = 1
    lipschitz = 2.0
    diameter = 1.0
    strong_modulus = 2.0
    supports_comparator = True
    default_horizon = 1000
    excluded_algorithms: tuple = ()

    def action_set(self) -> Box:
        return Box(np.zeros(1), np.ones(1))

    def init_action(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 1.0, 1)

    def round_data(self, rng: np.random.Generator, T: int):
        """Draw (centers, limits): all centers first, then all limits."""
        centers = rng.uniform(0.0, 1.0, T)
        limits = rng.uniform(0.0, 1.0, T)
        return centers, limits

    def rounds(self, rng: np.random.Generator, T: int, multi: bool = False):
        if multi:
            raise ValueError("the scalar family has one constraint per round")
        centers, limits = self.round_data(rng, T)
        yield from self.rounds_from_data(centers, limits)

    def rounds_from_data(self, centers, limits):
        """Oracle stream from already-drawn round data; lets callers
        keep the arrays for closed-form hindsight computations."""
        for c, d in zip(centers, limits):
            yield (
                Quadratic1D(c),
                Affine(np.ones(1), d, lipschitz_bound=1.0),
            )


def synthetic1d_hindsight(centers, limits):
    """Exact per-prefix hindsight optima for the scalar family.

    For prefix length t the comparator minimizes sum_{s<=t}(x - c_s)^2
    over [0, min(1, min_{s<=t} d_s)]: the prefix mean of the centers
    clamped to that interval.  Returns (comparator per prefix, optimal
    prefix objective per prefix), each of length T, via prefix sums.
    """
    centers = np.asarray(centers, dtype=float)
    limits = np.asarray(limits, dtype=float)
    T = centers.size
    tt = np.arange(1, T + 1, dtype=float)
    s1 = np.cumsum(centers)
    s2 = np.cumsum(centers ** 2)
    upper = np.minimum(np.minimum.accumulate(limits), 1.0)
    xs = np.clip(s1 / tt, 0.0, upper)
    fs = tt * xs ** 2 - 2.0 * s1 * xs + s2
    return xs, fs


def gen_linear_regression_round(rng: np.random.Generator,
                                multi: bool = False):
    """One regression round: loss ||H x - y|| and four affine
    constraint rows.

    H is 4x10 uniform on (-1, 1); y = H 1 + standard-normal noise per
    row; constraint rows A are 4x10 uniform on (0, 2) with offsets b
    uniform on (0, 1).  Draw order is H, noise, A, b.  The constraint
    comes back scalarized as the pointwise max of the rows, or as the
    list of rows when multi is set.
    """
    H = rng.uniform(-1.0, 1.0, (4, 10))
    noise = rng.standard_normal(4)
    y = H @ np.ones(10) + noise
    A = rng.uniform(0.0, 2.0, (4, 10))
    b = rng.uniform(0.0, 1.0, 4)
    loss = NormResidual(H, y)
    if multi:
        return loss, [Affine(A[i], b[i]) for i in range(4)]
    return loss, AffineMax(A, b)


class LinearRegressionProblem:
    """Online regression with adversarial affine constraints.

    Action set [0, 1]^10 (diameter sqrt(10)); the loss subgradient norm
    is at most the spectral norm of H, itself at most sqrt(40) for
    entries in (-1, 1), and the constraint rows have norm at most
    2 sqrt(10) = sqrt(40), so the shared Lipschitz bound is 2 sqrt(10).
    The origin satisfies every constraint row (nonnegative rows,
    nonnegative offsets), so round sets are never empty.
    """

    name = "linreg"
    dim = 10
    lipschitz = 2.0 * np.sqrt(10.0)
    diameter = float(np.sqrt(10.0))
    strong_modulus = 0.0
    supports_comparator = False
    default_horizon = 1000
    excluded_algorithms: tuple = ()

    def action_set(self) -> Box:
        return Box(np.zeros(10), np.ones(10))

    def init_action(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(0.0, 1.0, 10)

    def rounds(self, rng: np.random.Generator, T: int, multi: bool = False):
        for _ in range(T):
            yield gen_linear_regression_round(rng, multi=multi)


class LinearRegressionLongProblem(LinearRegressionProblem):
    """The same regression stream at a longer default horizon; the
    history-projecting baseline is excluded because its per-round
    projection cost grows with the round index."""

    name = "linreg-long"
    default_horizon = 10_000
    excluded_algorithms = ("switch",)


def load_wine_dataset(path):
    """Parse a semicolon-delimited wine-quality file into samples.

    Expects a header row naming 11 feature columns plus a final quality
    column, then numeric records.  Sulfur-dioxide columns arrive in
    mg/dm3 while the other concentration features are g/dm3, so those
    columns are rescaled by 1e-3 to put every density feature in the
    same unit.  Returns a list of (features, label) with label +1 iff
    quality >= 7, else -1.

    Raises FileNotFoundError for a missing file and ValueError naming
    the offending row for malformed records.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError("empty dataset file")
    header = [h.strip().strip('"').lower() for h in lines[0].split(";")]
    if len(header) != 12:
        raise ValueError(
            "expected 11 feature columns plus quality, got %d columns"
            % len(header)
        )
    if header[-1] != "quality":
        raise ValueError("last column must be quality, got %r" % header[-1])
    scales = np.array(
        [1e-3 if "sulfur dioxide" in name else 1.0 for name in header[:-1]]
    )
    samples = []
    for i, line in enumerate(lines[1:], start=1):
        if not line.strip():
            continue
        parts = line.split(";")
        if len(parts) != 12:
            raise ValueError(
                "row %d: expected 12 fields, got %d" % (i, len(parts))
            )
        try:
            values = np.array([float(p) for p in parts])
        except ValueError:
            bad = next(p for p in parts if not _is_float(p))
            raise ValueError(
                "row %d: non-numeric field %r" % (i, bad.strip())
            ) from None
        features = values[:-1] * scales
        label = 1 if values[-1] >= 7.0 else -1
        samples.append((features, label))
    return samples


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def gen_svm_round(sample):
    """One max-margin round from a labeled sample.

    The decision is x = (w, b) in R^12; the loss is (1/2)||w||^2 over
    the w block and the constraint is the margin condition
    -v (w . u - b) + 1 <= 0, an affine function of x with normal
    (-v u, v) and offset -1.  Both Lipschitz bounds are declared as
    70 sqrt(11): feature values stay within [0, 70], and the action
    set below has that radius.
    """
    u, v = sample
    u = np.asarray(u, dtype=float)
    if u.size != 11:
        raise ValueError("expected 11 features, got %d" % u.size)
    if v not in (-1, 1):
        raise ValueError("label must be +1 or -1")
    bound = 70.0 * np.sqrt(11.0)
    mask = np.zeros(12, dtype=bool)
    mask[:11] = True
    loss = HalfSquaredNorm(12, mask, lipschitz_bound=bound)
    normal = np.concatenate([-v * u, [float(v)]])
    constraint = Affine(normal, -1.0, lipschitz_bound=bound)
    return loss, constraint


class WineSvmProblem:
    """Online margin classification on wine-quality samples.

    The action set is the origin-centered ball of radius 70 sqrt(11) in
    R^12.  Each trial reshuffles the sample order; horizons longer than
    the dataset cycle through fresh shuffles.  No comparator exists:
    the accumulated margin constraints have empty intersection on this
    data, so runs report cumulative loss instead of regret.
    """

    name = "svm"
    dim = 12
    lipschitz = 70.0 * np.sqrt(11.0)
    diameter = 2.0 * 70.0 * np.sqrt(11.0)
    strong_modulus = 0.0
    supports_comparator = False
    default_horizon = 1000
    excluded_algorithms = ("switch",)

    def __init__(self, features: np.ndarray, labels: np.ndarray):
        features = np.asarray(features, dtype=float)
        labels = np.asarray(labels, dtype=int)
        if features.ndim != 2 or features.shape[1] != 11:
            raise ValueError("features must be (n_samples, 11)")
        if labels.shape != (features.shape[0],):
            raise ValueError("labels must match the sample count")
        if not np.all(np.isin(labels, (-1, 1))):
            raise ValueError("labels must be +1 or -1")
        self.features = features
        self.labels = labels

    @classmethod
    def from_file(cls, path) -> "WineSvmProblem":
        samples = load_wine_dataset(path)
        features = np.vstack([s[0] for s in samples])
        labels = np.array([s[1] for s in samples])
        return cls(features, labels)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    def action_set(self) -> Ball:
        return Ball(np.zeros(12), 70.0 * np.sqrt(11.0))

    def init_action(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(-1.0, 1.0, 12)

    def rounds(self, rng: np.random.Generator, T: int, multi: bool = False):
        if multi:
            raise ValueError("margin rounds carry one constraint each")
        produced = 0
        while produced < T:
            order = rng.permutation(self.n_samples)
            for i in order:
                if produced == T:
                    return
                yield gen_svm_round((self.features[i], self.labels[i]))
                produced += 1


PROBLEM_CLASSES = {
    "linreg": LinearRegressionProblem,
    "linreg-long": LinearRegressionLongProblem,
    "svm": WineSvmProblem,
    "synthetic-1d": Synthetic1DProblem,
}

PROBLEM_NAMES = tuple(PROBLEM_CLASSES)


def make_problem(name: str, dataset_path=None):
    """Problem factory for the benchmark presets; the margin problem
    needs its dataset path."""
    if name == "linreg":
        return LinearRegressionProblem()
    if name == "linreg-long":
        return LinearRegressionLongProblem()
    if name == "synthetic-1d":
        return Synthetic1DProblem()
    if name == "svm":
        if dataset_path is None:
            raise ValueError("the svm problem needs a dataset path")
        return WineSvmProblem.from_file(dataset_path)
    raise ValueError(
        "unknown problem %r; choose from %s" % (name, ", ".join(PROBLEM_NAMES))
    )
