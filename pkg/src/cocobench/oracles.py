"""First-order oracles for convex losses and constraints.

Each oracle answers value and subgradient queries at a point and
declares two constants the analysis needs: a bound on subgradient norms
over the relevant action set (the Lipschitz constant used in the
violation and regret bounds) and a strong-convexity modulus, zero for
the merely convex families.

Affine and max-affine oracles also know their own zero-sublevel sets as
geometry objects, which is how constraint oracles become the sets the
learner projects onto.
"""

from __future__ import annotations

import numpy as np

from .geometry import (
    AffineMaxSublevel,
    Ball,
    Box,
    DimensionMismatch,
    Halfspace,
    as_vector,
)

__all__ = [
    "ConvexOracle",
    "Affine",
    "AffineMax",
    "NormResidual",
    "HalfSquaredNorm",
    "Quadratic1D",
    "estimate_lipschitz",
]


class ConvexOracle:
    """Base class: exact values, one subgradient per query, declared
    curvature constants."""

    def __init__(self, dim: int, lipschitz_bound: float,
                 strong_convexity_modulus: float = 0.0):
        dim = int(dim)
        if dim < 1:
            raise ValueError("dim must be a positive integer")
        lipschitz_bound = float(lipschitz_bound)
        if not (np.isfinite(lipschitz_bound) and lipschitz_bound >= 0):
            raise ValueError("lipschitz_bound must be finite and >= 0")
        modulus = float(strong_convexity_modulus)
        if not (np.isfinite(modulus) and modulus >= 0):
            raise ValueError("strong_convexity_modulus must be >= 0")
        self.dim = dim
        self.lipschitz_bound = lipschitz_bound
        self.strong_convexity_modulus = modulus

    def _check(self, x) -> np.ndarray:
        x = as_vector(x)
        if x.size != self.dim:
            raise DimensionMismatch(
                "point has dimension %d, oracle expects %d"
                % (x.size, self.dim)
            )
        return x

    def value(self, x) -> float:
        raise NotImplementedError

    def subgradient(self, x) -> np.ndarray:
        raise NotImplementedError

    def positive_part(self, x) -> float:
        """max(0, value); the violation magnitude when used as a
        constraint."""
        return max(0.0, self.value(x))

    def sublevel_set(self):
        """Zero-sublevel set {x : value(x) <= 0} as a geometry object,
        for the families where it has a closed description."""
        raise NotImplementedError(
            "%s has no closed-form sublevel set" % type(self).__name__
        )


class Affine(ConvexOracle):
    """x -> a . x - b.  Subgradient is the constant a; sublevel set is
    a halfspace."""

    def __init__(self, a, b: float, lipschitz_bound: float | None = None):
        a = as_vector(a)
        if lipschitz_bound is None:
            lipschitz_bound = float(np.linalg.norm(a))
        super().__init__(a.size, lipschitz_bound)
        self.a = a
        self.b = float(b)

    def value(self, x) -> float:
        x = self._check(x)
        return float(np.dot(self.a, x)) - self.b

    def subgradient(self, x) -> np.ndarray:
        self._check(x)
        return self.a.copy()

    def sublevel_set(self) -> Halfspace:
        return Halfspace(self.a, self.b)


class AffineMax(ConvexOracle):
    """x -> max_i (rows[i] . x - offsets[i]), the scalarization of a
    vector of affine constraints.

    The subgradient is the row achieving the max (lowest index on
    ties); the sublevel set is the matching bundle of halfspaces.
    """

    def __init__(self, rows, offsets, lipschitz_bound: float | None = None):
        rows = np.asarray(rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        offsets = as_vector(offsets)
        if rows.shape[0] != offsets.size:
            raise DimensionMismatch("rows and offsets disagree in count")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows have non-finite entries")
        if lipschitz_bound is None:
            lipschitz_bound = float(
                np.sqrt(np.max(np.einsum("ij,ij->i", rows, rows)))
            )
        super().__init__(rows.shape[1], lipschitz_bound)
        self.rows = rows
        self.offsets = offsets

    def _scores(self, x) -> np.ndarray:
        return self.rows @ x - self.offsets

    def value(self, x) -> float:
        x = self._check(x)
        return float(np.max(self._scores(x)))

    def subgradient(self, x) -> np.ndarray:
        x = self._check(x)
        i = int(np.argmax(self._scores(x)))
        return self.rows[i].copy()

    def sublevel_set(self) -> AffineMaxSublevel:
        return AffineMaxSublevel(self.rows, self.offsets)


class NormResidual(ConvexOracle):
    """x -> ||H x - y||, the Euclidean norm of an affine residual.

    At a zero residual any unit-ball element is a subgradient; zero is
    returned there.  Lipschitz bound defaults to the spectral norm of
    H, valid everywhere.
    """

    def __init__(self, H, y, lipschitz_bound: float | None = None):
        H = np.asarray(H, dtype=float)
        if H.ndim != 2:
            raise ValueError("H must be a 2-d array")
        if not np.all(np.isfinite(H)):
            raise ValueError("H has non-finite entries")
        y = as_vector(y)
        if H.shape[0] != y.size:
            raise DimensionMismatch("H and y disagree in row count")
        if lipschitz_bound is None:
            lipschitz_bound = float(np.linalg.norm(H, 2))
        super().__init__(H.shape[1], lipschitz_bound)
        self.H = H
        self.y = y

    def value(self, x) -> float:
        x = self._check(x)
        return float(np.linalg.norm(self.H @ x - self.y))

    def subgradient(self, x) -> np.ndarray:
        x = self._check(x)
        r = self.H @ x - self.y
        nr = float(np.linalg.norm(r))
        if nr == 0.0:
            return np.zeros(self.dim)
        return self.H.T @ (r / nr)


class HalfSquaredNorm(ConvexOracle):
    """x -> (1/2) ||x[mask]||^2 over a coordinate subset.

    Gradients are unbounded on all of space, so the caller must supply
    the Lipschitz bound valid on its action set (sup of ||x[mask]||
    there).  Strongly convex in the masked block only, so the declared
    modulus is zero unless every coordinate is masked.
    """

    def __init__(self, dim: int, mask, lipschitz_bound: float):
        mask = np.asarray(mask, dtype=bool)
        if mask.ndim != 1 or mask.size != dim:
            raise DimensionMismatch("mask length must equal dim")
        if not mask.any():
            raise ValueError("mask selects no coordinates")
        modulus = 1.0 if mask.all() else 0.0
        super().__init__(dim, lipschitz_bound, modulus)
        self.mask = mask

    def value(self, x) -> float:
        x = self._check(x)
        z = x[self.mask]
        return 0.5 * float(np.dot(z, z))

    def subgradient(self, x) -> np.ndarray:
        x = self._check(x)
        g = np.zeros(self.dim)
        g[self.mask] = x[self.mask]
        return g


class Quadratic1D(ConvexOracle):
    """Scalar x -> (x - center)^2, strongly convex with modulus 2.

    The gradient 2(x - center) is unbounded globally; the default
    Lipschitz bound assumes both x and center stay in [0, 1], and the
    caller overrides it otherwise.
    """

    def __init__(self, center: float, lipschitz_bound: float = 2.0):
        super().__init__(1, lipschitz_bound, strong_convexity_modulus=2.0)
        center = float(center)
        if not np.isfinite(center):
            raise ValueError("center must be finite")
        self.center = center

    def value(self, x) -> float:
        x = self._check(x)
        d = float(x[0]) - self.center
        return d * d

    def subgradient(self, x) -> np.ndarray:
        x = self._check(x)
        return np.array([2.0 * (float(x[0]) - self.center)])


def estimate_lipschitz(oracle: ConvexOracle, region, n_samples: int = 1000,
                       rng: np.random.Generator | None = None) -> float:
    """Empirical check of a declared Lipschitz bound: the max
    subgradient norm over points sampled uniformly from a box or ball.

    A sampling estimate, so it lower-bounds the true constant; useful
    for catching a declared bound that is wrong, not for certifying
    one.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    if isinstance(region, Box):
        pts = rng.uniform(region.lo, region.hi, size=(n_samples, region.dim))
    elif isinstance(region, Ball):
        raw = rng.standard_normal((n_samples, region.dim))
        raw /= np.linalg.norm(raw, axis=1, keepdims=True)
        radii = region.radius * rng.uniform(
            0.0, 1.0, n_samples
        ) ** (1.0 / region.dim)
        pts = region.center + raw * radii[:, None]
    else:
        raise TypeError("sampling supports Box and Ball regions only")
    best = 0.0
    for p in pts:
        best = max(best, float(np.linalg.norm(oracle.subgradient(p))))
    return best
