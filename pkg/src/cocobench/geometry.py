"""Closed convex sets with exact projections and distances.

Five set descriptions cover everything the learners need: axis-aligned
boxes, Euclidean balls, halfspaces, sublevel sets of max-affine functions
(a bundle of halfspaces sharing one scalar description) and finite
intersections of any of these.  Boxes, balls and halfspaces project in
closed form.  Composite sets are projected with Dykstra's alternating
scheme, which carries a correction increment per piece and converges to
the exact nearest point of the intersection; plain cyclic projection
without the corrections only finds *a* feasible point, not the closest
one, so it is never used here.

The Dykstra inner loop is compiled with numba for the common flattened
shape (at most one box, at most one ball, any number of halfspace rows).
A pure-numpy implementation of the same scheme is kept as
``dykstra_reference`` for cross-checking and as a fallback for shapes
the kernel does not cover.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numba import njit

__all__ = [
    "Box",
    "Ball",
    "Halfspace",
    "AffineMaxSublevel",
    "Intersection",
    "FeasibleSet",
    "ProjectionSettings",
    "ProjectionResult",
    "DimensionMismatch",
    "DiameterUnavailable",
    "InfeasibleIntersection",
    "as_vector",
    "flatten",
    "project",
    "project_info",
    "distance",
    "membership_gap",
    "contains",
    "set_diameter",
    "dykstra_reference",
]


class DimensionMismatch(ValueError):
    """Operands live in different ambient dimensions."""


class DiameterUnavailable(ValueError):
    """Raised when no closed-form diameter exists for a set description."""


class InfeasibleIntersection(RuntimeError):
    """An intersection was detected to be numerically empty."""


def as_vector(x) -> np.ndarray:
    """Validate and return a finite 1-d float vector."""
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-d real vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True)
class Box:
    """Axis-aligned box {x : lo <= x <= hi}, coordinatewise."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = as_vector(self.lo)
        hi = as_vector(self.hi)
        if lo.shape != hi.shape:
            raise DimensionMismatch("box bounds differ in dimension")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi in every coordinate")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.lo.size


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x - center|| <= radius}."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = as_vector(self.center)
        radius = float(self.radius)
        if not np.isfinite(radius) or radius < 0:
            raise ValueError("ball radius must be finite and nonnegative")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)

    @property
    def dim(self) -> int:
        return self.center.size


@dataclass(frozen=True)
class Halfspace:
    """Halfspace {x : normal . x <= offset} with a nonzero normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = as_vector(self.normal)
        offset = float(self.offset)
        if not np.isfinite(offset):
            raise ValueError("halfspace offset must be finite")
        if np.dot(normal, normal) == 0.0:
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return self.normal.size


@dataclass(frozen=True)
class AffineMaxSublevel:
    """Zero-sublevel set of x -> max_i (rows[i] . x - offsets[i]).

    Geometrically the intersection of the halfspaces rows[i] . x <=
    offsets[i]; kept as one object because the constraint oracles hand
    over exactly this shape.
    """

    rows: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim == 1:
            rows = rows.reshape(1, -1)
        offsets = as_vector(self.offsets)
        if rows.ndim != 2 or rows.shape[0] != offsets.size:
            raise DimensionMismatch("rows and offsets disagree in count")
        if not np.all(np.isfinite(rows)):
            raise ValueError("rows have non-finite entries")
        norms2 = np.einsum("ij,ij->i", rows, rows)
        if np.any(norms2 == 0.0):
            raise ValueError("every row must be nonzero")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "offsets", offsets)

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class Intersection:
    """Finite intersection of member sets in a common dimension."""

    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise ValueError("intersection needs at least one member")
        dims = {m.dim for m in members}
        if len(dims) != 1:
            raise DimensionMismatch(
                "intersection members span dimensions %s" % sorted(dims)
            )
        object.__setattr__(self, "members", members)

    @property
    def dim(self) -> int:
        return self.members[0].dim


FeasibleSet = Union[Box, Ball, Halfspace, AffineMaxSublevel, Intersection]


@dataclass(frozen=True)
class ProjectionSettings:
    """Iteration controls for the alternating projection solver.

    tol is the Euclidean displacement of one full cycle below which the
    iteration stops; max_iter caps the number of cycles.
    """

    tol: float = 1e-8
    max_iter: int = 10_000

    def __post_init__(self):
        if not (self.tol > 0 and np.isfinite(self.tol)):
            raise ValueError("tol must be a positive finite float")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


DEFAULT_SETTINGS = ProjectionSettings()


@dataclass(frozen=True)
class ProjectionResult:
    """Projection output: the point, whether the solver converged, and
    how many Dykstra cycles it spent (0 for closed forms)."""

    point: np.ndarray
    converged: bool
    cycles: int


def flatten(s: FeasibleSet) -> list:
    """Decompose a set into its closed-form pieces (boxes, balls,
    halfspaces), recursing through intersections."""
    if isinstance(s, (Box, Ball, Halfspace)):
        return [s]
    if isinstance(s, AffineMaxSublevel):
        return [
            Halfspace(s.rows[i], s.offsets[i]) for i in range(s.rows.shape[0])
        ]
    if isinstance(s, Intersection):
        out = []
        for m in s.members:
            out.extend(flatten(m))
        return out
    raise TypeError("unknown set description: %r" % type(s).__name__)


def _project_piece(piece, u: np.ndarray) -> np.ndarray:
    if isinstance(piece, Box):
        return np.minimum(np.maximum(u, piece.lo), piece.hi)
    if isinstance(piece, Ball):
        d = u - piece.center
        nd = float(np.linalg.norm(d))
        if nd <= piece.radius:
            return u.copy()
        if nd == 0.0:
            return piece.center.copy()
        return piece.center + (piece.radius / nd) * d
    if isinstance(piece, Halfspace):
        slack = float(np.dot(piece.normal, u)) - piece.offset
        if slack <= 0.0:
            return u.copy()
        nrm2 = float(np.dot(piece.normal, piece.normal))
        return u - (slack / nrm2) * piece.normal
    raise TypeError("not an elementary piece: %r" % type(piece).__name__)


def _piece_distance(piece, u: np.ndarray) -> float:
    if isinstance(piece, Box):
        gap = np.maximum(piece.lo - u, 0.0) + np.maximum(u - piece.hi, 0.0)
        return float(np.linalg.norm(gap))
    if isinstance(piece, Ball):
        return max(0.0, float(np.linalg.norm(u - piece.center)) - piece.radius)
    if isinstance(piece, Halfspace):
        slack = float(np.dot(piece.normal, u)) - piece.offset
        if slack <= 0.0:
            return 0.0
        return slack / float(np.linalg.norm(piece.normal))
    raise TypeError("not an elementary piece: %r" % type(piece).__name__)


@njit(cache=True)
def _dykstra_kernel(u, has_box, lo, hi, has_ball, center, radius, A, b,
                    tol, max_iter):
    """Dykstra cycles over (box, ball, halfspace rows) with one
    correction increment per piece.  Returns (point, cycles, converged).
    """
    n = u.shape[0]
    m = A.shape[0]
    x = u.copy()
    inc_box = np.zeros(n)
    inc_ball = np.zeros(n)
    inc_h = np.zeros((m, n))
    nrm2 = np.empty(m)
    for j in range(m):
        s = 0.0
        for k in range(n):
            s += A[j, k] * A[j, k]
        nrm2[j] = s
    tol2 = tol * tol
    cycles = 0
    for it in range(max_iter):
        delta2 = 0.0
        if has_box:
            for k in range(n):
                y = x[k] + inc_box[k]
                p = y
                if p < lo[k]:
                    p = lo[k]
                elif p > hi[k]:
                    p = hi[k]
                inc_box[k] = y - p
                d = p - x[k]
                delta2 += d * d
                x[k] = p
        if has_ball:
            nd2 = 0.0
            for k in range(n):
                y = x[k] + inc_ball[k]
                inc_ball[k] = y
                d = y - center[k]
                nd2 += d * d
            nd = np.sqrt(nd2)
            if nd > radius and nd > 0.0:
                scale = radius / nd
            else:
                scale = 1.0
            for k in range(n):
                y = inc_ball[k]
                p = center[k] + scale * (y - center[k])
                inc_ball[k] = y - p
                d = p - x[k]
                delta2 += d * d
                x[k] = p
        for j in range(m):
            slack = -b[j]
            for k in range(n):
                slack += A[j, k] * (x[k] + inc_h[j, k])
            if slack > 0.0:
                coef = slack / nrm2[j]
            else:
                coef = 0.0
            for k in range(n):
                y = x[k] + inc_h[j, k]
                p = y - coef * A[j, k]
                inc_h[j, k] = y - p
                d = p - x[k]
                delta2 += d * d
                x[k] = p
        cycles = it + 1
        if delta2 < tol2:
            return x, cycles, True
    return x, cycles, False


def dykstra_reference(pieces, u: np.ndarray,
                      settings: ProjectionSettings = DEFAULT_SETTINGS):
    """Pure-numpy Dykstra over a list of elementary pieces, in order.

    Same scheme as the compiled kernel: each piece keeps its own
    correction increment, added back before the piece's projection and
    refreshed afterwards.  Returns a ProjectionResult.
    """
    x = u.copy()
    incs = [np.zeros_like(u) for _ in pieces]
    tol2 = settings.tol ** 2
    for it in range(settings.max_iter):
        delta2 = 0.0
        for i, piece in enumerate(pieces):
            y = x + incs[i]
            p = _project_piece(piece, y)
            incs[i] = y - p
            delta2 += float(np.dot(p - x, p - x))
            x = p
        if delta2 < tol2:
            return ProjectionResult(x, True, it + 1)
    return ProjectionResult(x, False, settings.max_iter)


def _as_polyhedron_rows(pieces, n):
    """Stack all pieces into halfspace rows A x <= b, with box bounds
    expanded into coordinate faces.  Returns None when a ball is
    present (not a polyhedron)."""
    rows = []
    offs = []
    for p in pieces:
        if isinstance(p, Ball):
            return None
        if isinstance(p, Box):
            for k in range(n):
                if np.isfinite(p.hi[k]):
                    e = np.zeros(n)
                    e[k] = 1.0
                    rows.append(e)
                    offs.append(p.hi[k])
                if np.isfinite(p.lo[k]):
                    e = np.zeros(n)
                    e[k] = -1.0
                    rows.append(e)
                    offs.append(-p.lo[k])
        else:
            rows.append(p.normal)
            offs.append(p.offset)
    if not rows:
        return None
    return np.vstack(rows), np.asarray(offs, dtype=float)


def _exact_polyhedron_projection(u, A, b, max_steps=2000):
    """Exact nearest point of {x : A x <= b} by the dual active-set
    method for projection problems (Goldfarb-Idnani with an identity
    Hessian).

    The working set J always has linearly independent rows: a violated
    row p only enters after stepping along z, the component of its
    normal orthogonal to the working rows, and when z vanishes the
    method instead drops a working row whose multiplier blocks the dual
    step.  If z vanishes and no multiplier blocks (r <= 0), the row
    system is infeasible by a Farkas combination and None is returned;
    None is also returned on the defensive step cap.
    """
    m, n = A.shape
    norms = np.sqrt(np.einsum("ij,ij->i", A, A))
    feas_eps = 1e-11 * (1.0 + float(np.linalg.norm(u)))
    x = u.astype(float).copy()
    work: list = []
    lam = np.empty(0)
    steps = 0
    while steps < max_steps:
        scaled = (A @ x - b) / norms
        p = int(np.argmax(scaled))
        if scaled[p] <= feas_eps:
            return x
        ap = A[p]
        acc = 0.0
        while steps < max_steps:
            steps += 1
            if work:
                Aw = A[work]
                r, *_ = np.linalg.lstsq(Aw.T, ap, rcond=None)
                z = ap - Aw.T @ r
            else:
                r = np.empty(0)
                z = ap.copy()
            zz = float(z @ z)
            blocking = np.where(r > 1e-12)[0] if work else np.empty(0, dtype=int)
            if blocking.size:
                ratios = lam[blocking] / r[blocking]
                k = int(blocking[np.argmin(ratios)])
                t1 = float(lam[k] / r[k])
            else:
                k = -1
                t1 = np.inf
            if zz <= (1e-9 * norms[p]) ** 2:
                if k < 0:
                    return None
                lam = lam - t1 * r
                acc += t1
                work.pop(k)
                lam = np.delete(lam, k)
                continue
            t2 = float(ap @ x - b[p]) / zz
            if t1 < t2:
                x = x - t1 * z
                lam = lam - t1 * r
                acc += t1
                work.pop(k)
                lam = np.delete(lam, k)
                continue
            x = x - t2 * z
            lam = np.maximum(lam - t2 * r, 0.0) if work else lam
            work.append(p)
            lam = np.append(lam, acc + t2)
            break
    return None


def _polish_stalled(pieces, u, n):
    """Finish a stalled composite projection exactly when the set is a
    polyhedron.

    Dykstra's convergence is linear with a rate controlled by the
    angles between the pieces, and nearly degenerate active faces
    (common when a halfspace shaves a box corner) can push the rate so
    close to 1 that the cycle cap fires long before the tolerance is
    met.  The dual active-set solve is exact and immune to those
    angles; it also declines (returns None) when the rows are actually
    inconsistent, leaving emptiness detection to the caller.
    """
    poly = _as_polyhedron_rows(pieces, n)
    if poly is None:
        return None
    return _exact_polyhedron_projection(u, *poly)


def _merge_boxes(boxes):
    lo = boxes[0].lo
    hi = boxes[0].hi
    for b in boxes[1:]:
        lo = np.maximum(lo, b.lo)
        hi = np.minimum(hi, b.hi)
    if np.any(lo > hi):
        raise InfeasibleIntersection("box bounds cross: empty intersection")
    return Box(lo, hi)


def _split_for_kernel(pieces, n):
    """Group pieces into (box, ball, halfspace matrix) for the compiled
    kernel.  Returns None when the shape is outside what the kernel
    handles (more than one distinct ball)."""
    boxes = [p for p in pieces if isinstance(p, Box)]
    balls = [p for p in pieces if isinstance(p, Ball)]
    halves = [p for p in pieces if isinstance(p, Halfspace)]
    if len(balls) > 1:
        return None
    box = _merge_boxes(boxes) if boxes else None
    ball = balls[0] if balls else None
    if halves:
        A = np.vstack([h.normal for h in halves])
        b = np.array([h.offset for h in halves], dtype=float)
    else:
        A = np.empty((0, n))
        b = np.empty(0)
    return box, ball, A, b


def project_info(s: FeasibleSet, u,
                 settings: ProjectionSettings = DEFAULT_SETTINGS
                 ) -> ProjectionResult:
    """Project u onto s, reporting convergence and cycle count.

    Elementary sets use their closed forms.  Composites run Dykstra;
    when the solver hits max_iter the best iterate is returned with
    converged=False so the caller can decide whether the set was
    actually empty (see membership_gap).
    """
    u = as_vector(u)
    if u.size != s.dim:
        raise DimensionMismatch(
            "point has dimension %d, set has %d" % (u.size, s.dim)
        )
    if isinstance(s, (Box, Ball, Halfspace)):
        return ProjectionResult(_project_piece(s, u), True, 0)
    pieces = flatten(s)
    if len(pieces) == 1:
        return ProjectionResult(_project_piece(pieces[0], u), True, 0)
    split = _split_for_kernel(pieces, u.size)
    if split is None:
        result = dykstra_reference(pieces, u, settings)
    else:
        box, ball, A, b = split
        x, cycles, ok = _dykstra_kernel(
            u,
            box is not None,
            box.lo if box is not None else np.empty(0),
            box.hi if box is not None else np.empty(0),
            ball is not None,
            ball.center if ball is not None else np.empty(0),
            float(ball.radius) if ball is not None else 0.0,
            A,
            b,
            settings.tol,
            settings.max_iter,
        )
        result = ProjectionResult(x, bool(ok), int(cycles))
    if not result.converged:
        exact = _polish_stalled(pieces, u, u.size)
        if exact is not None:
            result = ProjectionResult(exact, True, result.cycles)
    return result


def project(s: FeasibleSet, u,
            settings: ProjectionSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Nearest point of s to u (point only; see project_info for
    diagnostics)."""
    return project_info(s, u, settings).point


def distance(s: FeasibleSet, u,
             settings: ProjectionSettings = DEFAULT_SETTINGS) -> float:
    """Euclidean distance from u to s; closed form where available."""
    u = as_vector(u)
    if u.size != s.dim:
        raise DimensionMismatch(
            "point has dimension %d, set has %d" % (u.size, s.dim)
        )
    if isinstance(s, (Box, Ball, Halfspace)):
        return _piece_distance(s, u)
    return float(np.linalg.norm(u - project_info(s, u, settings).point))


def membership_gap(s: FeasibleSet, x) -> float:
    """Largest per-piece distance from x to the flattened pieces of s.

    Zero exactly on the set; a lower bound on the true distance for
    composites, and cheap, which makes it the right residual for
    checking whether a returned projection actually landed in the set.
    """
    x = as_vector(x)
    if x.size != s.dim:
        raise DimensionMismatch(
            "point has dimension %d, set has %d" % (x.size, s.dim)
        )
    return max(_piece_distance(p, x) for p in flatten(s))


def contains(s: FeasibleSet, x, tol: float = 1e-9) -> bool:
    """Membership up to a tolerance on the per-piece residual."""
    return membership_gap(s, x) <= tol


def set_diameter(s: FeasibleSet) -> float:
    """Diameter for the descriptions that have one in closed form.

    Boxes and balls only; everything else raises DiameterUnavailable and
    the caller supplies its own bound.
    """
    if isinstance(s, Box):
        return float(np.linalg.norm(s.hi - s.lo))
    if isinstance(s, Ball):
        return 2.0 * s.radius
    raise DiameterUnavailable(
        "no closed-form diameter for %s; pass one explicitly"
        % type(s).__name__
    )
