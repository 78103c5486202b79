"""Closed-form geometry of the constant-curvature model surfaces and spaces.

Conventions: the sphere model is the unit sphere with distances scaled by
1/sqrt(k); the hyperbolic model is the upper hyperboloid x|_H x = -1 with
distances scaled by 1/sqrt(-k), where x|_H y = sum_i x_i y_i - x_last y_last
and cosh d = -(x|_H y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfeasibleTriangleError,
    InvalidInputError,
    NoUniqueGeodesicError,
    NumericDomainError,
)

EUCLIDEAN = "euclidean"
SPHERE = "sphere"
HYPERBOLOID = "hyperboloid"

#: default tolerance for point invariants and exactness checks
GEOM_TOL = 1e-9

#: relative clamp tolerance for arccos/arccosh domain violations
CLAMP_TOL = 1e-12


@dataclass(frozen=True)
class CurvatureParam:
    """Curvature k together with the model-space diameter cap D_k."""

    k: float

    @property
    def d_cap(self) -> float:
        """pi/sqrt(k) for k > 0, +inf otherwise."""
        return math.pi / math.sqrt(self.k) if self.k > 0 else math.inf

    @property
    def kind(self) -> str:
        """Model-point kind matching the sign of k."""
        if self.k > 0:
            return SPHERE
        if self.k < 0:
            return HYPERBOLOID
        return EUCLIDEAN


def minkowski_inner(x: np.ndarray, y: np.ndarray) -> float:
    """x|_H y = sum_{i<last} x_i y_i - x_last y_last."""
    return float(np.dot(x[:-1], y[:-1]) - x[-1] * y[-1])


class ModelPoint:
    """A point of E^n, the unit sphere S^n, or the upper hyperboloid H^n.

    Coordinates have length n for the euclidean kind and n+1 for the two
    curved kinds.  Sphere points must be unit vectors, hyperboloid points
    must satisfy x|_H x = -1 with positive last coordinate (both to 1e-9).
    """

    __slots__ = ("kind", "coords")

    def __init__(self, kind: str, coords):
        coords = np.asarray(coords, dtype=float)
        if coords.ndim != 1 or coords.size < 1:
            raise InvalidInputError("coords must be a 1-D real vector")
        if kind == SPHERE:
            nrm = float(np.linalg.norm(coords))
            if abs(nrm - 1.0) > GEOM_TOL:
                raise InvalidInputError(f"sphere point has norm {nrm}, expected 1")
        elif kind == HYPERBOLOID:
            q = minkowski_inner(coords, coords)
            if abs(q + 1.0) > GEOM_TOL or coords[-1] <= 0:
                raise InvalidInputError(
                    f"hyperboloid point violates x|_Hx=-1, x_last>0 (got {q}, {coords[-1]})"
                )
        elif kind != EUCLIDEAN:
            raise InvalidInputError(f"unknown model point kind {kind!r}")
        coords.setflags(write=False)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coords", coords)

    def __setattr__(self, name, value):
        raise AttributeError("ModelPoint is immutable")

    @property
    def dim(self) -> int:
        """Intrinsic dimension n of the model space the point lives in."""
        n = self.coords.size
        return n if self.kind == EUCLIDEAN else n - 1

    def __repr__(self) -> str:
        return f"ModelPoint({self.kind!r}, {self.coords.tolist()})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ModelPoint)
            and self.kind == other.kind
            and self.coords.shape == other.coords.shape
            and bool(np.all(self.coords == other.coords))
        )

    def __hash__(self) -> int:
        return hash((self.kind, self.coords.tobytes()))


def euclidean_point(*coords) -> ModelPoint:
    """Shorthand constructor for E^n points."""
    if len(coords) == 1 and np.ndim(coords[0]) == 1:
        return ModelPoint(EUCLIDEAN, coords[0])
    return ModelPoint(EUCLIDEAN, coords)


def sphere_point(coords) -> ModelPoint:
    """Build a sphere point, renormalizing away floating-point drift."""
    v = np.asarray(coords, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise InvalidInputError("cannot normalize a near-zero vector to the sphere")
    return ModelPoint(SPHERE, v / nrm)


def hyperboloid_point(coords) -> ModelPoint:
    """Build a hyperboloid point, renormalizing onto x|_Hx = -1."""
    v = np.asarray(coords, dtype=float)
    q = minkowski_inner(v, v)
    if q >= -1e-12 or v[-1] <= 0:
        raise InvalidInputError("vector is not timelike with positive last coordinate")
    return ModelPoint(HYPERBOLOID, v / math.sqrt(-q))


def _checked_clip(values, lo: float, hi: float):
    """Clip into [lo, hi]; violations beyond the relative clamp tolerance raise."""
    arr = np.asarray(values, dtype=float)
    tol = CLAMP_TOL * np.maximum(1.0, np.abs(arr))
    low_bad = arr < lo - tol if lo > -math.inf else np.zeros(arr.shape, bool)
    high_bad = arr > hi + tol if hi < math.inf else np.zeros(arr.shape, bool)
    if np.any(low_bad) or np.any(high_bad):
        worst = arr[low_bad | high_bad].flat[0]
        raise NumericDomainError(f"value {worst} outside [{lo}, {hi}] beyond clamp tolerance")
    return np.clip(arr, lo, hi)


def _check_pair(k: CurvatureParam, x: ModelPoint, y: ModelPoint) -> None:
    if x.kind != y.kind or x.coords.size != y.coords.size:
        raise InvalidInputError(
            f"mismatched points: {x.kind}/{x.coords.size} vs {y.kind}/{y.coords.size}"
        )
    if x.kind != k.kind:
        raise InvalidInputError(f"point kind {x.kind!r} inconsistent with k={k.k}")


def _sphere_angle(xc: np.ndarray, yc) -> np.ndarray:
    """Angle between unit vectors via chord lengths; yc may be (..., n+1).

    2*arcsin(|x-y|/2) is used below pi/2 and the antipodal-chord variant above,
    both accurate where arccos(x.y) loses half its digits.
    """
    half_chord = 0.5 * np.linalg.norm(yc - xc, axis=-1)
    half_anti = 0.5 * np.linalg.norm(yc + xc, axis=-1)
    near = 2.0 * np.arcsin(_checked_clip(half_chord, -1.0, 1.0))
    far = math.pi - 2.0 * np.arcsin(_checked_clip(half_anti, -1.0, 1.0))
    return np.where(half_chord <= 0.5 * math.sqrt(2.0), near, far)


def _hyperboloid_arc(xc: np.ndarray, yc) -> np.ndarray:
    """Unscaled hyperbolic distance via the Minkowski chord: 2*arcsinh(q/2)
    with q^2 = (x-y)|_H(x-y), accurate down to coincident points."""
    diff = yc - xc
    m = np.sum(diff[..., :-1] ** 2, axis=-1) - diff[..., -1] ** 2
    return 2.0 * np.arcsinh(0.5 * np.sqrt(np.maximum(m, 0.0)))


def model_distance(k: CurvatureParam, x: ModelPoint, y: ModelPoint) -> float:
    """Metric of the model space M^n_k."""
    _check_pair(k, x, y)
    if k.k == 0:
        return float(np.linalg.norm(x.coords - y.coords))
    if k.k > 0:
        return float(_sphere_angle(x.coords, y.coords)) / math.sqrt(k.k)
    return float(_hyperboloid_arc(x.coords, y.coords)) / math.sqrt(-k.k)


def geodesic_point(k: CurvatureParam, x: ModelPoint, y: ModelPoint, t: float) -> ModelPoint:
    """Point at parameter t in [0, 1] on the geodesic segment from x to y."""
    _check_pair(k, x, y)
    if not 0.0 <= t <= 1.0:
        raise InvalidInputError(f"t={t} outside [0, 1]")
    if k.k == 0:
        return ModelPoint(EUCLIDEAN, (1.0 - t) * x.coords + t * y.coords)
    if k.k > 0:
        theta = float(_sphere_angle(x.coords, y.coords))
        if theta >= math.pi - 1e-12:
            raise NoUniqueGeodesicError("antipodal endpoints: no unique geodesic")
        if theta <= 1e-12:
            return x
        w = (math.sin((1.0 - t) * theta) * x.coords + math.sin(t * theta) * y.coords) / math.sin(theta)
        return sphere_point(w)
    theta = float(_hyperboloid_arc(x.coords, y.coords))
    if theta <= 1e-12:
        return x
    w = (math.sinh((1.0 - t) * theta) * x.coords + math.sinh(t * theta) * y.coords) / math.sinh(theta)
    return hyperboloid_point(w)


def _law_of_cosines_array(k: float, b, c, alpha):
    """Vectorized law of cosines over numpy-broadcastable side/angle arrays."""
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    ca = np.cos(np.asarray(alpha, dtype=float))
    if k == 0:
        return np.sqrt(np.maximum(b * b + c * c - 2.0 * b * c * ca, 0.0))
    if k > 0:
        rk = math.sqrt(k)
        arg = np.cos(rk * b) * np.cos(rk * c) + np.sin(rk * b) * np.sin(rk * c) * ca
        return np.arccos(_checked_clip(arg, -1.0, 1.0)) / rk
    rk = math.sqrt(-k)
    arg = np.cosh(rk * b) * np.cosh(rk * c) - np.sinh(rk * b) * np.sinh(rk * c) * ca
    return np.arccosh(_checked_clip(arg, 1.0, math.inf)) / rk


def law_of_cosines(k: CurvatureParam, b: float, c: float, alpha: float) -> float:
    """Side a of the M^2_k triangle with adjacent sides b, c and included angle alpha."""
    if b < 0 or c < 0:
        raise InvalidInputError("side lengths must be non-negative")
    if not 0.0 <= alpha <= math.pi:
        raise InvalidInputError(f"angle {alpha} outside [0, pi]")
    if k.k > 0 and (b >= k.d_cap or c >= k.d_cap):
        raise InvalidInputError("sides must be < D_k for k > 0")
    return float(_law_of_cosines_array(k.k, b, c, alpha))


def _included_angle(k: float, a: float, b: float, c: float) -> float:
    """Angle between the sides of lengths b and c, opposite the side of length a."""
    if b == 0.0 or c == 0.0:
        return 0.0
    if k == 0:
        arg = (b * b + c * c - a * a) / (2.0 * b * c)
    elif k > 0:
        rk = math.sqrt(k)
        denom = math.sin(rk * b) * math.sin(rk * c)
        arg = (math.cos(rk * a) - math.cos(rk * b) * math.cos(rk * c)) / denom
    else:
        rk = math.sqrt(-k)
        denom = math.sinh(rk * b) * math.sinh(rk * c)
        arg = (math.cosh(rk * b) * math.cosh(rk * c) - math.cosh(rk * a)) / denom
    return float(np.arccos(_checked_clip(arg, -1.0, 1.0)))


def base_point(k: CurvatureParam, dim: int = 2) -> ModelPoint:
    """Canonical base point: origin, e1, or (0,...,0,1) depending on the sign of k."""
    if k.k == 0:
        return ModelPoint(EUCLIDEAN, np.zeros(dim))
    e = np.zeros(dim + 1)
    if k.k > 0:
        e[0] = 1.0
        return ModelPoint(SPHERE, e)
    e[-1] = 1.0
    return ModelPoint(HYPERBOLOID, e)


def _polar_point(k: CurvatureParam, dist: float, angle: float) -> ModelPoint:
    """Point of M^2_k at the given distance from the base point, at the given
    angle from the canonical direction inside the canonical tangent plane."""
    ca, sa = math.cos(angle), math.sin(angle)
    if k.k == 0:
        return ModelPoint(EUCLIDEAN, np.array([dist * ca, dist * sa]))
    if k.k > 0:
        th = math.sqrt(k.k) * dist
        return sphere_point(np.array([math.cos(th), math.sin(th) * ca, math.sin(th) * sa]))
    th = math.sqrt(-k.k) * dist
    return hyperboloid_point(np.array([math.sinh(th) * ca, math.sinh(th) * sa, math.cosh(th)]))


@dataclass(frozen=True)
class ComparisonTriangle:
    """Canonical triangle in M^2_k with prescribed side lengths (a, b, c).

    Vertices (x, y, z) satisfy d(x,y) = c, d(x,z) = b, d(y,z) = a.
    """

    k: CurvatureParam
    vertices: tuple
    side_lengths: tuple

    _SIDES = {"xy": (0, 1), "yz": (1, 2), "xz": (0, 2)}

    def side_length(self, side: str) -> float:
        a, b, c = self.side_lengths
        return {"xy": c, "yz": a, "xz": b}[side]


def comparison_triangle(k: CurvatureParam, a: float, b: float, c: float) -> ComparisonTriangle:
    """Place the (a, b, c)-triangle canonically in M^2_k.

    The first vertex sits at the base point, the second at distance c along the
    canonical direction, the third in the upper half plane.
    """
    if min(a, b, c) < 0:
        raise InfeasibleTriangleError("side lengths must be non-negative")
    sides = sorted([a, b, c])
    if sides[2] > sides[0] + sides[1] + 1e-12 * max(1.0, sides[2]):
        raise InfeasibleTriangleError(f"triangle inequality fails for ({a}, {b}, {c})")
    if a + b + c >= 2.0 * k.d_cap:
        raise InfeasibleTriangleError(f"perimeter {a + b + c} >= 2*D_k = {2 * k.d_cap}")
    alpha = _included_angle(k.k, a, b, c)
    v0 = base_point(k)
    v1 = _polar_point(k, c, 0.0)
    v2 = _polar_point(k, b, alpha)
    return ComparisonTriangle(k=k, vertices=(v0, v1, v2), side_lengths=(a, b, c))


def comparison_point(tri: ComparisonTriangle, side: str, s: float) -> ModelPoint:
    """Point on the named side at arc length s from the side's first vertex."""
    if side not in ComparisonTriangle._SIDES:
        raise InvalidInputError(f"unknown side {side!r}, expected one of xy, yz, xz")
    length = tri.side_length(side)
    if not -1e-12 <= s <= length + 1e-12 * max(1.0, length):
        raise InvalidInputError(f"arc length {s} outside [0, {length}]")
    i, j = ComparisonTriangle._SIDES[side]
    if length == 0.0:
        return tri.vertices[i]
    t = min(max(s / length, 0.0), 1.0)
    return geodesic_point(tri.k, tri.vertices[i], tri.vertices[j], t)


def min_projection_gap(k: CurvatureParam, r: float, s: float, grid: int = 256) -> float:
    """Minimum of d(w,z) - d(w,pi(z)) over w in the closed r-ball about the base
    point and z on the s-sphere, pi being radial projection of z to radius r.

    By rotational symmetry z is pinned at the canonical direction and w is
    scanned over (rho, theta) in [0,r] x [0,pi]; one 10x refinement pass runs
    around the coarse grid minimum.  The value is strictly positive whenever
    0 < r < s < D_k/2.
    """
    if not 0.0 < r < s:
        raise InvalidInputError(f"need 0 < r < s, got r={r}, s={s}")
    if s >= k.d_cap / 2.0:
        raise InvalidInputError(f"need s < D_k/2 = {k.d_cap / 2.0}, got s={s}")
    if grid < 8:
        raise InvalidInputError("grid resolution too small")

    def gap(rho, theta):
        # d(w,z) - d(w,y): both via the (rho, radius, included angle) triangle
        return _law_of_cosines_array(k.k, rho, s, theta) - _law_of_cosines_array(
            k.k, rho, r, theta
        )

    rhos = np.linspace(0.0, r, grid)
    thetas = np.linspace(0.0, math.pi, grid)
    rr, tt = np.meshgrid(rhos, thetas, indexing="ij")
    vals = gap(rr, tt)
    best = float(vals.min())
    i, j = np.unravel_index(int(vals.argmin()), vals.shape)
    h_r, h_t = r / (grid - 1), math.pi / (grid - 1)
    fine_r = np.linspace(max(0.0, rhos[i] - h_r), min(r, rhos[i] + h_r), 21)
    fine_t = np.linspace(max(0.0, thetas[j] - h_t), min(math.pi, thetas[j] + h_t), 21)
    rr, tt = np.meshgrid(fine_r, fine_t, indexing="ij")
    return min(best, float(gap(rr, tt).min()))
