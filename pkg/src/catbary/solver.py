"""Weighted minimax barycenter solver with independent grid/tree oracles.

The barycenter of a weighted point set is the unique minimizer of
x -> max_p u(p) * d(x, p).  The solver runs a farthest-weighted-point geodesic
descent with diminishing steps, then alternates golden-section line searches
along geodesics toward the current farthest point and toward two-point balance
targets of the top weighted-farthest pairs.  Everything is deterministic for
fixed inputs; ties break to the lowest index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DiameterBoundError, InvalidInputError, UnsupportedSpaceError
from .geometry import EUCLIDEAN, ModelPoint
from .spaces import ConvexSubsetSpace, GeodesicSpace, MetricTree, ModelSpace, TreePoint

#: relative tolerance for reporting a point as active (weighted-farthest)
ACTIVITY_TOL = 1e-6

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class WeightedPointSet:
    """Finite points with non-negative bounded weights; the solver input."""

    space: GeodesicSpace
    points: list
    weights: np.ndarray

    def __post_init__(self):
        self.points = list(self.points)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or len(self.points) != self.weights.size:
            raise InvalidInputError("points and weights must be parallel 1-D sequences")
        if len(self.points) == 0:
            raise InvalidInputError("point set must be non-empty")
        if not np.all(np.isfinite(self.weights)):
            raise InvalidInputError("weights must be finite")
        if np.any(self.weights < 0):
            raise InvalidInputError("weights must be non-negative")
        if not np.any(self.weights > 0):
            raise InvalidInputError("at least one weight must be positive")

    def scaled(self, lam: float) -> "WeightedPointSet":
        """Same points with weights multiplied by lam > 0."""
        if lam <= 0:
            raise InvalidInputError("scale factor must be positive")
        return WeightedPointSet(self.space, self.points, self.weights * lam)


@dataclass
class BarycenterResult:
    barycenter: object
    baryradius: float
    active_indices: list = field(default_factory=list)
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True


def objective(W: WeightedPointSet, x) -> float:
    """max_p u(p) * d(x, p); the argmax tie-breaks to the lowest index."""
    packed = W.space.pack(W.points)
    vals = W.weights * W.space.distances_from(x, packed)
    return float(vals.max())


def _support(W: WeightedPointSet):
    """Positive-weight points with exact duplicates merged (max weight kept)."""
    pts, wts, seen = [], [], {}
    for p, u in zip(W.points, W.weights):
        if u <= 0.0:
            continue
        if p in seen:
            j = seen[p]
            wts[j] = max(wts[j], float(u))
        else:
            seen[p] = len(pts)
            pts.append(p)
            wts.append(float(u))
    return pts, np.asarray(wts)


def _diameter_check(space: GeodesicSpace, pts, uniform_weights: bool) -> None:
    """For k > 0 the set diameter must stay below D_k/4 (D_k/2 for constant u)."""
    k = space.curvature
    if k.k <= 0:
        return
    cap = k.d_cap / (2.0 if uniform_weights else 4.0)
    packed = space.pack(pts)
    for i, p in enumerate(pts):
        d = space.distances_from(p, packed)
        if d.max() >= cap:
            raise DiameterBoundError(
                f"diameter {d.max():.6g} >= {cap:.6g} (D_k/{2 if uniform_weights else 4})"
            )


def _initial_point(space: GeodesicSpace, pts, wts):
    """Weighted pseudo-centroid (projected for curved models), best vertex for trees."""
    if isinstance(space, MetricTree):
        packed = space.pack(pts)
        best, best_val = None, math.inf
        for v in space.all_vertex_points():
            val = float((wts * space.distances_from(v, packed)).max())
            if val < best_val:
                best, best_val = v, val
        return best
    if isinstance(space, ConvexSubsetSpace):
        cand = _initial_point(space.ambient, pts, wts)
        return cand if space.contains(cand) else pts[0]
    if isinstance(space, ModelSpace):
        coords = space.pack(pts)
        v = (wts[:, None] * coords).sum(axis=0) / wts.sum()
        k = space.curvature.k
        if k == 0:
            return ModelPoint(EUCLIDEAN, v)
        if k > 0:
            nrm = np.linalg.norm(v)
            return pts[0] if nrm < 1e-12 else geometry.sphere_point(v)
        q = geometry.minkowski_inner(v, v)
        return pts[0] if q >= -1e-12 else geometry.hyperboloid_point(v)
    return pts[0]


def _pair_balance(space: GeodesicSpace, p, q, up: float, uq: float):
    """Balance point m on the geodesic p-q with up*d(m,p) = uq*d(m,q)."""
    return space.geodesic_point(p, q, uq / (up + uq))


class _Budget:
    """Objective-evaluation budget shared across solver phases."""

    def __init__(self, limit: int):
        self.limit = int(limit)
        self.used = 0

    def spend(self, n: int = 1) -> bool:
        self.used += n
        return self.used <= self.limit


def _golden_search(space, x, target, packed, wts, cur_val, gtol, budget):
    """Minimize the objective along the geodesic [x, target] by golden section.

    Returns (point, value, displacement).  The objective is geodesically convex
    on the balls the solver works in, hence unimodal along the segment.
    """
    seg = space.distance(x, target)
    if seg <= 1e-15:
        return x, cur_val, 0.0

    cache = {}

    def f(t: float) -> float:
        if t in cache:
            return cache[t]
        p = space.geodesic_point(x, target, t)
        budget.spend()
        val = float((wts * space.distances_from(p, packed)).max())
        cache[t] = val
        return val

    a, b = 0.0, 1.0
    t1, t2 = 1.0 - _GOLDEN, _GOLDEN
    f1, f2 = f(t1), f(t2)
    it = 0
    while (b - a) * seg > gtol and it < 100:
        if f1 <= f2:
            b, t2, f2 = t2, t1, f1
            t1 = b - _GOLDEN * (b - a)
            f1 = f(t1)
        else:
            a, t1, f1 = t1, t2, f2
            t2 = a + _GOLDEN * (b - a)
            f2 = f(t2)
        it += 1
    cache[0.0] = cur_val
    t_best = min(cache, key=lambda t: (cache[t], t))
    if cache[t_best] >= cur_val:
        return x, cur_val, 0.0
    p_best = space.geodesic_point(x, target, t_best)
    return p_best, cache[t_best], t_best * seg


def barycenter(
    W: WeightedPointSet,
    tol: float = 1e-8,
    max_iter: int = 50_000,
    descent_budget: int = 300,
    step_scale: float = 1.0,
) -> BarycenterResult:
    """Compute the barycenter and baryradius of a weighted point set.

    Zero-weight points are dropped and exact duplicates merged before solving.
    On a positively curved model space the point-set diameter must be below
    D_k/4 (D_k/2 when all positive weights are equal).  If the evaluation
    budget runs out before the refinement displacement drops below tol, the
    best iterate is returned with converged=False.
    """
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    space = W.space
    pts, wts = _support(W)
    uniform = bool(np.all(wts == wts[0]))
    _diameter_check(space, pts, uniform)

    if len(pts) == 1:
        return _finalize(W, pts[0], iterations=0, residual=0.0, converged=True)

    packed = space.pack(pts)
    budget = _Budget(max_iter)

    x = _initial_point(space, pts, wts)
    vals = wts * space.distances_from(x, packed)
    budget.spend()
    best_x, best_val = x, float(vals.max())

    # phase 1: farthest-weighted-point descent, eta_j = step_scale / (j + 2)
    for j in range(min(descent_budget, max_iter)):
        p_star = int(np.argmax(vals))
        eta = min(step_scale / (j + 2.0), 1.0)
        x = space.geodesic_point(x, pts[p_star], eta)
        if not budget.spend():
            break
        vals = wts * space.distances_from(x, packed)
        val = float(vals.max())
        if val < best_val:
            best_x, best_val = x, val
        if best_val == 0.0:
            break

    # phase 2: alternating golden-section refinement
    x, val = best_x, best_val
    m_top = min(len(pts), space.dim + 1 if isinstance(space, (ModelSpace,)) else 4)
    residual = math.inf
    converged = False
    gtol_floor = max(1e-13, tol * 1e-5)
    gtol = max(gtol_floor, 1e-4)
    while budget.used < budget.limit:
        moved = 0.0
        vals = wts * space.distances_from(x, packed)
        budget.spend()
        p_star = int(np.argmax(vals))
        x, val, dd = _golden_search(space, x, pts[p_star], packed, wts, val, gtol, budget)
        moved += dd
        if len(pts) > 1:
            vals = wts * space.distances_from(x, packed)
            budget.spend()
            order = np.argsort(-vals, kind="stable")[:m_top]
            for i, j in itertools.combinations(sorted(int(o) for o in order), 2):
                target = _pair_balance(space, pts[i], pts[j], wts[i], wts[j])
                x, val, dd = _golden_search(space, x, target, packed, wts, val, gtol, budget)
                moved += dd
        residual = moved
        if moved < tol and gtol <= gtol_floor:
            converged = True
            break
        # resolution follows progress down to the floor
        gtol = max(gtol_floor, min(gtol, moved * 1e-3))

    return _finalize(W, x, iterations=budget.used, residual=residual, converged=converged)


def _finalize(W, q, iterations, residual, converged) -> BarycenterResult:
    packed = W.space.pack(W.points)
    vals = W.weights * W.space.distances_from(q, packed)
    r = float(vals.max())
    thresh = r - ACTIVITY_TOL * (1.0 + r)
    active = [i for i, v in enumerate(vals) if W.weights[i] > 0 and v >= thresh]
    return BarycenterResult(
        barycenter=q,
        baryradius=r,
        active_indices=active,
        iterations=iterations,
        residual=float(residual),
        converged=converged,
    )


def circumcenter(
    space: GeodesicSpace, points, tol: float = 1e-8, max_iter: int = 50_000
) -> BarycenterResult:
    """Barycenter with unit weights: the smallest enclosing ball's center/radius."""
    W = WeightedPointSet(space, points, np.ones(len(points)))
    return barycenter(W, tol=tol, max_iter=max_iter)


def barycenter_pow(
    W: WeightedPointSet, t: float, tol: float = 1e-8, max_iter: int = 50_000
) -> BarycenterResult:
    """Minimize sup_p u(p) * d(x, p)^t by solving with weights u^(1/t).

    The minimizing point coincides with the barycenter for u^(1/t) and the
    optimal value is (r_{u^{1/t}})^t.
    """
    if t <= 0:
        raise InvalidInputError("exponent t must be positive")
    if t == 1.0:
        return barycenter(W, tol=tol, max_iter=max_iter)
    Wp = WeightedPointSet(W.space, W.points, np.power(W.weights, 1.0 / t))
    res = barycenter(Wp, tol=tol, max_iter=max_iter)
    q = res.barycenter
    packed = W.space.pack(W.points)
    vals = W.weights * W.space.distances_from(q, packed) ** t
    r = float(vals.max())
    thresh = r - ACTIVITY_TOL * (1.0 + r)
    active = [i for i, v in enumerate(vals) if W.weights[i] > 0 and v >= thresh]
    return BarycenterResult(
        barycenter=q,
        baryradius=r,
        active_indices=active,
        iterations=res.iterations,
        residual=res.residual,
        converged=res.converged,
    )


# ---------------------------------------------------------------------------
# independent oracles


def _pairwise_distances(space: ModelSpace, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """(G, n) distance matrix between coordinate stacks A (G, m) and B (n, m)."""
    k = space.curvature.k
    if k == 0:
        return np.linalg.norm(A[:, None, :] - B[None, :, :], axis=2)
    if k > 0:
        return geometry._sphere_angle(A[:, None, :], B[None, :, :]) / math.sqrt(k)
    return geometry._hyperboloid_arc(A[:, None, :], B[None, :, :]) / math.sqrt(-k)


def oracle_grid(
    W: WeightedPointSet,
    bounds=None,
    resolution: int = 65,
    refine_passes: int = 16,
) -> BarycenterResult:
    """Brute-force minimization used as ground truth in tests.

    Euclidean boxes and curved 2-D tangent charts are scanned on a dense grid,
    re-gridding around the argmin each pass (safe: the objective is
    geodesically convex on the search ball).  Trees are minimized exactly
    edge-by-edge: the objective restricted to an edge is a max of finitely many
    lines with slopes +-u(p), so the minimum sits at an endpoint or at a
    crossing of two lines.
    """
    space = W.space
    if isinstance(space, MetricTree):
        return _tree_exact(W)
    if isinstance(space, ConvexSubsetSpace):
        raise UnsupportedSpaceError("grid oracle does not handle subset spaces")
    if not isinstance(space, ModelSpace):
        raise UnsupportedSpaceError(f"no oracle for {space!r}")
    if space.curvature.k == 0 and space.dim <= 3:
        return _euclidean_grid(W, bounds, resolution, refine_passes)
    if space.curvature.k != 0 and space.dim == 2:
        return _chart_grid(W, bounds, resolution, refine_passes)
    raise UnsupportedSpaceError(f"no oracle for {space!r}")


def _grid_result(W, q, value, evals, pitch) -> BarycenterResult:
    res = _finalize(W, q, iterations=evals, residual=pitch, converged=True)
    return res


def _euclidean_grid(W, bounds, resolution, refine_passes) -> BarycenterResult:
    space: ModelSpace = W.space
    pts, wts = _support(W)
    P = space.pack(pts)
    if bounds is None:
        lo, hi = P.min(axis=0), P.max(axis=0)
    else:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    pad = 1e-9 * (1.0 + np.abs(hi - lo))
    lo, hi = lo - pad, hi + pad
    dim = space.dim
    res = max(9, resolution if dim <= 2 else min(resolution, 25))
    evals = 0
    best_q, best_val = None, math.inf
    for _ in range(refine_passes):
        axes = [np.linspace(lo[d], hi[d], res) for d in range(dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid = np.stack([m.ravel() for m in mesh], axis=1)
        vals = (wts[None, :] * _pairwise_distances(space, grid, P)).max(axis=1)
        evals += grid.shape[0]
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_q = float(vals[i]), grid[i]
        pitch = (hi - lo) / (res - 1)
        center = grid[i]
        lo = np.maximum(lo, center - 1.5 * pitch)
        hi = np.minimum(hi, center + 1.5 * pitch)
        if float(np.max(pitch)) < 1e-10 * (1.0 + float(np.max(np.abs(center)))):
            break
    q = ModelPoint(EUCLIDEAN, best_q)
    return _grid_result(W, q, best_val, evals, float(np.max((hi - lo) / (res - 1))))


def _chart_grid(W, bounds, resolution, refine_passes) -> BarycenterResult:
    space: ModelSpace = W.space
    pts, wts = _support(W)
    P = space.pack(pts)
    anchor = _initial_point(space, pts, wts)
    basis = space.tangent_basis(anchor)
    if bounds is None:
        radius = float(space.distances_from(anchor, P).max()) + 1e-9
    else:
        radius = float(bounds)
    if space.curvature.k > 0:
        radius = min(radius, 0.99 * math.pi / math.sqrt(space.curvature.k))
    lo = np.array([-radius, -radius])
    hi = np.array([radius, radius])
    res = max(9, resolution)
    k = space.curvature.k
    evals = 0
    best_v, best_val = None, math.inf
    for _ in range(refine_passes):
        axes = [np.linspace(lo[d], hi[d], res) for d in range(2)]
        mesh = np.meshgrid(*axes, indexing="ij")
        V = np.stack([m.ravel() for m in mesh], axis=1)  # tangent coords (G, 2)
        T = V @ basis  # ambient tangent vectors (G, m)
        norms = np.linalg.norm(V, axis=1)
        safe = np.where(norms > 1e-15, norms, 1.0)
        U = T / safe[:, None]
        if k > 0:
            th = norms * math.sqrt(k)
            G = np.cos(th)[:, None] * anchor.coords[None, :] + np.sin(th)[:, None] * U
            G /= np.linalg.norm(G, axis=1)[:, None]
        else:
            th = norms * math.sqrt(-k)
            G = np.cosh(th)[:, None] * anchor.coords[None, :] + np.sinh(th)[:, None] * U
            qn = -(np.sum(G[:, :-1] ** 2, axis=1) - G[:, -1] ** 2)
            G /= np.sqrt(qn)[:, None]
        vals = (wts[None, :] * _pairwise_distances(space, G, P)).max(axis=1)
        evals += G.shape[0]
        i = int(np.argmin(vals))
        if vals[i] < best_val:
            best_val, best_v = float(vals[i]), V[i]
        pitch = (hi - lo) / (res - 1)
        lo = np.maximum(lo, V[i] - 1.5 * pitch)
        hi = np.minimum(hi, V[i] + 1.5 * pitch)
        if float(np.max(pitch)) < 1e-10 * (1.0 + radius):
            break
    q = space.exp(anchor, best_v @ basis)
    return _grid_result(W, q, best_val, evals, float(np.max((hi - lo) / (res - 1))))


def _tree_exact(W: WeightedPointSet) -> BarycenterResult:
    tree: MetricTree = W.space
    pts, wts = _support(W)
    best = None  # (value, edge, s)
    evals = 0
    for idx, (u, v, length) in enumerate(tree.edges):
        pu, pv = tree.vertex_point(u), tree.vertex_point(v)
        lines = []  # (slope, intercept) of u_i * d_i(s) pieces, s = offset from u
        for p, w in zip(pts, wts):
            if p.edge == idx and 0.0 < p.offset < length:
                lines.append((w, -w * p.offset))
                lines.append((-w, w * p.offset))
            else:
                A = tree.distance(pu, p)
                B = tree.distance(pv, p)
                lines.append((w * (B - A) / length, w * A))
        cands = {0.0, length}
        for (m1, b1), (m2, b2) in itertools.combinations(lines, 2):
            if abs(m1 - m2) < 1e-15:
                continue
            s = (b2 - b1) / (m1 - m2)
            if 0.0 < s < length:
                cands.add(s)
        for s in sorted(cands):
            x = tree.point(idx, s)
            val = float((wts * tree.distances_from(x, tree.pack(pts))).max())
            evals += 1
            key = (val, idx, s)
            if best is None or key < best[0]:
                best = (key, x)
    (val, _, _), q = best
    return _finalize(W, q, iterations=evals, residual=0.0, converged=True)
