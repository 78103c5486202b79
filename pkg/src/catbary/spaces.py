"""Uniform geodesic-space abstraction: model spaces, finite metric trees, and
convex subsets of an ambient space.

Every space exposes distance, geodesic_point and a curvature parameter; the
solver additionally uses the pack/distances_from pair for vectorized scans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ConvexityViolationError, InvalidInputError
from .geometry import EUCLIDEAN, HYPERBOLOID, SPHERE, CurvatureParam, ModelPoint


class GeodesicSpace:
    """Behavior contract: a metric with distinguished geodesic segments.

    Subset spaces may override ``contains``; the CAT(k) property is asserted,
    not certified (see check_cat_inequality for the sampled test utility).
    """

    curvature: CurvatureParam

    def distance(self, x, y) -> float:
        raise NotImplementedError

    def geodesic_point(self, x, y, t: float):
        raise NotImplementedError

    def contains(self, x) -> bool:
        return True

    # vectorization hooks; the generic fallback loops
    def pack(self, points):
        return list(points)

    def distances_from(self, x, packed) -> np.ndarray:
        return np.array([self.distance(x, p) for p in packed], dtype=float)


class ModelSpace(GeodesicSpace):
    """The model space M^n_k with ModelPoint elements."""

    def __init__(self, k: float, dim: int):
        if dim < 1:
            raise InvalidInputError("dimension must be >= 1")
        self.curvature = CurvatureParam(float(k))
        self.dim = int(dim)

    @property
    def kind(self) -> str:
        return self.curvature.kind

    def _check(self, x: ModelPoint) -> None:
        if not isinstance(x, ModelPoint) or x.kind != self.kind or x.dim != self.dim:
            raise InvalidInputError(f"point {x!r} does not belong to {self!r}")

    def point(self, coords) -> ModelPoint:
        """Wrap raw coordinates as a point of this space (with invariant checks)."""
        p = ModelPoint(self.kind, coords)
        self._check(p)
        return p

    def distance(self, x: ModelPoint, y: ModelPoint) -> float:
        self._check(x)
        self._check(y)
        return geometry.model_distance(self.curvature, x, y)

    def geodesic_point(self, x: ModelPoint, y: ModelPoint, t: float) -> ModelPoint:
        self._check(x)
        self._check(y)
        return geometry.geodesic_point(self.curvature, x, y, t)

    def pack(self, points) -> np.ndarray:
        return np.array([p.coords for p in points], dtype=float)

    def distances_from(self, x: ModelPoint, packed: np.ndarray) -> np.ndarray:
        k = self.curvature.k
        if k == 0:
            return np.linalg.norm(packed - x.coords, axis=1)
        if k > 0:
            return geometry._sphere_angle(x.coords, packed) / math.sqrt(k)
        return geometry._hyperboloid_arc(x.coords, packed) / math.sqrt(-k)

    # tangent-space helpers (charts for the grid oracle, isometry tests)
    def tangent_basis(self, base: ModelPoint) -> np.ndarray:
        """Orthonormal basis of the tangent space at base, rows = basis vectors."""
        self._check(base)
        if self.kind == EUCLIDEAN:
            return np.eye(self.dim)
        n = self.dim + 1
        basis = []
        for i in range(n):
            v = np.zeros(n)
            v[i] = 1.0
            if self.kind == SPHERE:
                v = v - np.dot(v, base.coords) * base.coords
            else:
                v = v + geometry.minkowski_inner(v, base.coords) * base.coords
            for b in basis:
                if self.kind == SPHERE:
                    v = v - np.dot(v, b) * b
                else:
                    v = v - geometry.minkowski_inner(v, b) * b
            nrm2 = (
                np.dot(v, v)
                if self.kind == SPHERE
                else geometry.minkowski_inner(v, v)
            )
            if nrm2 > 1e-12:
                basis.append(v / math.sqrt(nrm2))
            if len(basis) == self.dim:
                break
        return np.array(basis)

    def exp(self, base: ModelPoint, v: np.ndarray) -> ModelPoint:
        """Geodesic exponential of the tangent vector v (ambient coordinates)."""
        self._check(base)
        k = self.curvature.k
        if k == 0:
            return ModelPoint(EUCLIDEAN, base.coords + v)
        if k > 0:
            th = float(np.linalg.norm(v)) * math.sqrt(k)
            if th <= 1e-15:
                return base
            u = v / np.linalg.norm(v)
            return geometry.sphere_point(math.cos(th) * base.coords + math.sin(th) * u)
        nrm = math.sqrt(max(geometry.minkowski_inner(v, v), 0.0))
        th = nrm * math.sqrt(-k)
        if th <= 1e-15:
            return base
        u = v / nrm
        return geometry.hyperboloid_point(math.cosh(th) * base.coords + math.sinh(th) * u)

    def log(self, base: ModelPoint, p: ModelPoint) -> np.ndarray:
        """Inverse of exp: tangent vector at base pointing to p, |v| = d(base, p)."""
        self._check(base)
        self._check(p)
        k = self.curvature.k
        if k == 0:
            return p.coords - base.coords
        d = self.distance(base, p)
        if d <= 1e-15:
            return np.zeros(base.coords.size)
        if k > 0:
            th = d * math.sqrt(k)
            u = p.coords - math.cos(th) * base.coords
            return d * u / np.linalg.norm(u)
        th = d * math.sqrt(-k)
        u = p.coords - math.cosh(th) * base.coords
        nrm = math.sqrt(max(geometry.minkowski_inner(u, u), 1e-300))
        return d * u / nrm

    def __repr__(self) -> str:
        return f"ModelSpace(k={self.curvature.k}, dim={self.dim})"


@dataclass(frozen=True)
class TreePoint:
    """Point on a metric tree: edge index plus offset from the edge's first vertex."""

    edge: int
    offset: float

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TreePoint)
            and self.edge == other.edge
            and self.offset == other.offset
        )

    def __hash__(self) -> int:
        return hash((self.edge, self.offset))


class MetricTree(GeodesicSpace):
    """Finite metric tree: vertices joined by positively weighted edges.

    Finite trees stand in for R-trees; they are CAT(k) for every k, so the
    curvature parameter is 0 by convention.  Vertex points are canonicalized
    onto the lowest incident edge index.
    """

    def __init__(self, vertices, edges):
        self.vertices = [str(v) for v in vertices]
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidInputError("duplicate vertex ids")
        vset = set(self.vertices)
        self.edges = []
        for u, v, length in edges:
            u, v, length = str(u), str(v), float(length)
            if u not in vset or v not in vset:
                raise InvalidInputError(f"edge ({u}, {v}) references unknown vertex")
            if length <= 0:
                raise InvalidInputError(f"edge ({u}, {v}) has non-positive length {length}")
            self.edges.append((u, v, length))
        if len(self.edges) != len(self.vertices) - 1:
            raise InvalidInputError("a tree needs exactly |V| - 1 edges")
        self.curvature = CurvatureParam(0.0)
        self._adj = {v: [] for v in self.vertices}
        for idx, (u, v, length) in enumerate(self.edges):
            self._adj[u].append((v, length, idx))
            self._adj[v].append((u, length, idx))
        self._vertex_dist, self._parent = {}, {}
        for root in self.vertices:
            dist, parent = {root: 0.0}, {root: None}
            stack = [root]
            while stack:
                cur = stack.pop()
                for nxt, length, _ in self._adj[cur]:
                    if nxt not in dist:
                        dist[nxt] = dist[cur] + length
                        parent[nxt] = cur
                        stack.append(nxt)
            if len(dist) != len(self.vertices):
                raise InvalidInputError("tree is not connected")
            self._vertex_dist[root] = dist
            self._parent[root] = parent
        # lowest incident edge index per vertex, for canonical vertex points
        self._canonical_edge = {}
        for idx, (u, v, _) in enumerate(self.edges):
            for w in (u, v):
                if w not in self._canonical_edge:
                    self._canonical_edge[w] = idx

    def edge_length(self, idx: int) -> float:
        return self.edges[idx][2]

    def vertex_point(self, vertex: str) -> TreePoint:
        """Canonical TreePoint for a vertex (lowest incident edge index)."""
        vertex = str(vertex)
        if vertex not in self._canonical_edge:
            raise InvalidInputError(f"unknown vertex {vertex!r}")
        idx = self._canonical_edge[vertex]
        u, _, length = self.edges[idx]
        return TreePoint(idx, 0.0 if vertex == u else length)

    def point(self, edge: int, offset: float) -> TreePoint:
        """Validated, canonicalized tree point."""
        if not 0 <= edge < len(self.edges):
            raise InvalidInputError(f"edge index {edge} out of range")
        u, v, length = self.edges[edge]
        if not -1e-12 <= offset <= length + 1e-12:
            raise InvalidInputError(f"offset {offset} outside [0, {length}]")
        offset = min(max(float(offset), 0.0), length)
        if offset == 0.0:
            return self.vertex_point(u)
        if offset == length:
            return self.vertex_point(v)
        return TreePoint(edge, offset)

    def contains(self, x) -> bool:
        if not isinstance(x, TreePoint) or not 0 <= x.edge < len(self.edges):
            return False
        return 0.0 <= x.offset <= self.edges[x.edge][2]

    def _check(self, x: TreePoint) -> None:
        if not self.contains(x):
            raise InvalidInputError(f"point {x!r} does not belong to this tree")

    def _endpoint_dists(self, p: TreePoint):
        u, v, length = self.edges[p.edge]
        return (u, p.offset), (v, length - p.offset)

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        self._check(p)
        self._check(q)
        if p.edge == q.edge:
            return abs(p.offset - q.offset)
        best = math.inf
        for a, da in self._endpoint_dists(p):
            for b, db in self._endpoint_dists(q):
                best = min(best, da + self._vertex_dist[a][b] + db)
        return best

    def _vertex_path(self, a: str, b: str):
        """Vertex sequence from a to b along the unique arc."""
        parent = self._parent[a]
        path = [b]
        while path[-1] != a:
            path.append(parent[path[-1]])
        return list(reversed(path))

    def geodesic_point(self, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
        self._check(p)
        self._check(q)
        if not 0.0 <= t <= 1.0:
            raise InvalidInputError(f"t={t} outside [0, 1]")
        total = self.distance(p, q)
        if total == 0.0:
            return p
        s = t * total
        if p.edge == q.edge:
            off = p.offset + math.copysign(s, q.offset - p.offset)
            return self.point(p.edge, off)
        # exit endpoint minimizing the route, ties toward the first endpoint
        (ea, da), (eb, db) = self._endpoint_dists(p)
        (fa, ga), (fb, gb) = self._endpoint_dists(q)
        best, route = math.inf, None
        for a, dpa in ((ea, da), (eb, db)):
            for b, dqb in ((fa, ga), (fb, gb)):
                cand = dpa + self._vertex_dist[a][b] + dqb
                if cand < best - 1e-15:
                    best, route = cand, (a, dpa, b, dqb)
        a, dpa, b, dqb = route
        if s <= dpa:
            u, _, _ = self.edges[p.edge]
            off = p.offset - s if a == u else p.offset + s
            return self.point(p.edge, off)
        s -= dpa
        path = self._vertex_path(a, b)
        for cur, nxt in zip(path, path[1:]):
            idx = next(i for v2, _, i in self._adj[cur] if v2 == nxt)
            u, v, length = self.edges[idx]
            if s <= length + 1e-15:
                off = s if cur == u else length - s
                return self.point(idx, min(max(off, 0.0), length))
            s -= length
        # remaining arc enters q's edge through vertex b
        u, _, length = self.edges[q.edge]
        off = s if b == u else length - s
        return self.point(q.edge, min(max(off, 0.0), length))

    def all_vertex_points(self):
        return [self.vertex_point(v) for v in self.vertices]

    def __repr__(self) -> str:
        return f"MetricTree({len(self.vertices)} vertices, {len(self.edges)} edges)"


def tree_distance(tree: MetricTree, p: TreePoint, q: TreePoint) -> float:
    """Length of the unique arc between p and q."""
    return tree.distance(p, q)


def tree_geodesic_point(tree: MetricTree, p: TreePoint, q: TreePoint, t: float) -> TreePoint:
    """Point at arc length t*d(p,q) from p along the unique p-q arc."""
    return tree.geodesic_point(p, q, t)


class ConvexSubsetSpace(GeodesicSpace):
    """Convex subset of an ambient space, with ambient geodesics.

    Geodesics are sampled for membership; a sample outside the set raises
    ConvexityViolationError (a detection, not a certification).
    """

    def __init__(self, ambient: GeodesicSpace, membership, projector=None, check_samples: int = 9):
        self.ambient = ambient
        self.membership = membership
        self.projector = projector
        self.check_samples = int(check_samples)
        self.curvature = ambient.curvature

    def contains(self, x) -> bool:
        return bool(self.membership(x))

    def _check(self, x) -> None:
        if not self.contains(x):
            raise InvalidInputError(f"point {x!r} is not a member of the subset")

    def distance(self, x, y) -> float:
        self._check(x)
        self._check(y)
        return self.ambient.distance(x, y)

    def geodesic_point(self, x, y, t: float):
        self._check(x)
        self._check(y)
        p = self.ambient.geodesic_point(x, y, t)
        if not self.contains(p):
            raise ConvexityViolationError(
                f"geodesic point at t={t} left the subset; the set is not convex"
            )
        return p

    def check_convexity(self, pairs) -> None:
        """Sample geodesics between the given member pairs; raise on escape."""
        for x, y in pairs:
            for t in np.linspace(0.0, 1.0, self.check_samples + 2)[1:-1]:
                self.geodesic_point(x, y, float(t))

    def pack(self, points):
        return self.ambient.pack(points)

    def distances_from(self, x, packed) -> np.ndarray:
        return self.ambient.distances_from(x, packed)


def convex_subset_space(ambient: GeodesicSpace, membership, projector=None) -> ConvexSubsetSpace:
    """Wrap a convex subset of an ambient geodesic space as a space of its own."""
    return ConvexSubsetSpace(ambient, membership, projector)


def check_cat_inequality(space: GeodesicSpace, triples, samples: int = 4, tol: float = 1e-9):
    """Sampled CAT(k) test: comparison distances dominate for random side points.

    Returns the worst violation (positive = failure beyond tol).  Test utility,
    not a certification of the CAT(k) property.
    """
    worst = -math.inf
    k = space.curvature
    rng = np.random.default_rng(0)
    for x, y, z in triples:
        a = space.distance(y, z)
        b = space.distance(x, z)
        c = space.distance(x, y)
        if a + b + c >= 2.0 * k.d_cap or min(a, b, c) <= 1e-12:
            continue
        tri = geometry.comparison_triangle(k, a, b, c)
        for _ in range(samples):
            s1, s2 = rng.uniform(0, c), rng.uniform(0, b)
            p = space.geodesic_point(x, y, s1 / c)
            q = space.geodesic_point(x, z, s2 / b)
            pb = geometry.comparison_point(tri, "xy", s1)
            qb = geometry.comparison_point(tri, "xz", s2)
            gap = space.distance(p, q) - geometry.model_distance(k, pb, qb)
            worst = max(worst, gap - tol)
    return worst
