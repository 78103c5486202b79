"""Model-space geometry: distances, geodesics, law of cosines, comparison
triangles, and the radial-projection gap minimum."""

import math

import mpmath
import numpy as np
import pytest

from catbary.errors import (
    InfeasibleTriangleError,
    InvalidInputError,
    NoUniqueGeodesicError,
    NumericDomainError,
)
from catbary.geometry import (
    ComparisonTriangle,
    CurvatureParam,
    ModelPoint,
    base_point,
    comparison_point,
    comparison_triangle,
    euclidean_point,
    geodesic_point,
    hyperboloid_point,
    law_of_cosines,
    min_projection_gap,
    minkowski_inner,
    model_distance,
    sphere_point,
)

K0 = CurvatureParam(0.0)
K1 = CurvatureParam(1.0)
KM1 = CurvatureParam(-1.0)


def rand_point(k: CurvatureParam, rng, scale=1.0) -> ModelPoint:
    """Random point of M^2_k within a moderate ball around the base point."""
    if k.k == 0:
        return euclidean_point(rng.normal(size=2) * scale)
    if k.k > 0:
        v = rng.normal(size=3)
        return sphere_point(v)
    xy = rng.normal(size=2) * scale
    return hyperboloid_point(np.array([xy[0], xy[1], math.sqrt(1.0 + xy @ xy)]))


class TestCurvatureParam:
    def test_d_cap_positive_k(self):
        assert CurvatureParam(4.0).d_cap == pytest.approx(math.pi / 2.0, abs=1e-15)

    def test_d_cap_nonpositive_k(self):
        assert CurvatureParam(0.0).d_cap == math.inf
        assert CurvatureParam(-2.5).d_cap == math.inf


class TestModelPointInvariants:
    def test_sphere_norm_enforced(self):
        with pytest.raises(InvalidInputError):
            ModelPoint("sphere", [1.0, 0.01, 0.0])
        ModelPoint("sphere", [1.0, 1e-6, 0.0])  # norm deviation ~5e-13, allowed

    def test_hyperboloid_form_enforced(self):
        with pytest.raises(InvalidInputError):
            ModelPoint("hyperboloid", [0.0, 0.0, 1.1])
        with pytest.raises(InvalidInputError):
            ModelPoint("hyperboloid", [0.0, 0.0, -1.0])

    def test_immutable(self):
        p = euclidean_point(1.0, 2.0)
        with pytest.raises(AttributeError):
            p.kind = "sphere"


class TestModelDistance:
    def test_euclidean_345(self):
        assert model_distance(K0, euclidean_point(0, 0), euclidean_point(3, 4)) == pytest.approx(
            5.0, abs=1e-12
        )

    def test_sphere_orthogonal_units(self):
        x = ModelPoint("sphere", [1, 0, 0])
        y = ModelPoint("sphere", [0, 1, 0])
        assert model_distance(K1, x, y) == pytest.approx(math.pi / 2, abs=1e-12)

    def test_hyperboloid_unit_step(self):
        # d((0,0,1),(sinh 1,0,cosh 1)) = arccosh(cosh 1); oracle: 50-digit acosh
        x = ModelPoint("hyperboloid", [0.0, 0.0, 1.0])
        y = ModelPoint("hyperboloid", [math.sinh(1.0), 0.0, math.cosh(1.0)])
        with mpmath.workdps(50):
            expected = float(mpmath.acosh(mpmath.cosh(1)))
        assert expected == pytest.approx(1.0, abs=1e-30)
        assert model_distance(KM1, x, y) == pytest.approx(expected, abs=1e-12)

    def test_scaled_curvature(self):
        x = ModelPoint("sphere", [1, 0, 0])
        y = ModelPoint("sphere", [0, 1, 0])
        assert model_distance(CurvatureParam(4.0), x, y) == pytest.approx(math.pi / 4, abs=1e-12)

    def test_mismatched_kinds_rejected(self):
        with pytest.raises(InvalidInputError):
            model_distance(K0, euclidean_point(0, 0), ModelPoint("sphere", [1, 0, 0]))
        with pytest.raises(InvalidInputError):
            model_distance(K1, euclidean_point(0, 0), euclidean_point(1, 0))
        with pytest.raises(InvalidInputError):
            model_distance(K0, euclidean_point(0, 0), euclidean_point(1, 0, 0))

    @pytest.mark.parametrize("k", [K0, K1, KM1])
    def test_metric_axioms_sampled(self, k):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            x, y, z = (rand_point(k, rng) for _ in range(3))
            dxy = model_distance(k, x, y)
            assert dxy == model_distance(k, y, x)  # symmetry exact
            assert dxy >= 0.0
            assert dxy <= model_distance(k, x, z) + model_distance(k, z, y) + 1e-9
        p = rand_point(k, rng)
        assert model_distance(k, p, p) == pytest.approx(0.0, abs=1e-9)

    def test_positive_k_bounded_by_d_cap(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            assert model_distance(K1, rand_point(K1, rng), rand_point(K1, rng)) <= K1.d_cap


class TestGeodesicPoint:
    def test_euclidean_midpoint(self):
        m = geodesic_point(K0, euclidean_point(0, 0), euclidean_point(2, 0), 0.5)
        assert np.allclose(m.coords, [1.0, 0.0], atol=1e-12)

    def test_sphere_half_angle(self):
        x = ModelPoint("sphere", [1, 0, 0])
        y = sphere_point([math.cos(0.3), math.sin(0.3), 0.0])
        m = geodesic_point(K1, x, y, 0.5)
        assert model_distance(K1, x, m) == pytest.approx(0.15, abs=1e-12)

    def test_hyperboloid_quarter_point(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            x, y = rand_point(KM1, rng), rand_point(KM1, rng)
            g = geodesic_point(KM1, x, y, 0.25)
            assert model_distance(KM1, x, g) == pytest.approx(
                0.25 * model_distance(KM1, x, y), abs=1e-9
            )

    @pytest.mark.parametrize("k", [K0, K1, KM1])
    def test_endpoints_and_isometric_embedding(self, k):
        rng = np.random.default_rng(5)
        for _ in range(200):
            x, y = rand_point(k, rng), rand_point(k, rng)
            if k.k > 0 and model_distance(k, x, y) >= k.d_cap - 1e-9:
                continue
            assert model_distance(k, geodesic_point(k, x, y, 0.0), x) <= 1e-9
            assert model_distance(k, geodesic_point(k, x, y, 1.0), y) <= 1e-9
            t, t2 = sorted(rng.uniform(0, 1, size=2))
            d = model_distance(k, x, y)
            g, g2 = geodesic_point(k, x, y, t), geodesic_point(k, x, y, t2)
            assert model_distance(k, g, g2) == pytest.approx((t2 - t) * d, abs=1e-9)

    def test_antipodal_rejected(self):
        x = ModelPoint("sphere", [1, 0, 0])
        y = ModelPoint("sphere", [-1, 0, 0])
        with pytest.raises(NoUniqueGeodesicError):
            geodesic_point(K1, x, y, 0.5)

    def test_t_out_of_range(self):
        with pytest.raises(InvalidInputError):
            geodesic_point(K0, euclidean_point(0, 0), euclidean_point(1, 0), 1.5)


class TestLawOfCosines:
    def test_pythagoras(self):
        assert law_of_cosines(K0, 3.0, 4.0, math.pi / 2) == pytest.approx(5.0, abs=1e-12)

    def test_degenerate_spherical(self):
        assert law_of_cosines(K1, math.pi / 4, math.pi / 4, 0.0) == pytest.approx(0.0, abs=1e-9)

    def test_hyperbolic_right_angle(self):
        # a = arccosh(cosh^2 1); 50-digit oracle plus small-curvature sanity
        with mpmath.workdps(50):
            expected = float(mpmath.acosh(mpmath.cosh(1) ** 2))
        got = law_of_cosines(KM1, 1.0, 1.0, math.pi / 2)
        assert got == pytest.approx(expected, abs=1e-12)
        # hyperbolic hypotenuse exceeds the euclidean one
        assert got > math.sqrt(2.0)
        # the same triangle at curvature -1e-8 is euclidean to ~1e-8
        tiny = law_of_cosines(CurvatureParam(-1e-8), 1.0, 1.0, math.pi / 2)
        assert tiny == pytest.approx(math.sqrt(2.0), abs=1e-6)

    @pytest.mark.parametrize("k", [1e-4, -1e-4, 1e-6, -1e-6])
    def test_small_curvature_limit(self, k):
        rng = np.random.default_rng(13)
        for _ in range(100):
            b, c = rng.uniform(0, 1, size=2)
            alpha = rng.uniform(0, math.pi)
            assert law_of_cosines(CurvatureParam(k), b, c, alpha) == pytest.approx(
                law_of_cosines(K0, b, c, alpha), abs=1e-3
            )

    def test_angle_out_of_range(self):
        with pytest.raises(InvalidInputError):
            law_of_cosines(K0, 1.0, 1.0, -0.1)
        with pytest.raises(InvalidInputError):
            law_of_cosines(K0, 1.0, 1.0, math.pi + 0.1)


class TestComparisonTriangle:
    def test_345_planar_placement(self):
        # planar coordinates solved from side lengths: third vertex at
        # x = (b^2 + c^2 - a^2) / (2c), y = sqrt(b^2 - x^2)
        a, b, c = 3.0, 4.0, 5.0
        x3 = (b * b + c * c - a * a) / (2 * c)
        y3 = math.sqrt(b * b - x3 * x3)
        assert (x3, y3) == pytest.approx((16.0 / 5.0, 12.0 / 5.0), abs=1e-14)
        tri = comparison_triangle(K0, a, b, c)
        v0, v1, v2 = tri.vertices
        assert np.allclose(v0.coords, [0, 0], atol=1e-12)
        assert np.allclose(v1.coords, [5, 0], atol=1e-12)
        assert np.allclose(v2.coords, [x3, y3], atol=1e-9)

    def test_equilateral(self):
        tri = comparison_triangle(K0, 1.0, 1.0, 1.0)
        v0, v1, v2 = tri.vertices
        for p, q in [(v0, v1), (v1, v2), (v0, v2)]:
            assert model_distance(K0, p, q) == pytest.approx(1.0, abs=1e-9)

    def test_spherical_equilateral(self):
        tri = comparison_triangle(K1, 0.2, 0.2, 0.2)
        v0, v1, v2 = tri.vertices
        for p, q in [(v0, v1), (v1, v2), (v0, v2)]:
            assert model_distance(K1, p, q) == pytest.approx(0.2, abs=1e-9)

    @pytest.mark.parametrize("k", [K0, K1, KM1])
    def test_side_lengths_reproduced(self, k):
        rng = np.random.default_rng(17)
        count = 0
        while count < 100:
            x, y, z = (rand_point(k, rng) for _ in range(3))
            a = model_distance(k, y, z)
            b = model_distance(k, x, z)
            c = model_distance(k, x, y)
            if a + b + c >= 2 * k.d_cap or min(a, b, c) < 1e-6:
                continue
            count += 1
            tri = comparison_triangle(k, a, b, c)
            v0, v1, v2 = tri.vertices
            assert model_distance(k, v0, v1) == pytest.approx(c, abs=1e-9)
            assert model_distance(k, v0, v2) == pytest.approx(b, abs=1e-9)
            assert model_distance(k, v1, v2) == pytest.approx(a, abs=1e-9)

    def test_triangle_inequality_violation(self):
        with pytest.raises(InfeasibleTriangleError):
            comparison_triangle(K0, 10.0, 1.0, 1.0)

    def test_perimeter_cap(self):
        with pytest.raises(InfeasibleTriangleError):
            comparison_triangle(K1, 2.5, 2.5, 2.0)  # perimeter 7 > 2*pi


class TestComparisonPoint:
    def test_side_endpoints(self):
        tri = comparison_triangle(K0, 3.0, 4.0, 5.0)
        assert comparison_point(tri, "xy", 0.0) == tri.vertices[0]
        p = comparison_point(tri, "xy", 5.0)
        assert np.allclose(p.coords, tri.vertices[1].coords, atol=1e-12)

    def test_side_midpoint_is_geodesic_midpoint(self):
        tri = comparison_triangle(K0, 3.0, 4.0, 5.0)
        mid = comparison_point(tri, "xy", 2.5)
        expected = geodesic_point(K0, tri.vertices[0], tri.vertices[1], 0.5)
        assert np.allclose(mid.coords, expected.coords, atol=1e-12)

    def test_out_of_range(self):
        tri = comparison_triangle(K0, 3.0, 4.0, 5.0)
        with pytest.raises(InvalidInputError):
            comparison_point(tri, "xy", 5.5)
        with pytest.raises(InvalidInputError):
            comparison_point(tri, "zz", 1.0)

    @pytest.mark.parametrize("k", [K0, K1, KM1])
    def test_model_spaces_achieve_cat_equality(self, k):
        # model spaces are their own comparison triangles: comparison distances
        # reproduce the original ones exactly (within 1e-9)
        rng = np.random.default_rng(23)
        count = 0
        while count < 50:
            x, y, z = (rand_point(k, rng) for _ in range(3))
            a, b, c = (
                model_distance(k, y, z),
                model_distance(k, x, z),
                model_distance(k, x, y),
            )
            if a + b + c >= 2 * k.d_cap or min(a, b, c) < 1e-6:
                continue
            count += 1
            tri = comparison_triangle(k, a, b, c)
            s1, s2 = rng.uniform(0, c), rng.uniform(0, b)
            p = geodesic_point(k, x, y, s1 / c)
            q = geodesic_point(k, x, z, s2 / b)
            pb = comparison_point(tri, "xy", s1)
            qb = comparison_point(tri, "xz", s2)
            assert model_distance(k, p, q) == pytest.approx(
                model_distance(k, pb, qb), abs=1e-9
            )


def projection_gap_oracle(k: CurvatureParam, r: float, s: float, n: int = 700) -> float:
    """Dense-grid oracle for the projection gap using explicitly embedded points
    and model_distance (independent of the law-of-cosines route)."""
    z = _polar(k, s, 0.0)
    y = _polar(k, r, 0.0)
    best = math.inf
    for rho in np.linspace(0.0, r, n):
        for theta in np.linspace(0.0, math.pi, n // 2):
            w = _polar(k, rho, theta)
            best = min(best, model_distance(k, w, z) - model_distance(k, w, y))
    return best


def _polar(k: CurvatureParam, dist: float, angle: float) -> ModelPoint:
    ca, sa = math.cos(angle), math.sin(angle)
    if k.k == 0:
        return euclidean_point(dist * ca, dist * sa)
    if k.k > 0:
        th = math.sqrt(k.k) * dist
        return sphere_point([math.cos(th), math.sin(th) * ca, math.sin(th) * sa])
    th = math.sqrt(-k.k) * dist
    return hyperboloid_point([math.sinh(th) * ca, math.sinh(th) * sa, math.cosh(th)])


class TestMinProjectionGap:
    # regression baselines computed with projection_gap_oracle(n=700)
    CASES = [
        (K0, 1.0, 2.0),
        (K0, 0.1, 10.0),
        (K1, 0.3, 0.9),
        (KM1, 1.0, 2.0),
    ]

    @pytest.mark.parametrize("k,r,s", CASES)
    def test_positive_and_matches_oracle(self, k, r, s):
        got = min_projection_gap(k, r, s)
        assert got > 0.0
        oracle = projection_gap_oracle(k, r, s, n=240)
        assert got == pytest.approx(oracle, abs=5e-3)
        assert got <= oracle + 1e-12  # finer scan can only go lower

    def test_regression_baselines(self):
        # frozen from projection_gap_oracle at n=900; ~3 significant digits
        assert min_projection_gap(K0, 1.0, 2.0) == pytest.approx(0.7071081, abs=2e-3)
        assert min_projection_gap(K0, 0.1, 10.0) == pytest.approx(9.8503757, abs=2e-3)
        assert min_projection_gap(K1, 0.3, 0.9) == pytest.approx(0.4832813, abs=2e-3)

    def test_invalid_ranges(self):
        with pytest.raises(InvalidInputError):
            min_projection_gap(K0, 2.0, 1.0)
        with pytest.raises(InvalidInputError):
            min_projection_gap(K1, 0.5, math.pi / 2)


class TestShorterViaProjection:
    """Sampled check: with y on the segment from x to z at radius r < d(x,z),
    every w in the closed r-ball about x satisfies d(y,w) < d(z,w)."""

    @pytest.mark.parametrize("k", [K0, K1, KM1])
    def test_sampled(self, k):
        rng = np.random.default_rng(29)
        cap = k.d_cap / 2.0
        for _ in range(300):
            s = rng.uniform(0.2, min(cap, 4.0) * 0.95)
            r = rng.uniform(0.05, 0.9) * s
            rho = rng.uniform(0.0, r)
            theta = rng.uniform(0.0, math.pi)
            x = base_point(k)
            z = _polar(k, s, 0.0)
            y = _polar(k, r, 0.0)
            w = _polar(k, rho, theta)
            assert model_distance(k, x, y) == pytest.approx(r, abs=1e-9)
            assert model_distance(k, y, w) < model_distance(k, z, w)


class TestNumericGuards:
    def test_hyperboloid_constructor_guard(self):
        with pytest.raises(InvalidInputError):
            hyperboloid_point([1.0, 0.0, 0.5])  # spacelike

    def test_minkowski_inner(self):
        assert minkowski_inner(np.array([1.0, 2.0, 3.0]), np.array([4.0, 5.0, 6.0])) == pytest.approx(
            1 * 4 + 2 * 5 - 3 * 6, abs=1e-15
        )

    def test_clamp_rejects_gross_violation(self):
        from catbary.geometry import _checked_clip

        with pytest.raises(NumericDomainError):
            _checked_clip(1.0 + 1e-6, -1.0, 1.0)
        assert _checked_clip(1.0 + 1e-13, -1.0, 1.0) == 1.0
