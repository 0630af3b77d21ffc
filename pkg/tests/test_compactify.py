import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagflow.compactify import (
    ChartPoint,
    PolyField3,
    SearchConfig,
    ball_projection,
    ball_unprojection,
    best_chart,
    chart_coords,
    chart_equator_roots,
    chart_point_to_sphere,
    classify_equilibrium,
    compactified_field,
    compactified_field_array,
    compactified_jacobian,
    find_infinity_equilibria,
    model_poly_field,
    sphere_from_ambient,
)
from flagflow.model import invariant_directions, invariant_ray_parameter, poly_rhs

T = invariant_ray_parameter()


@pytest.fixture(scope="module")
def field():
    return model_poly_field()


@pytest.fixture(scope="module")
def census(field):
    return find_infinity_equilibria(field)


class TestBallProjection:
    def test_origin_fixed(self):
        assert ball_projection((0.0, 0.0, 0.0)) == pytest.approx((0, 0, 0), abs=0)

    def test_round_point(self):
        # Delta = sqrt(1+3) = 2
        assert ball_projection((1.0, 1.0, 1.0)) == pytest.approx((0.5, 0.5, 0.5), abs=1e-15)

    def test_limits_to_unit_sphere(self):
        u = ball_projection((1e6, 0.0, 0.0))
        assert u[0] > 0.999999
        assert np.linalg.norm(u) < 1.0

    def test_unprojection_inverts(self):
        assert ball_unprojection((0.5, 0.5, 0.5)) == pytest.approx((1, 1, 1), abs=1e-12)
        assert ball_unprojection((0.0, 0.0, 0.0)) == pytest.approx((0, 0, 0), abs=0)

    def test_unprojection_domain(self):
        with pytest.raises(ValueError):
            ball_unprojection((1.0, 0.0, 0.0))
        with pytest.raises(ValueError):
            ball_unprojection((0.8, 0.8, 0.0))

    @given(st.tuples(*[st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)] * 3))
    @settings(deadline=None)
    def test_roundtrip(self, x):
        x = np.asarray(x)
        back = ball_unprojection(ball_projection(x))
        assert np.linalg.norm(back - x) <= 1e-9 * (1.0 + np.linalg.norm(x))


class TestCharts:
    def test_chart_coords_round_direction(self):
        y = np.array([1.0, 1.0, 1.0, 0.0]) / math.sqrt(3.0)
        p = chart_coords(y, 1)
        assert (p.z1, p.z2, p.z3) == pytest.approx((1.0, 1.0, 0.0), abs=1e-15)

    def test_chart_center(self):
        p = chart_coords(np.array([1.0, 0.0, 0.0, 0.0]), 1)
        assert (p.z1, p.z2, p.z3) == (0.0, 0.0, 0.0)

    def test_outside_domain(self):
        with pytest.raises(ValueError):
            chart_coords(np.array([0.0, 1.0, 0.0, 0.0]), 1)

    @pytest.mark.parametrize("chart", [1, 2, 3])
    def test_roundtrip_on_sphere(self, chart):
        rng = np.random.default_rng(99)
        for _ in range(50):
            y = rng.normal(size=4)
            y /= np.linalg.norm(y)
            if abs(y[chart - 1]) < 0.1:
                continue
            if y[chart - 1] < 0:
                y = -y  # chart encodes the slot-positive representative
            p = chart_coords(y, chart)
            assert chart_point_to_sphere(p) == pytest.approx(y, abs=1e-12)

    def test_best_chart(self):
        assert best_chart(sphere_from_ambient((10.0, 1.0, 1.0))) == 1
        assert best_chart(sphere_from_ambient((1.0, 1.0, 12.0))) == 3

    def test_invalid_chart_index(self):
        with pytest.raises(ValueError):
            chart_coords(np.array([1.0, 0.0, 0.0, 0.0]), 4)


def reference_chart_field(z1, z2, z3):
    """Independent brute-force evaluation of the chart-1 compactified field.

    Written straight from the chart formula with P evaluated at (1, z1, z2),
    bypassing the library's dispatch entirely.
    """
    p = poly_rhs(np.array([1.0, z1, z2]))
    return np.array([-z1 * p[0] + p[1], -z2 * p[0] + p[2], -z3 * p[0]])


class TestCompactifiedField:
    def test_vanishes_at_diagonal_equator_point(self, field):
        g = compactified_field(field, ChartPoint(1, 1.0, 1.0, 0.0))
        assert g == pytest.approx((0.0, 0.0, 0.0), abs=1e-13)

    def test_vanishes_at_ray_equator_point(self, field):
        g = compactified_field(field, ChartPoint(1, T, 1.0, 0.0))
        assert g == pytest.approx((0.0, 0.0, 0.0), abs=1e-12)

    def test_chart_center_value(self, field):
        # P(1,0,0) = (1,-1,-1), so the chart field is (-1,-1,0); checked
        # against the brute-force evaluator before freezing
        g = compactified_field(field, ChartPoint(1, 0.0, 0.0, 0.0))
        assert g == pytest.approx(reference_chart_field(0.0, 0.0, 0.0), abs=0)
        assert g == pytest.approx((-1.0, -1.0, 0.0), abs=1e-15)

    def test_matches_reference_everywhere(self, field):
        rng = np.random.default_rng(7)
        for _ in range(200):
            z = rng.uniform(-3, 3, size=3)
            g = compactified_field_array(field, 1, z)
            assert g == pytest.approx(reference_chart_field(*z), rel=1e-12, abs=1e-12)

    def test_equator_invariant(self, field):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            z1, z2 = rng.uniform(-8, 8, size=2)
            g = compactified_field_array(field, 1, (z1, z2, 0.0))
            assert g[2] == 0.0

    def test_interior_pushforward_consistency(self, field):
        # the chart flow is a positive time-rescaling of the ambient flow:
        # push the chart velocity to R^3 by finite differences of the chart
        # map and compare directions against poly_rhs
        rng = np.random.default_rng(2024)
        for _ in range(50):
            z = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.1, 1.0)])
            x = np.array([1.0, z[0], z[1]]) / z[2]
            g = compactified_field_array(field, 1, z)
            h = 1e-7

            def ambient_of(zz):
                return np.array([1.0, zz[0], zz[1]]) / zz[2]

            push = np.zeros(3)
            for j in range(3):
                zp = z.copy(); zp[j] += h
                zm = z.copy(); zm[j] -= h
                push += g[j] * (ambient_of(zp) - ambient_of(zm)) / (2 * h)
            v = poly_rhs(x)
            factor = float(push @ v) / float(v @ v)
            assert factor > 0.0
            assert push == pytest.approx(factor * v, rel=1e-5, abs=1e-6)


class TestCompactifiedJacobian:
    @pytest.mark.parametrize("z", [(1.0, 1.0, 0.0), (T, 1.0, 0.0), (0.3, -1.4, 0.8),
                                   (1.0, 1.0, 0.5)])
    def test_matches_finite_differences(self, field, z):
        J = compactified_jacobian(field, 1, z)
        fd = np.empty((3, 3))
        h = 1e-6
        for j in range(3):
            zp = np.array(z); zp[j] += h
            zm = np.array(z); zm[j] -= h
            fd[:, j] = (compactified_field_array(field, 1, zp)
                        - compactified_field_array(field, 1, zm)) / (2 * h)
        assert J == pytest.approx(fd, rel=1e-6, abs=1e-6)

    def test_known_spectrum_at_diagonal(self, field):
        eig = np.sort(np.linalg.eigvals(compactified_jacobian(field, 1, (1.0, 1.0, 0.0))).real)
        assert eig == pytest.approx([-7.0, -7.0, -5.0], abs=1e-12)

    def test_generic_field_dispatch_agrees(self, field):
        # route the same quadratic field through the non-homogeneous code
        # path and compare both value and Jacobian
        from flagflow.model import poly_jacobian
        generic = PolyField3(func=poly_rhs, jac=poly_jacobian, degree=2, homogeneous=False)
        for z in [(1.0, 1.0, 0.0), (T, 1.0, 0.0), (0.3, -1.4, 0.8), (2.0, -0.5, 0.0)]:
            assert compactified_field_array(generic, 1, z) == pytest.approx(
                compactified_field_array(field, 1, z), rel=1e-12, abs=1e-10)
            assert compactified_jacobian(generic, 1, z) == pytest.approx(
                compactified_jacobian(field, 1, z), rel=1e-9, abs=1e-8)


class TestEquatorCensus:
    def test_seven_roots_per_chart(self, field):
        for chart in (1, 2, 3):
            assert len(chart_equator_roots(field, chart)) == 7

    def test_ten_distinct_equilibria(self, census):
        assert len(census) == 10

    def test_four_in_first_octant(self, census):
        octant = [e for e in census if e.first_octant]
        assert len(octant) == 4
        expected = invariant_directions()
        for d in expected:
            dist = min(np.linalg.norm(e.direction - d) for e in octant)
            assert dist <= 1e-6

    def test_residuals_polished(self, census, field):
        for e in census:
            assert e.residual(field) < 1e-12

    def test_octant_classification(self, census):
        # the diagonal point attracts; the three ray points are saddles
        by_dir = {}
        for e in census:
            if e.first_octant:
                by_dir[tuple(np.round(e.direction, 4))] = e.stability
        diag = tuple(np.round(np.ones(3) / math.sqrt(3), 4))
        assert by_dir.pop(diag) == "attractor"
        assert set(by_dir.values()) == {"saddle"}

    def test_eigenvalues_hyperbolic(self, census):
        for e in census:
            assert np.min(np.abs(e.eigenvalues.real)) > 1e-6

    def test_dedupe_idempotent_under_finer_grid(self, field, census):
        finer = find_infinity_equilibria(field, SearchConfig(grid_resolution=96))
        assert len(finer) == 10
        d1 = sorted(tuple(d) for d in (np.round(e.direction, 12) for e in census))
        d2 = sorted(tuple(d) for d in (np.round(e.direction, 12) for e in finer))
        for a, b in zip(d1, d2):
            assert np.max(np.abs(np.array(a) - np.array(b))) < 1e-8

    def test_chart_compatibility(self, census, field):
        # an equilibrium visible in several charts gets the same stability
        # everywhere, and the eigenvalue sets match up to one positive
        # scalar per chart (the dropped conformal factors differ)
        for e in census:
            for chart in (1, 2, 3):
                if e.direction[chart - 1] <= 1e-9:
                    continue
                y = np.concatenate([e.direction, [0.0]])
                p = chart_coords(y, chart)
                other = classify_equilibrium(field, chart, p.z1, p.z2)
                assert other.stability == e.stability
                a = np.sort(e.eigenvalues.real)
                b = np.sort(other.eigenvalues.real)
                ratio = np.linalg.norm(b) / np.linalg.norm(a)
                assert ratio > 0
                assert b == pytest.approx(ratio * a, rel=1e-8)
                assert np.all(np.sign(b) == np.sign(a))

    def test_nonoctant_points_split_by_antipodal_reversal(self, census):
        # the six mixed-sign points come in antipodal pairs whose spectra
        # are negatives of each other: three repellers, three attractors
        others = [e for e in census if not e.first_octant]
        assert sorted(e.stability for e in others) == (
            ["attractor"] * 3 + ["repeller"] * 3)


class TestSearchConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SearchConfig(grid_resolution=16)
        with pytest.raises(ValueError):
            SearchConfig(seed_box=-1.0)

    def test_polyfield_validation(self):
        with pytest.raises(ValueError):
            PolyField3(func=poly_rhs, jac=None, degree=0)
