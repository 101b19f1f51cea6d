"""Tests for metric kernels, Möbius maps and stereographic projection."""

import math

import numpy as np
import pytest

from src.cp_branching.core.error_handling import (
    BothInfinite,
    DegenerateTriple,
    LemmaHypothesisViolated,
    NegativeRadius,
    SingularMatrix,
    ViolatesStarStar,
)
from src.cp_branching.core.geometry import (
    INF,
    NORTH_HEMISPHERE,
    Circle,
    Geometry,
    MobiusClass,
    MobiusMap,
    SphereCircle,
    circumcircle,
    e_to_h,
    edge_length,
    face_angle,
    from_sphere,
    h_to_e,
    hyp_distance,
    measured_overlap,
    project_circle,
    realize_triple,
    to_sphere,
)

EUC = Geometry.EUCLIDEAN
HYP = Geometry.HYPERBOLIC


class TestEdgeLength:
    """Test center distances from radii and overlaps."""

    def test_euclidean_tangency(self):
        assert edge_length(1.0, 1.0, 0.0, EUC) == pytest.approx(2.0)

    def test_euclidean_internal_tangency(self):
        assert edge_length(1.0, 0.5, math.pi, EUC) == pytest.approx(0.5)

    def test_euclidean_orthogonal(self):
        assert edge_length(3.0, 4.0, math.pi / 2, EUC) == pytest.approx(5.0)

    def test_hyperbolic_tangency_adds_radii(self):
        assert edge_length(0.7, 1.1, 0.0, HYP) == pytest.approx(1.8, abs=1e-12)

    def test_horocycle_edge_is_infinite(self):
        assert edge_length(INF, 1.0, 0.0, HYP) == INF

    def test_two_horocycles(self):
        with pytest.raises(BothInfinite):
            edge_length(INF, INF, 0.0, HYP)

    def test_negative_radius(self):
        with pytest.raises(NegativeRadius):
            edge_length(-1.0, 1.0, 0.0, EUC)


class TestFaceAngle:
    """Test angles at a circle of a triple."""

    def test_equal_radii(self):
        assert face_angle(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, EUC) == pytest.approx(math.pi / 3)

    def test_point_circle_between_tangent_neighbors(self):
        """The neighbors touch at the point, so the angle opens to pi."""
        assert face_angle(0.0, 1.0, 1.0, 0.0, 0.0, 0.0, EUC) == pytest.approx(math.pi)

    def test_zero_radius_is_a_limit(self):
        limit = face_angle(0.0, 1.0, 2.0, 0.3, 0.4, 0.2, EUC)
        nearby = face_angle(1e-8, 1.0, 2.0, 0.3, 0.4, 0.2, EUC)
        assert nearby == pytest.approx(limit, abs=1e-6)

    def test_horocycle_angle_is_zero(self):
        assert face_angle(INF, 1.0, 1.0, 0.0, 0.0, 0.0, HYP) == 0.0

    def test_horocycle_neighbors(self):
        angle = face_angle(1.0, INF, INF, 0.0, 0.0, 0.0, HYP)
        assert 0.0 < angle < math.pi

    def test_two_zero_radii(self):
        with pytest.raises(DegenerateTriple):
            face_angle(0.0, 0.0, 1.0, 0.0, 0.0, 0.0, EUC)

    def test_deep_overlaps_violate_face_bound(self):
        with pytest.raises(ViolatesStarStar):
            face_angle(1.0, 1.0, 1.0, 2.0, 1.0, 0.5, EUC)

    def test_euclidean_triangle_sums_to_pi(self):
        r = (1.0, 2.0, 0.5)
        phi = {(0, 1): 0.3, (1, 2): 0.5, (0, 2): 0.2}

        def ov(i, j):
            return phi[(min(i, j), max(i, j))]

        total = sum(
            face_angle(r[i], r[j], r[k], ov(i, j), ov(i, k), ov(j, k), EUC)
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        )
        assert total == pytest.approx(math.pi, abs=1e-12)

    def test_hyperbolic_triangle_has_defect(self):
        r = (1.0, 2.0, 0.5)
        total = sum(
            face_angle(r[i], r[j], r[k], 0.0, 0.0, 0.0, HYP)
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1))
        )
        assert 0.0 < total < math.pi


class TestRealizeTriple:
    """Test triple realization."""

    def test_unit_tangency(self):
        c0, c1, c2 = realize_triple((1.0, 1.0, 1.0), (0.0, 0.0, 0.0), EUC)

        assert abs(c0.center) < 1e-12
        assert abs(c1.center - 2.0) < 1e-12
        assert abs(c2.center - complex(1.0, math.sqrt(3.0))) < 1e-12

    @pytest.mark.parametrize("geom", [EUC, HYP])
    def test_overlaps_reproduced(self, geom):
        overlaps = (0.3, 0.5, 0.2)
        c0, c1, c2 = realize_triple((1.0, 2.0, 0.5), overlaps, geom)

        for (a, b), phi in zip(((c0, c1), (c1, c2), (c2, c0)), overlaps):
            assert measured_overlap(a, b) == pytest.approx(phi, abs=1e-9)

    def test_positive_orientation(self):
        c0, c1, c2 = realize_triple((1.0, 1.5, 0.7), (0.1, 0.2, 0.3), HYP)
        turn = ((c1.e_center - c0.e_center) * (c2.e_center - c0.e_center).conjugate()).imag
        assert turn < 0.0

    def test_horocycle_member(self):
        c0, c1, c2 = realize_triple((INF, 1.0, 1.0), (0.0, 0.0, 0.0), HYP)

        assert c0.is_horocycle
        assert abs(abs(c0.anchor) - 1.0) < 1e-12
        assert measured_overlap(c1, c2) == pytest.approx(0.0, abs=1e-6)
        assert measured_overlap(c0, c1) == pytest.approx(0.0, abs=1e-6)

    def test_overlap_sum_above_pi(self):
        with pytest.raises(LemmaHypothesisViolated):
            realize_triple((1.0, 1.0, 1.0), (1.2, 1.2, 1.2), EUC)

    def test_two_zero_radii(self):
        with pytest.raises(LemmaHypothesisViolated):
            realize_triple((0.0, 0.0, 1.0), (0.0, 0.0, 0.0), EUC)

    def test_trig_kernel_sample(self):
        """Random triples realize their overlaps to high accuracy."""
        rng = np.random.default_rng(7)
        for geom in (EUC, HYP):
            for _ in range(200):
                radii = rng.uniform(0.05, 3.0, size=3)
                overlaps = rng.uniform(0.0, math.pi / 3.0, size=3)
                c0, c1, c2 = realize_triple(radii, overlaps, geom)
                for (a, b), phi in zip(((c0, c1), (c1, c2), (c2, c0)), overlaps):
                    assert abs(measured_overlap(a, b) - phi) < 1e-6


class TestDiscModel:
    """Test hyperbolic helpers."""

    def test_circle_round_trip(self):
        center, radius = complex(0.3, -0.2), 0.8
        e_center, e_radius = h_to_e(center, radius)
        back_center, back_radius = e_to_h(e_center, e_radius)

        assert abs(back_center - center) < 1e-12
        assert back_radius == pytest.approx(radius, abs=1e-12)

    def test_distance_from_origin(self):
        assert hyp_distance(0j, complex(math.tanh(0.5), 0.0)) == pytest.approx(1.0)

    def test_circumcircle(self):
        center, radius = circumcircle(1 + 0j, 1j, -1 + 0j)
        assert abs(center) < 1e-12
        assert radius == pytest.approx(1.0)


class TestMobiusMap:
    """Test Möbius maps."""

    def test_identity(self):
        m = MobiusMap.identity()
        assert m.classify() == MobiusClass.IDENTITY
        assert abs(m(0.3 + 0.1j) - (0.3 + 0.1j)) < 1e-15

    def test_singular_matrix(self):
        with pytest.raises(SingularMatrix):
            MobiusMap(1, 1, 1, 1)

    def test_inverse(self):
        m = MobiusMap(2, 1j, 0.5, 3)
        z = 0.2 - 0.7j
        assert abs(m.inverse()(m(z)) - z) < 1e-12
        assert (m @ m.inverse()).classify() == MobiusClass.IDENTITY

    def test_points_to_points(self):
        zs = (0j, 1 + 0j, 1j)
        ws = (2 + 0j, -1j, 0.5 + 0.5j)
        m = MobiusMap.points_to_points(zs, ws)
        for z, w in zip(zs, ws):
            assert abs(m(z) - w) < 1e-10

    def test_point_at_infinity(self):
        m = MobiusMap.points_to_01inf(0j, 1 + 0j, 2 + 0j)
        assert m(2 + 0j) == INF
        assert m(0j) == 0j
        assert m(INF) == pytest.approx(-1.0 + 0j)

    def test_disc_translation(self):
        m = MobiusMap.disc_translation(1.3)
        assert m.is_disc_automorphism()
        assert m.classify() == MobiusClass.HYPERBOLIC
        assert m.translation_length() == pytest.approx(1.3, abs=1e-10)
        assert m.displacement(0j) == pytest.approx(1.3, abs=1e-10)

    def test_rotation_is_elliptic(self):
        m = MobiusMap.rotation(0.4)
        assert m.classify() == MobiusClass.ELLIPTIC
        assert m.displacement(0j) == pytest.approx(0.0, abs=1e-12)

    def test_circle_transform_keeps_radius(self):
        circle = Circle.hyperbolic(0.2 + 0.1j, 0.6)
        moved = circle.transformed(MobiusMap.disc_move(-0.3 + 0.4j))
        assert moved.radius == circle.radius
        assert hyp_distance(moved.center, 0j) == pytest.approx(
            hyp_distance(circle.center, 0.3 - 0.4j), abs=1e-10
        )


class TestSphere:
    """Test stereographic projection and caps."""

    def test_round_trip(self):
        z = 0.4 - 1.7j
        assert abs(from_sphere(to_sphere(z)) - z) < 1e-12

    def test_poles(self):
        assert np.allclose(to_sphere(0j), (0.0, 0.0, -1.0))
        assert np.allclose(to_sphere(INF), (0.0, 0.0, 1.0))
        assert from_sphere((0.0, 0.0, 1.0)) == INF

    def test_unit_circle_is_south_hemisphere(self):
        cap = project_circle(0j, 1.0)
        assert np.allclose(cap.center, (0.0, 0.0, -1.0))
        assert cap.radius == pytest.approx(math.pi / 2)
        assert cap.tangency_residual(NORTH_HEMISPHERE) == pytest.approx(0.0, abs=1e-12)

    def test_tangent_plane_circles_stay_tangent(self):
        a = project_circle(0.5 + 0j, 0.5)
        b = project_circle(1.5 + 0j, 0.5)
        assert a.tangency_residual(b) < 1e-10

    def test_transformed_by_identity(self):
        cap = project_circle(0.3 + 0.2j, 0.4)
        same = cap.transformed(MobiusMap.identity())
        assert np.allclose(same.center, cap.center, atol=1e-10)
        assert same.radius == pytest.approx(cap.radius, abs=1e-10)

    def test_transformed_matches_plane_image(self):
        m = MobiusMap(2, 0.5, 0, 1)
        cap = project_circle(0.3 + 0.2j, 0.4)
        center, radius = m.apply_euclidean_circle(0.3 + 0.2j, 0.4)
        expected = project_circle(center, radius)
        moved = cap.transformed(m)
        assert np.allclose(moved.center, expected.center, atol=1e-9)
        assert moved.radius == pytest.approx(expected.radius, abs=1e-9)

    def test_antipodal_caps(self):
        a = SphereCircle((0.0, 0.0, 1.0), 0.3)
        b = SphereCircle((0.0, 0.0, -1.0), 0.3)
        assert a.angle_to(b) == pytest.approx(math.pi)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
