"""Tests for branch specifications, dial schemes and branched builds."""

import math

import pytest

from src.cp_branching.core.branching import (
    annihilate_holonomy,
    build_branched,
    continuity_sweep,
    interstice_center,
    schwarz_ratios,
    shifted_params,
    shifted_spec_from_point,
    singular_params,
    symmetric_family,
    traditional_spec,
)
from src.cp_branching.core.complex import build_complex
from src.cp_branching.core.error_handling import (
    NoReflection,
    NoSignChange,
    PointOutsideCircle,
    PointOutsideInterstice,
    StarViolation,
)
from src.cp_branching.core.geometry import INF
from src.cp_branching.core.layout import boundary_winding, develop
from src.cp_branching.core.solver import OverlapMap, max_label
from src.cp_branching.models.schemas import ShiftedSpec, SingularSpec, TraditionalSpec
from src.cp_branching.workbench.generators import annulus, disc


def max_packing(K):
    R, _ = max_label(K, tol=1e-11)
    return develop(K, R, OverlapMap())


class TestTraditionalSpec:
    """Test raised angle sums."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = disc(2).complex

    def test_simple_branch_point(self):
        spec = traditional_spec(self.K, 1)
        assert spec.target == pytest.approx(4.0 * math.pi)

    def test_order_limited_by_petals(self):
        """Six petals leave no room for a second order."""
        with pytest.raises(StarViolation):
            traditional_spec(self.K, 1, order=2)

    def test_boundary_vertex(self):
        with pytest.raises(StarViolation):
            traditional_spec(self.K, self.K.boundary_vertices[0])


class TestSingularParams:
    """Test dials from a point in an interstice."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = disc(2).complex
        self.P = max_packing(self.K)
        self.face = self.K.faces_at(1)[0]

    def test_center_gives_equal_dials(self):
        p = interstice_center(self.P, self.face)
        gammas = singular_params(self.P, self.face, p)

        for gamma in gammas:
            assert gamma == pytest.approx(math.pi / 3, abs=1e-9)

    def test_dials_partition_pi(self):
        """Moving toward v1 shrinks its dial."""
        p = interstice_center(self.P, self.face)
        circle = self.P.circles[self.face[0]]
        nudged = p + 1e-3 * circle.e_radius * (circle.e_center - p) / abs(circle.e_center - p)
        gammas = singular_params(self.P, self.face, nudged)

        assert sum(gammas) == pytest.approx(math.pi)
        assert all(0.0 < g < math.pi for g in gammas)
        assert gammas[0] < math.pi / 3

    def test_point_inside_a_circle(self):
        with pytest.raises(PointOutsideInterstice):
            singular_params(self.P, self.face, self.P.circles[1].e_center)


class TestShiftedParams:
    """Test dials from a point inside a circle."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = disc(2).complex
        self.P = max_packing(self.K)
        self.circle = self.P.circles[1]

    def test_jumps_are_valid(self):
        p = self.circle.e_center + 0.4 * self.circle.e_radius * complex(math.cos(0.3), math.sin(0.3))
        j1, j2, g1, g2 = shifted_params(self.K, self.P, 1, p)
        petals = self.K.flower(1).petals
        a, b = petals.index(j1), petals.index(j2)

        assert (b - a) % len(petals) not in (0, 1, len(petals) - 1)
        assert 0.0 <= g1 <= math.pi
        assert 0.0 <= g2 <= math.pi

    def test_spec_from_point(self):
        p = self.circle.e_center + 0.3 * self.circle.e_radius * 1j
        spec = shifted_spec_from_point(self.K, self.P, 1, p)

        assert spec.vertex == 1
        assert spec.jumps[0] != spec.jumps[1]

    def test_point_outside_circle(self):
        p = self.circle.e_center + 2.0 * self.circle.e_radius
        with pytest.raises(PointOutsideCircle):
            shifted_params(self.K, self.P, 1, p)


class TestShiftedSpec:
    """Test shifted spec helpers."""

    def setup_method(self):
        """Setup test fixtures."""
        self.generated = annulus(5, 12)
        self.K = self.generated.complex
        self.v2 = self.generated.named["v2"]
        self.reflection = self.generated.symmetries["reflection"].mapping

    def test_symmetric_family_pairs_jumps_by_reflection(self):
        petals = self.K.flower(self.v2).petals
        spec = symmetric_family(self.K, self.v2, 0.7)
        j1, j2 = spec.jumps
        w1 = petals[petals.index(j1) - 1]
        w2 = petals[petals.index(j2) - 1]

        assert spec.jumps == (petals[1], petals[4])
        assert self.reflection[j1] == w2
        assert self.reflection[j2] == w1
        assert spec.gamma1 + spec.gamma2 == pytest.approx(math.pi)

    def test_symmetric_family_explicit_reflection(self):
        spec = symmetric_family(self.K, self.v2, 0.7, self.reflection)
        assert spec == symmetric_family(self.K, self.v2, 0.7)

    def test_symmetric_family_needs_reflection(self):
        with pytest.raises(NoReflection):
            symmetric_family(disc(2).complex, 1, 0.7)

    def test_symmetric_family_rejects_rotation(self):
        generated = disc(2)
        rotation = generated.symmetries["rotation"].mapping
        with pytest.raises(NoReflection):
            symmetric_family(generated.complex, 1, 0.7, rotation)

    def test_symmetric_family_needs_six_petals(self):
        rim = list(range(2, 7))
        K = build_complex([(1, rim[k], rim[(k + 1) % 5]) for k in range(5)])
        with pytest.raises(StarViolation):
            symmetric_family(K, 1, 0.7)

    def test_canonical_moves_full_dial(self):
        petals = (2, 3, 4, 5, 6, 7)
        spec = ShiftedSpec(vertex=1, jumps=(2, 5), gamma1=math.pi, gamma2=0.4)
        canonical = spec.canonical(petals)

        assert canonical.jumps == (7, 5)
        assert canonical.gamma1 == 0.0
        assert canonical.gamma2 == 0.4

    def test_canonical_keeps_adjacent_result(self):
        petals = (2, 3, 4, 5, 6, 7)
        spec = ShiftedSpec(vertex=1, jumps=(2, 4), gamma1=0.5, gamma2=math.pi)
        assert spec.canonical(petals) == spec

    @pytest.mark.slow
    def test_symmetric_build_is_reflection_invariant(self):
        v1 = self.generated.named["v1"]
        specs = [traditional_spec(self.K, v1), symmetric_family(self.K, self.v2, 1.0)]
        result = build_branched(self.K, specs, layout=False, tol=1e-10)

        for v, r in result.label.items():
            if v in self.reflection and r < INF:
                assert result.label[self.reflection[v]] == pytest.approx(r, abs=1e-7)
        h1, h2 = result.records[0].chaperones
        assert result.label[h1] == pytest.approx(result.label[h2], abs=1e-7)


class TestBranchedBuilds:
    """Test surgery, solve and layout together."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = disc(3).complex
        self.petals = self.K.flower(1).petals
        self.shifted = ShiftedSpec(
            vertex=1, jumps=(self.petals[0], self.petals[3]), gamma1=0.7 * math.pi, gamma2=0.4 * math.pi
        )

    def singular_spec(self, **kwargs):
        P = max_packing(self.K)
        face = self.K.faces_at(1)[0]
        gammas = singular_params(P, face, interstice_center(P, face))
        return SingularSpec.from_gammas(face, gammas, **kwargs)

    def test_traditional_build(self):
        result = build_branched(self.K, [TraditionalSpec(vertex=1)])

        assert result.diagnostics["star_star"] is True
        assert result.diagnostics["angle_sums"][1] == pytest.approx(4.0 * math.pi, abs=1e-7)
        assert result.pinned == []
        cycle = result.complex.boundary_cycles[0]
        assert boundary_winding(result.packing, cycle, about=result.packing.center(1)) == 2

    @pytest.mark.slow
    def test_singular_build(self):
        result = build_branched(self.K, [self.singular_spec()])

        record = result.records[0]
        assert result.label[record.fall_guy] == 0.0
        assert result.pinned == [record.fall_guy]
        assert result.complex.vertex_count == self.K.vertex_count + 4
        hole = result.diagnostics["holes"][0]
        assert hole["kind"] == "singular"
        assert hole["horizon_winding"] == 2
        about = result.packing.circles[record.fall_guy].e_center
        assert boundary_winding(result.packing, result.complex.boundary_cycles[0], about=about) == 2

    @pytest.mark.slow
    def test_singular_build_keeps_tangencies(self):
        result = build_branched(self.K, [self.singular_spec()], tol=1e-11)
        fall_guy = result.records[0].fall_guy

        for a, b in result.complex.edges:
            if fall_guy in (a, b) or result.overlaps(a, b) != 0.0:
                continue
            ca, cb = result.packing.circles[a], result.packing.circles[b]
            gap = abs(abs(ca.e_center - cb.e_center) - ca.e_radius - cb.e_radius)
            assert gap < 1e-8, (a, b)

    @pytest.mark.slow
    def test_unbranched_hole_winds_once(self):
        result = build_branched(self.K, [self.singular_spec(unbranched=True)])

        assert result.pinned == []
        assert result.diagnostics["holes"][0]["horizon_winding"] == 1

    @pytest.mark.slow
    def test_shifted_build(self):
        result = build_branched(self.K, [self.shifted])

        record = result.records[0]
        hole = result.diagnostics["holes"][0]
        assert result.label[record.fall_guy] == 0.0
        assert all(r > 0.0 for r in hole["twin_radii"])
        assert hole["horizon_winding"] == 2

    @pytest.mark.slow
    def test_shifted_fall_guy_is_concurrent(self):
        """Twins, chaperones and fall guy meet at the branch value."""
        result = build_branched(self.K, [self.shifted], tol=1e-11)
        record = result.records[0]
        value = result.packing.circles[record.fall_guy].e_center

        assert result.diagnostics["holes"][0]["concurrency"] < 1e-8
        for v in (*record.twins, *record.chaperones):
            circle = result.packing.circles[v]
            assert abs(abs(value - circle.e_center) - circle.e_radius) < 1e-8

    @pytest.mark.slow
    def test_shifted_at_center_matches_traditional(self):
        P = max_packing(self.K)
        spec = shifted_spec_from_point(self.K, P, 1, P.circles[1].e_center)
        shifted = build_branched(self.K, [spec], layout=False, tol=1e-11)
        traditional = build_branched(self.K, [TraditionalSpec(vertex=1)], layout=False, tol=1e-11)
        horizon = {1, *self.petals}

        for v in range(1, self.K.vertex_count + 1):
            r = traditional.label[v]
            if v not in horizon and r < INF:
                assert shifted.label[v] == pytest.approx(r, abs=1e-6)
        t1, t2 = shifted.records[0].twins
        assert shifted.label[t1] == pytest.approx(shifted.label[t2], abs=1e-6)

    @pytest.mark.slow
    def test_full_dial_equals_zero_dial_at_preceding_petal(self):
        full = ShiftedSpec(vertex=1, jumps=(self.petals[0], self.petals[3]), gamma1=math.pi, gamma2=0.4 * math.pi)
        moved = ShiftedSpec(vertex=1, jumps=(self.petals[5], self.petals[3]), gamma1=0.0, gamma2=0.4 * math.pi)
        a = build_branched(self.K, [full], tol=1e-11).packing
        b = build_branched(self.K, [moved], tol=1e-11).packing

        assert set(a.circles) == set(b.circles)
        for v, circle in a.circles.items():
            assert abs(circle.e_center - b.circles[v].e_center) < 1e-8
            assert circle.e_radius == pytest.approx(b.circles[v].e_radius, abs=1e-8)

    @pytest.mark.slow
    def test_continuity_sweep(self):
        rows = continuity_sweep(self.K, self.singular_spec(), deltas=(1e-1, 1e-3))

        assert [row["delta"] for row in rows] == [1e-1, 1e-3]
        assert rows[1]["change"] < rows[0]["change"]

    @pytest.mark.slow
    def test_shifted_continuity_sweep(self):
        rows = continuity_sweep(self.K, self.shifted, tol=1e-11)
        changes = [row["change"] for row in rows]

        assert [row["delta"] for row in rows] == [1e-1, 1e-2, 1e-3, 1e-4]
        assert all(later < earlier for earlier, later in zip(changes, changes[1:]))
        assert changes[-1] < 1e-2


class TestHolonomySearch:
    """Test scan bookkeeping of the holonomy search."""

    def test_all_samples_failed(self):
        generated = annulus(3, 12)
        with pytest.raises(NoSignChange) as exc_info:
            annihilate_holonomy(
                generated.complex,
                [],
                generated.named["v2"],
                samples=5,
                mapper=lambda fn, params: [None] * len(params),
            )

        scan = exc_info.value.context["scan"]
        assert len(scan) == 5
        assert all(row["status"] == "failed" for row in scan)


class TestSchwarzRatios:
    """Test radius ratios."""

    def test_ratios_skip_degenerate_radii(self):
        domain = {1: 2.0, 2: INF, 3: 0.0, 4: 1.0}
        image = {1: 1.0, 2: INF, 3: 0.0, 4: INF}
        assert schwarz_ratios(domain, image) == {1: 0.5}


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
