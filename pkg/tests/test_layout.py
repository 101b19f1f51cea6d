"""Tests for layout, holonomy, normalization and windings."""

import math

import pytest

from src.cp_branching.core.complex import build_complex, normalize_face
from src.cp_branching.core.error_handling import NotHorocycle, OpenChain
from src.cp_branching.core.geometry import Circle, Geometry, MobiusClass
from src.cp_branching.core.layout import (
    Packing,
    annulus_modulus,
    boundary_winding,
    check_closure,
    deck_transformation,
    develop,
    generator_loops,
    holonomy,
    normalize_disc,
    normalize_imaginary_axis,
    stereographic_project,
    torus_periods,
)
from src.cp_branching.core.solver import OverlapMap, max_label, solve_label
from src.cp_branching.workbench.generators import annulus, disc, torus

HEX_FACES = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 6, 7), (1, 7, 2)]


def flower_loop(K, v):
    """Face indices around an interior vertex, in flower order."""
    index = {normalize_face(face): i for i, face in enumerate(K.faces)}
    return [index[normalize_face(face)] for face in K.faces_at(v)]


class TestDevelop:
    """Test developing labels into packings."""

    def setup_method(self):
        """Setup test fixtures."""
        generated = disc(2)
        self.generated = generated
        self.K = generated.complex
        self.R, _ = max_label(self.K, tol=1e-11)
        self.P = develop(self.K, self.R, OverlapMap())

    def test_every_vertex_placed(self):
        assert len(self.P) == self.K.vertex_count
        assert len(self.P.face_circles) == self.K.face_count
        assert len(self.P.tree) == self.K.face_count - 1

    def test_closure(self):
        assert check_closure(self.K, self.P, OverlapMap()) < 1e-6

    def test_boundary_horocycles(self):
        for v in self.K.boundary_vertices:
            circle = self.P.circles[v]
            assert circle.is_horocycle
            assert abs(circle.anchor) == pytest.approx(1.0)

    def test_normalize_disc(self):
        gamma = self.K.boundary_vertices[0]
        Q = normalize_disc(self.P, 1, gamma)

        assert abs(Q.center(1)) < 1e-9
        assert abs(Q.circles[gamma].anchor - 1j) < 1e-9
        assert check_closure(self.K, Q, OverlapMap()) < 1e-6

    def test_normalize_disc_needs_horocycle(self):
        with pytest.raises(NotHorocycle):
            normalize_disc(self.P, 1, 2)

    def test_normalize_imaginary_axis(self):
        v1, v2 = self.generated.named["v1"], self.generated.named["v2"]
        Q = normalize_imaginary_axis(self.P, v1, v2)
        z1, z2 = Q.center(v1), Q.center(v2)

        assert abs(z1.real) < 1e-9
        assert z1.imag > 0.0
        assert abs(z1 + z2) < 1e-9

    def test_boundary_winding(self):
        cycle = self.K.boundary_cycles[0]
        assert boundary_winding(self.P, cycle, about=self.P.center(1)) == 1

    def test_euclidean_flower(self):
        K = build_complex(HEX_FACES)
        R, _ = solve_label(K, OverlapMap(), {}, {v: 1.0 for v in K.boundary_vertices}, geom=Geometry.EUCLIDEAN)
        P = develop(K, R, OverlapMap(), Geometry.EUCLIDEAN)

        assert check_closure(K, P, OverlapMap()) < 1e-7
        for v in K.boundary_vertices:
            assert abs(P.center(v) - P.center(1)) == pytest.approx(2.0, abs=1e-7)

    def test_stereographic_equator(self):
        P = Packing(Geometry.EUCLIDEAN, {1: Circle.euclidean(0j, 1.0)})
        cap = stereographic_project(P)[1]

        assert cap.center == pytest.approx((0.0, 0.0, -1.0))
        assert cap.radius == pytest.approx(math.pi / 2.0)

    def test_stereographic_keeps_tangency(self):
        K = build_complex(HEX_FACES)
        R, _ = solve_label(K, OverlapMap(), {}, {v: 1.0 for v in K.boundary_vertices}, geom=Geometry.EUCLIDEAN)
        caps = stereographic_project(develop(K, R, OverlapMap(), Geometry.EUCLIDEAN))

        assert set(caps) == set(K.vertices)
        for u, w in K.edges:
            assert caps[u].tangency_residual(caps[w]) < 1e-7


class TestHolonomy:
    """Test holonomy of closed face chains."""

    def test_flower_chain_is_trivial(self):
        K = disc(2).complex
        R, _ = max_label(K, tol=1e-11)
        h = holonomy(K, R, OverlapMap(), flower_loop(K, 1))

        assert h.is_trivial()
        assert h.to_dict()["loop"] == flower_loop(K, 1)

    def test_branched_flower_closes_after_two_turns(self):
        """A 4pi flower develops trivially but its rim wraps twice."""
        K = build_complex(HEX_FACES)
        R, _ = solve_label(
            K, OverlapMap(), {1: 4.0 * math.pi}, {v: 1.0 for v in K.boundary_vertices}, geom=Geometry.EUCLIDEAN
        )
        h = holonomy(K, R, OverlapMap(), flower_loop(K, 1), Geometry.EUCLIDEAN)
        P = develop(K, R, OverlapMap(), Geometry.EUCLIDEAN)

        assert h.is_trivial()
        assert boundary_winding(P, K.boundary_cycles[0], about=P.center(1)) == 2

    def test_disconnected_chain(self):
        K = disc(2).complex
        R, _ = max_label(K)
        loop = flower_loop(K, 1)
        with pytest.raises(OpenChain):
            holonomy(K, R, OverlapMap(), [loop[0], loop[3]])

    def test_generator_counts(self):
        assert generator_loops(disc(2).complex) == []
        assert len(generator_loops(annulus(3, 12).complex)) == 2
        assert len(generator_loops(torus(6, 6).complex)) == 2

    def test_homotopic_loops_share_holonomy(self):
        """A detour around an interior vertex leaves the holonomy unchanged."""
        K = annulus(3, 12).complex
        R, _ = max_label(K, tol=1e-11)
        loop = generator_loops(K)[0]
        interior = set(K.interior_vertices)
        k, v = next(
            (k, v)
            for k in range(len(loop) - 1)
            for v in set(K.faces[loop[k]]) & set(K.faces[loop[k + 1]]) & interior
        )
        around = flower_loop(K, v)
        n = len(around)
        p = around.index(loop[k])
        step = -1 if around[(p + 1) % n] == loop[k + 1] else 1
        detour = [around[(p + step * s) % n] for s in range(1, n - 1)]
        longer = loop[: k + 1] + detour + loop[k + 1:]

        h = holonomy(K, R, OverlapMap(), loop)
        h_long = holonomy(K, R, OverlapMap(), longer)

        assert len(longer) == len(loop) + n - 2
        assert h_long.translation_length == pytest.approx(h.translation_length, abs=1e-8)
        for z in (0j, 0.3 + 0j, 0.2j):
            assert abs(h_long.map(z) - h.map(z)) < 1e-8


class TestAnnulus:
    """Test deck transformations of a maximal annulus packing."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = annulus(3, 12).complex
        self.R, _ = max_label(self.K, tol=1e-10)

    def test_deck_is_hyperbolic(self):
        deck = deck_transformation(self.K, self.R, OverlapMap())

        assert deck.classification == MobiusClass.HYPERBOLIC
        assert deck.translation_length > 0.0
        assert not deck.is_trivial()

    def test_modulus(self):
        deck = deck_transformation(self.K, self.R, OverlapMap())
        modulus = annulus_modulus(deck)

        assert 0.0 < modulus < 1.0
        assert modulus == pytest.approx(math.exp(-(math.pi ** 2) / deck.translation_length))

    def test_deck_needs_loops(self):
        K = disc(2).complex
        R, _ = max_label(K)
        with pytest.raises(OpenChain):
            deck_transformation(K, R, OverlapMap())


class TestTorus:
    """Test periods of a flat torus."""

    def test_periods_span_the_lattice(self):
        K = torus(6, 6).complex
        R, _ = max_label(K)
        result = torus_periods(K, R)

        (x1, y1), (x2, y2) = result["periods"]
        area = abs(x1 * y2 - y1 * x2)
        # 36 unit circles, each owning a rhombus of side 2 and angle pi/3
        assert area == pytest.approx(36 * 4 * math.sin(math.pi / 3), rel=1e-6)
        assert result["tau"][1] > 0.0


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
