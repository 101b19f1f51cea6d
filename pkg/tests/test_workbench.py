"""Tests for generators, documents and rendering."""

import json
import math

import pytest
from pydantic import ValidationError

from src.cp_branching.core.complex import SurfaceType, insert_shifted_blackhole, insert_singular_blackhole
from src.cp_branching.core.error_handling import DocumentError, ErrorCategory, PackingError, TooSmall
from src.cp_branching.core.geometry import Geometry, project_circle
from src.cp_branching.core.layout import develop
from src.cp_branching.core.solver import OverlapMap, max_label
from src.cp_branching.models.schemas import (
    JobStatus,
    ScanSample,
    ShiftedSpec,
    SingularSpec,
    TraditionalSpec,
)
from src.cp_branching.workbench.generators import (
    GENERATORS,
    annulus,
    broken_annulus,
    disc,
    gen_complex,
    torus,
)
from src.cp_branching.workbench.io import (
    caps_from_document,
    caps_to_document,
    load_complex,
    load_label,
    load_packing,
    load_specs,
    save_complex,
    save_label,
    save_packing,
    save_specs,
    write_scan_csv,
)
from src.cp_branching.workbench.svg import render_sphere_svg, render_svg, roles_from_records, write_svg


class TestGenerators:
    """Test example complexes and their symmetries."""

    def test_disc_sizes(self):
        assert disc(1).complex.vertex_count == 7
        assert disc(2).complex.vertex_count == 19
        assert disc(3).complex.vertex_count == 37
        assert disc(3).complex.surface_type == SurfaceType.DISC

    def test_disc_named_vertices(self):
        generated = disc(2)
        K = generated.complex
        assert generated.named["center"] == 1
        assert not K.is_interior(generated.named["boundary"])
        assert K.is_interior(generated.named["v1"])
        assert K.is_interior(generated.named["v2"])

    @pytest.mark.parametrize("generated", [disc(2), annulus(5, 12), broken_annulus(5, 12), torus(8, 8)])
    def test_symmetries_are_automorphisms(self, generated):
        K = generated.complex
        assert generated.symmetries
        for name, symmetry in generated.symmetries.items():
            assert K.is_automorphism(symmetry.mapping, symmetry.orientation), name

    def test_annulus_reflection_reverses(self):
        generated = annulus(5, 12)
        assert generated.symmetries["reflection"].orientation == "reversing"
        assert generated.complex.surface_type == SurfaceType.ANNULUS

    def test_broken_annulus_loses_half_turn(self):
        generated = broken_annulus(5, 12)
        half_turn = annulus(5, 12).symmetries["half_translation"].mapping

        assert "half_translation" not in generated.symmetries
        assert not generated.complex.is_automorphism(half_turn)
        assert generated.complex.meta["kind"] == "broken_annulus"

    def test_torus_orbit(self):
        generated = torus(8, 8)
        assert generated.complex.euler_characteristic == 0
        assert len(set(generated.orbit)) == 4
        assert generated.named["v1"] == generated.orbit[0]

    def test_odd_torus_has_no_orbit(self):
        assert torus(5, 5).orbit == []

    def test_rectangular_torus(self):
        generated = torus(8, 8, rectangular=True)
        K = generated.complex

        assert K.euler_characteristic == 0
        assert K.surface_type == SurfaceType.TORUS
        assert all(len(K.flower(v)) == 6 for v in K.vertices)
        assert len(set(generated.orbit)) == 4
        for name in ("shift_columns", "shift_rows"):
            assert K.is_automorphism(generated.symmetries[name].mapping, "preserving")
        mirror = generated.symmetries["mirror"]
        assert K.is_automorphism(mirror.mapping, mirror.orientation)
        assert all(mirror.mapping[v] == v for v in generated.orbit)

    def test_rectangular_torus_needs_even_rows(self):
        with pytest.raises(PackingError) as exc_info:
            torus(8, 7, rectangular=True)
        assert exc_info.value.category == ErrorCategory.USAGE

    def test_too_small(self):
        with pytest.raises(TooSmall):
            disc(0)
        with pytest.raises(TooSmall):
            annulus(2, 12)
        with pytest.raises(TooSmall):
            broken_annulus(4, 12)
        with pytest.raises(TooSmall):
            torus(4, 6)

    def test_gen_complex(self):
        assert set(GENERATORS) == {"disc", "annulus", "broken_annulus", "torus"}
        assert gen_complex("disc", rings=1).complex.vertex_count == 7

        with pytest.raises(PackingError) as exc_info:
            gen_complex("sphere", rings=1)
        assert exc_info.value.category == ErrorCategory.USAGE


class TestSpecModels:
    """Test branch spec validation."""

    def test_traditional_target(self):
        assert TraditionalSpec(vertex=3, order=2).target == pytest.approx(6.0 * math.pi)

    def test_singular_partition(self):
        spec = SingularSpec(face=(1, 2, 3), gamma1=1.0, gamma2=1.0)
        assert spec.gamma3 == pytest.approx(math.pi - 2.0)

        with pytest.raises(ValidationError):
            SingularSpec(face=(1, 2, 3), gamma1=2.0, gamma2=1.5)

    def test_shifted_jumps_distinct(self):
        with pytest.raises(ValidationError):
            ShiftedSpec(vertex=1, jumps=(3, 3), gamma1=0.5, gamma2=0.5)


class TestDocuments:
    """Test JSON documents on disk."""

    def test_complex_document(self, tmp_path):
        K = disc(2).complex
        path = save_complex(tmp_path / "disc.json", K)
        loaded = load_complex(path)

        assert loaded.faces == K.faces
        assert loaded.meta["kind"] == "disc"
        assert loaded.holes == ()

    def test_complex_document_keeps_shifted_hole(self, tmp_path):
        K = disc(3).complex
        petals = K.flower(1).petals
        K, _ = insert_shifted_blackhole(K, 1, petals[0], petals[3])
        path = save_complex(tmp_path / "shifted.json", K)
        loaded = load_complex(path)

        raw = json.loads(path.read_text())
        assert raw["holes"][0]["kind"] == "shifted"
        assert loaded.faces == K.faces
        assert loaded.holes == K.holes
        assert loaded.holes[0].original_vertex == 1

    def test_complex_document_keeps_singular_hole(self, tmp_path):
        K = disc(2).complex
        K, record = insert_singular_blackhole(K, K.faces_at(1)[0])
        loaded = load_complex(save_complex(tmp_path / "singular.json", K))

        assert loaded.holes == (record,)
        assert loaded.holes[0].original_face == record.original_face

    def test_hole_with_wrong_chaperones(self, tmp_path):
        K = disc(2).complex
        K, _ = insert_singular_blackhole(K, K.faces_at(1)[0])
        path = save_complex(tmp_path / "singular.json", K)
        raw = json.loads(path.read_text())
        raw["holes"][0]["chaperones"] = raw["holes"][0]["chaperones"][:2]
        path.write_text(json.dumps(raw))

        with pytest.raises(DocumentError):
            load_complex(path)

    def test_hole_with_unknown_vertex(self, tmp_path):
        K = disc(2).complex
        K, _ = insert_singular_blackhole(K, K.faces_at(1)[0])
        path = save_complex(tmp_path / "singular.json", K)
        raw = json.loads(path.read_text())
        raw["holes"][0]["fall_guy"] = 999
        path.write_text(json.dumps(raw))

        with pytest.raises(DocumentError) as exc_info:
            load_complex(path)
        assert 999 in exc_info.value.context["missing"]

    def test_label_document_keeps_infinity(self, tmp_path):
        K = disc(1).complex
        R, _ = max_label(K)
        Phi = OverlapMap({(1, 2): 0.25})
        path = save_label(tmp_path / "label.json", R, Phi=Phi, targets={1: 4.0 * math.pi}, pinned=[1])

        raw = json.loads(path.read_text())
        assert raw["radii"]["2"] == "inf"
        assert raw["schema"] == "cpb-1"

        radii, overlaps, targets, pinned, geometry = load_label(path)
        assert radii == R
        assert overlaps(2, 1) == 0.25
        assert targets == {1: 4.0 * math.pi}
        assert pinned == [1]
        assert geometry == Geometry.HYPERBOLIC

    def test_packing_document(self, tmp_path):
        K = disc(2).complex
        R, _ = max_label(K)
        P = develop(K, R, OverlapMap())
        loaded = load_packing(save_packing(tmp_path / "packing.json", P))

        assert loaded.geometry == Geometry.HYPERBOLIC
        assert loaded.tree == P.tree
        for v, circle in P.circles.items():
            assert loaded.circles[v] == circle

    def test_caps_document(self):
        caps = {1: project_circle(0.5 + 0j, 0.5), 2: project_circle(1.5 + 0j, 0.5)}
        document = caps_to_document(caps)

        assert document.geometry == "spherical"
        assert caps_from_document(document) == caps

    def test_spherical_document_is_not_planar(self, tmp_path):
        path = tmp_path / "caps.json"
        path.write_text(caps_to_document({1: project_circle(0j, 1.0)}).model_dump_json(by_alias=True))
        with pytest.raises(DocumentError):
            load_packing(path)

    def test_specs_file(self, tmp_path):
        specs = [
            TraditionalSpec(vertex=1),
            SingularSpec(face=(1, 2, 3), gamma1=1.0, gamma2=1.0),
            ShiftedSpec(vertex=1, jumps=(2, 5), gamma1=0.5, gamma2=2.0),
        ]
        loaded = load_specs(save_specs(tmp_path / "specs.json", specs))
        assert loaded == specs

    def test_bare_spec_list(self, tmp_path):
        path = tmp_path / "specs.json"
        path.write_text(json.dumps([{"kind": "traditional", "vertex": 4}]))
        assert load_specs(path) == [TraditionalSpec(vertex=4)]

    def test_invalid_specs(self, tmp_path):
        path = tmp_path / "specs.json"
        path.write_text(json.dumps([{"kind": "singular", "face": [1, 2, 3], "gamma1": 2.0, "gamma2": 2.0}]))
        with pytest.raises(DocumentError):
            load_specs(path)

    def test_missing_and_malformed_files(self, tmp_path):
        with pytest.raises(DocumentError):
            load_complex(tmp_path / "missing.json")

        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(DocumentError):
            load_complex(path)

    def test_scan_csv(self, tmp_path):
        samples = [
            ScanSample(index=0, parameter=0.5, status=JobStatus.COMPLETED, value=-0.1, displacement=0.1),
            ScanSample(index=1, parameter=1.0, status=JobStatus.FAILED, error="StarViolation"),
        ]
        lines = write_scan_csv(tmp_path / "scan.csv", samples).read_text().splitlines()

        assert lines[0] == "index,parameter,status,value,displacement,error"
        assert lines[1] == "0,0.5,completed,-0.1,0.1,"
        assert lines[2] == "1,1.0,failed,,,StarViolation"


class TestSvg:
    """Test SVG rendering."""

    def setup_method(self):
        """Setup test fixtures."""
        self.K = disc(2).complex
        R, _ = max_label(self.K)
        self.P = develop(self.K, R, OverlapMap())

    def test_planar_render(self):
        document = render_svg(self.P, self.K, edges=True)

        assert document.startswith('<?xml version="1.0" encoding="UTF-8"?>')
        assert document.count('class="cp-circle"') == self.K.vertex_count
        assert document.count('class="cp-edge"') == self.K.edge_count
        assert 'class="cp-disc"' in document

    def test_render_is_deterministic(self):
        assert render_svg(self.P, self.K) == render_svg(self.P, self.K)

    def test_empty_render(self):
        document = render_svg(None)
        assert "cp-circle" not in document

    def test_roles(self):
        Kt, record = insert_singular_blackhole(self.K, self.K.faces_at(1)[0])
        roles = roles_from_records([record], branch_vertices=[5])

        assert roles[record.fall_guy] == "fall_guy"
        assert roles[record.chaperones[0]] == "chaperone"
        assert roles[record.chaperones[1]] == "chaperone2"
        assert all(roles[v] == "branch" for v in record.original_face)
        assert roles[5] == "branch"

    def test_sphere_render(self, tmp_path):
        caps = {1: project_circle(0j, 1.0), 2: project_circle(0j, 0.3)}
        document = render_sphere_svg(caps)

        assert document.count('class="cp-panel"') == 2
        assert 'data-facing="-z"' in document
        path = write_svg(tmp_path / "out" / "caps.svg", document)
        assert path.read_text() == document


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
