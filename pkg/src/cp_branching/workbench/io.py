"""JSON documents for complexes, labels, packings, branch specs and reports.

Floats are written with Python's shortest round-trip repr, so every value
read back is bit-identical to the one written. Infinite radii are stored
as the string "inf".
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Type, TypeVar, Union

from pydantic import BaseModel, TypeAdapter, ValidationError

from ..core.complex import BlackHoleRecord, Complex, HoleKind
from ..core.error_handling import DocumentError
from ..core.geometry import INF, Circle, Geometry, SphereCircle
from ..core.layout import Packing
from ..core.solver import Label, OverlapMap
from ..models.schemas import (
    BranchSpec,
    BranchSpecFile,
    CircleRecord,
    ComplexDocument,
    HoleRecord,
    LabelDocument,
    OverlapRecord,
    PackingDocument,
    ScanSample,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
M = TypeVar("M", bound=BaseModel)


def _radius_out(r: float) -> Union[float, str]:
    return "inf" if r == INF else float(r)


def _radius_in(r: Union[float, str]) -> float:
    return INF if r == "inf" else float(r)


def _pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


def write_json(path: PathLike, model: BaseModel) -> Path:
    """Write a document with sorted keys and a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = model.model_dump(mode="json", by_alias=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    logger.debug(f"Wrote {type(model).__name__} to {path}")
    return path


def read_json(path: PathLike, model: Type[M]) -> M:
    """Load and validate a document, raising DocumentError on any failure."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise DocumentError(f"File not found: {path}", original_error=e)
    except json.JSONDecodeError as e:
        raise DocumentError(f"Invalid JSON in {path}: {e}", original_error=e)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise DocumentError(
            f"{path} is not a valid {model.__name__}: {e.error_count()} error(s)",
            context={"errors": [err["msg"] for err in e.errors(include_url=False)]},
            original_error=e,
        )


# ---------------------------------------------------------------------------
# Complexes
# ---------------------------------------------------------------------------

def hole_to_record(record: BlackHoleRecord) -> HoleRecord:
    return HoleRecord(
        kind=record.kind.value,  # type: ignore[arg-type]
        fall_guy=record.fall_guy,
        chaperones=list(record.chaperones),
        horizon=list(record.horizon),
        region_faces=list(record.region_faces),
        twins=record.twins,
        jump_vertices=record.jump_vertices,
        preceding=record.preceding,
        original_face=record.original_face,
        original_vertex=record.original_vertex,
    )


def hole_from_record(doc: HoleRecord) -> BlackHoleRecord:
    return BlackHoleRecord(
        kind=HoleKind(doc.kind),
        fall_guy=doc.fall_guy,
        chaperones=tuple(doc.chaperones),
        horizon=tuple(doc.horizon),
        region_faces=tuple(doc.region_faces),
        twins=doc.twins,
        jump_vertices=doc.jump_vertices,
        preceding=doc.preceding,
        original_face=doc.original_face,
        original_vertex=doc.original_vertex,
    )


def complex_to_document(K: Complex) -> ComplexDocument:
    return ComplexDocument(faces=list(K.faces), meta=dict(K.meta), holes=[hole_to_record(r) for r in K.holes])


def complex_from_document(doc: ComplexDocument) -> Complex:
    """Complex with its surgery records; every record vertex must exist."""
    K = Complex(doc.faces, meta=doc.meta, holes=[hole_from_record(h) for h in doc.holes])
    for hole in K.holes:
        missing = [v for v in hole.aux_vertices + hole.horizon if not 1 <= v <= K.vertex_count]
        if missing:
            raise DocumentError(
                f"Hole with fall guy {hole.fall_guy} names unknown vertices",
                context={"missing": missing},
            )
    return K


def save_complex(path: PathLike, K: Complex) -> Path:
    return write_json(path, complex_to_document(K))


def load_complex(path: PathLike) -> Complex:
    return complex_from_document(read_json(path, ComplexDocument))


# ---------------------------------------------------------------------------
# Labels
# ---------------------------------------------------------------------------

def label_to_document(
    R: Mapping[int, float],
    geometry: Geometry = Geometry.HYPERBOLIC,
    Phi: Optional[OverlapMap] = None,
    targets: Optional[Mapping[int, float]] = None,
    pinned: Iterable[int] = (),
) -> LabelDocument:
    return LabelDocument(
        geometry=Geometry(geometry).value,
        radii={v: _radius_out(r) for v, r in sorted(R.items())},
        overlaps=[OverlapRecord(edge=e, angle=phi) for e, phi in (Phi or OverlapMap()).items()],
        targets=dict(sorted((targets or {}).items())),
        pinned=sorted(pinned),
    )


def label_from_document(doc: LabelDocument) -> Tuple[Label, OverlapMap, Dict[int, float], List[int], Geometry]:
    """Radii, overlaps, targets, pinned vertices and geometry of a label document."""
    R = {int(v): _radius_in(r) for v, r in doc.radii.items()}
    Phi = OverlapMap({tuple(o.edge): o.angle for o in doc.overlaps})  # type: ignore[misc]
    return R, Phi, dict(doc.targets), list(doc.pinned), Geometry(doc.geometry)


def save_label(path: PathLike, R: Mapping[int, float], **kwargs: Any) -> Path:
    return write_json(path, label_to_document(R, **kwargs))


def load_label(path: PathLike) -> Tuple[Label, OverlapMap, Dict[int, float], List[int], Geometry]:
    return label_from_document(read_json(path, LabelDocument))


# ---------------------------------------------------------------------------
# Packings
# ---------------------------------------------------------------------------

def packing_to_document(P: Packing) -> PackingDocument:
    circles = [
        CircleRecord(
            v=v,
            center=_pair(c.center),
            radius=_radius_out(c.radius),
            e_center=_pair(c.e_center),
            e_radius=c.e_radius,
        )
        for v, c in sorted(P.circles.items())
    ]
    return PackingDocument(
        geometry=P.geometry.value, circles=circles, tree=list(P.tree), base_face=P.base_face
    )


def packing_from_document(doc: PackingDocument) -> Packing:
    geometry = Geometry(doc.geometry)
    if geometry == Geometry.SPHERICAL:
        raise DocumentError("Spherical documents hold caps, not planar circles; use caps_from_document")
    circles: Dict[int, Circle] = {}
    for record in doc.circles:
        center = complex(*record.center)
        radius = _radius_in(record.radius)
        if record.e_center is None or record.e_radius is None:
            if geometry == Geometry.EUCLIDEAN:
                circle = Circle.euclidean(center, radius)
            else:
                circle = Circle.hyperbolic(center, radius)
        else:
            circle = Circle(geometry, center, radius, complex(*record.e_center), record.e_radius)
        circles[record.v] = circle
    return Packing(geometry, circles, [tuple(t) for t in doc.tree], doc.base_face)  # type: ignore[misc]


def caps_to_document(caps: Mapping[int, SphereCircle]) -> PackingDocument:
    """Spherical packing: unit center vectors and angular radii."""
    return PackingDocument(
        geometry=Geometry.SPHERICAL.value,
        circles=[CircleRecord(v=v, center=list(cap.center), radius=cap.radius) for v, cap in sorted(caps.items())],
    )


def caps_from_document(doc: PackingDocument) -> Dict[int, SphereCircle]:
    if Geometry(doc.geometry) != Geometry.SPHERICAL:
        raise DocumentError(f"Expected a spherical packing, got {doc.geometry}")
    return {
        r.v: SphereCircle((r.center[0], r.center[1], r.center[2]), _radius_in(r.radius))
        for r in doc.circles
    }


def save_packing(path: PathLike, P: Packing) -> Path:
    return write_json(path, packing_to_document(P))


def load_packing(path: PathLike) -> Packing:
    return packing_from_document(read_json(path, PackingDocument))


# ---------------------------------------------------------------------------
# Branch specs and traces
# ---------------------------------------------------------------------------

_SPEC_LIST = TypeAdapter(List[BranchSpec])


def load_specs(path: PathLike) -> List[BranchSpec]:
    """Branch specs from a spec file or a bare JSON list."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise DocumentError(f"File not found: {path}", original_error=e)
    except json.JSONDecodeError as e:
        raise DocumentError(f"Invalid JSON in {path}: {e}", original_error=e)
    try:
        if isinstance(data, list):
            return _SPEC_LIST.validate_python(data)
        return BranchSpecFile.model_validate(data).specs
    except ValidationError as e:
        raise DocumentError(
            f"{path} holds invalid branch specs",
            context={"errors": [err["msg"] for err in e.errors(include_url=False)]},
            original_error=e,
        )


def save_specs(path: PathLike, specs: Sequence[BranchSpec]) -> Path:
    return write_json(path, BranchSpecFile(specs=list(specs)))


def write_scan_csv(path: PathLike, samples: Sequence[ScanSample]) -> Path:
    """Scan trace as CSV: index,parameter,status,value,displacement,error."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "parameter", "status", "value", "displacement", "error"])
        for s in samples:
            writer.writerow([
                s.index,
                repr(s.parameter),
                s.status.value,
                "" if s.value is None else repr(s.value),
                "" if s.displacement is None else repr(s.displacement),
                s.error or "",
            ])
    return path
