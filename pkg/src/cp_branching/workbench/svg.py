"""Deterministic SVG rendering of packings.

Planar packings are drawn in one panel (the unit circle is added for
hyperbolic packings); spherical packings are drawn as two orthographic
panels, the hemisphere facing +z and the one facing -z. Coordinates are
printed with fixed precision so identical input gives identical bytes.
"""

import logging
import math
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.complex import BlackHoleRecord, Complex, HoleKind
from ..core.geometry import Geometry, SphereCircle
from ..core.layout import Packing

logger = logging.getLogger(__name__)

SVG_NS = "http://www.w3.org/2000/svg"

ROLE_COLORS = {
    "default": "#555555",
    "branch": "#d62728",
    "chaperone": "#2ca02c",
    "chaperone2": "#1f77b4",
    "fall_guy": "#000000",
    "horizon": "#ff7f0e",
    "twin": "#9467bd",
}

# Roles drawn later sit on top.
_ROLE_ORDER = ["default", "horizon", "twin", "chaperone", "chaperone2", "branch", "fall_guy"]


def _fmt(x: float) -> str:
    text = f"{x:.4f}"
    return "0.0000" if text == "-0.0000" else text


def roles_from_records(
    records: Sequence[BlackHoleRecord] = (), branch_vertices: Iterable[int] = ()
) -> Dict[int, str]:
    """Color roles for black-hole vertices and traditional branch vertices."""
    roles: Dict[int, str] = {}
    for record in records:
        for v in record.horizon:
            roles[v] = "horizon"
        for v in record.twins or ():
            roles[v] = "twin"
        for k, h in enumerate(record.chaperones):
            roles[h] = "chaperone" if k % 2 == 0 else "chaperone2"
        if record.kind == HoleKind.SINGULAR:
            for v in record.original_face or ():
                roles[v] = "branch"
        roles[record.fall_guy] = "fall_guy"
    for v in branch_vertices:
        roles[v] = "branch"
    return roles


def _root(width: float, height: float) -> ET.Element:
    return ET.Element(
        "svg",
        {
            "xmlns": SVG_NS,
            "version": "1.1",
            "width": _fmt(width),
            "height": _fmt(height),
            "viewBox": f"0 0 {_fmt(width)} {_fmt(height)}",
        },
    )


def _serialize(root: ET.Element) -> str:
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _ordered(vertices: Iterable[int], roles: Mapping[int, str]) -> List[int]:
    rank = {role: k for k, role in enumerate(_ROLE_ORDER)}
    return sorted(vertices, key=lambda v: (rank.get(roles.get(v, "default"), 0), v))


def render_svg(
    P: Optional[Packing],
    K: Optional[Complex] = None,
    roles: Optional[Mapping[int, str]] = None,
    edges: bool = False,
    size: float = 600.0,
) -> str:
    """SVG document for a planar packing; carrier edges are drawn when K is given and edges is set."""
    roles = roles or {}
    root = _root(size, size)
    if P is None or not P.circles:
        return _serialize(root)

    margin = 0.04 * size
    if P.geometry == Geometry.HYPERBOLIC:
        lo_x, lo_y, hi_x, hi_y = -1.0, -1.0, 1.0, 1.0
    else:
        xs = [c.e_center.real - c.e_radius for c in P.circles.values()] + [
            c.e_center.real + c.e_radius for c in P.circles.values()
        ]
        ys = [c.e_center.imag - c.e_radius for c in P.circles.values()] + [
            c.e_center.imag + c.e_radius for c in P.circles.values()
        ]
        lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
    span = max(hi_x - lo_x, hi_y - lo_y) or 1.0
    scale = (size - 2.0 * margin) / span

    def to_px(z: complex) -> Tuple[float, float]:
        return margin + (z.real - lo_x) * scale, size - margin - (z.imag - lo_y) * scale

    if P.geometry == Geometry.HYPERBOLIC:
        cx, cy = to_px(0j)
        ET.SubElement(root, "circle", {
            "class": "cp-disc", "cx": _fmt(cx), "cy": _fmt(cy), "r": _fmt(scale),
            "fill": "none", "stroke": "#000000", "stroke-width": "1.0000",
        })

    if edges and K is not None:
        group = ET.SubElement(root, "g", {"class": "cp-carrier", "stroke": "#999999", "stroke-width": "0.5000"})
        for a, b in K.edges:
            if a not in P.circles or b not in P.circles:
                continue
            x1, y1 = to_px(P.circles[a].anchor if P.circles[a].is_horocycle else P.circles[a].e_center)
            x2, y2 = to_px(P.circles[b].anchor if P.circles[b].is_horocycle else P.circles[b].e_center)
            ET.SubElement(group, "line", {
                "class": "cp-edge", "x1": _fmt(x1), "y1": _fmt(y1), "x2": _fmt(x2), "y2": _fmt(y2),
            })

    for v in _ordered(P.circles, roles):
        circle = P.circles[v]
        role = roles.get(v, "default")
        x, y = to_px(circle.e_center)
        attrs = {
            "class": "cp-circle",
            "data-v": str(v),
            "cx": _fmt(x),
            "cy": _fmt(y),
            "r": _fmt(circle.e_radius * scale),
            "fill": "none",
            "stroke": ROLE_COLORS.get(role, ROLE_COLORS["default"]),
            "stroke-width": "2.0000" if role in ("horizon", "branch") else "0.8000",
        }
        if circle.e_radius * scale < 1.5:
            attrs.update({"r": "1.5000", "fill": attrs["stroke"]})
        ET.SubElement(root, "circle", attrs)
    logger.debug(f"Rendered {len(P.circles)} circles")
    return _serialize(root)


def _cap_outline(cap: SphereCircle, samples: int = 96) -> np.ndarray:
    c = np.asarray(cap.center, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    t = np.linspace(0.0, 2.0 * math.pi, samples + 1)
    return (
        math.cos(cap.radius) * c[None, :]
        + math.sin(cap.radius) * (np.cos(t)[:, None] * e1[None, :] + np.sin(t)[:, None] * e2[None, :])
    )


def render_sphere_svg(
    caps: Mapping[int, SphereCircle],
    roles: Optional[Mapping[int, str]] = None,
    size: float = 400.0,
) -> str:
    """Two orthographic panels: the +z hemisphere on the left, the -z one mirrored on the right."""
    roles = roles or {}
    root = _root(2.0 * size, size)
    radius = 0.45 * size
    for panel, facing in enumerate((1.0, -1.0)):
        ox, oy = (panel + 0.5) * size, 0.5 * size
        group = ET.SubElement(root, "g", {"class": "cp-panel", "data-facing": "+z" if facing > 0 else "-z"})
        ET.SubElement(group, "circle", {
            "class": "cp-sphere", "cx": _fmt(ox), "cy": _fmt(oy), "r": _fmt(radius),
            "fill": "none", "stroke": "#000000", "stroke-width": "1.0000",
        })
        for v in _ordered(caps, roles):
            outline = _cap_outline(caps[v])
            visible = outline[:, 2] * facing >= 0.0
            runs: List[List[Tuple[float, float]]] = []
            current: List[Tuple[float, float]] = []
            for point, seen in zip(outline, visible):
                if seen:
                    current.append((ox + facing * radius * point[0], oy - radius * point[1]))
                elif current:
                    runs.append(current)
                    current = []
            if current:
                runs.append(current)
            color = ROLE_COLORS.get(roles.get(v, "default"), ROLE_COLORS["default"])
            for run in runs:
                if len(run) < 2:
                    continue
                ET.SubElement(group, "polyline", {
                    "class": "cp-cap",
                    "data-v": str(v),
                    "points": " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in run),
                    "fill": "none",
                    "stroke": color,
                    "stroke-width": "0.8000",
                })
    return _serialize(root)


def write_svg(path: Union[str, Path], document: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(document)
    return path
