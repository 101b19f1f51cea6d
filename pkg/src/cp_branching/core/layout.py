"""Developing labels into circle configurations.

Faces are placed one at a time along a breadth-first spanning tree of the
face adjacency graph; each new face is fixed by the two circles it shares
with its parent. Walking a closed face chain instead of a tree gives the
holonomy of that chain.
"""

import cmath
import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .complex import BlackHoleRecord, Complex, Face, _rotate_to, normalize_face
from .error_handling import (
    BranchValueOnCurve,
    CoincidentCenters,
    DegenerateFace,
    GeometryError,
    NonIntegralWinding,
    NotHorocycle,
    OpenChain,
)
from .geometry import (
    INF,
    Circle,
    Geometry,
    MobiusClass,
    MobiusMap,
    SphereCircle,
    hyp_distance,
    measured_overlap,
    project_circle,
    realize_triple,
)
from .solver import OverlapMap

logger = logging.getLogger(__name__)

HOLONOMY_TOL = 1e-6


@dataclass
class Packing:
    """Circles of a developed label, one per vertex, plus per-face placements."""
    geometry: Geometry
    circles: Dict[int, Circle]
    tree: List[Tuple[int, int]] = field(default_factory=list)
    base_face: int = 0
    face_circles: Dict[int, Tuple[Circle, Circle, Circle]] = field(default_factory=dict)

    def transformed(self, m: MobiusMap) -> "Packing":
        return Packing(
            self.geometry,
            {v: c.transformed(m) for v, c in self.circles.items()},
            list(self.tree),
            self.base_face,
            {f: tuple(c.transformed(m) for c in cs) for f, cs in self.face_circles.items()},  # type: ignore[misc]
        )

    def center(self, v: int) -> complex:
        return self.circles[v].center

    def __len__(self) -> int:
        return len(self.circles)


@dataclass
class Holonomy:
    """Isometry accrued by developing around a closed face chain."""
    loop: Tuple[int, ...]
    map: MobiusMap
    displacement: float
    base: complex
    signed: float = 0.0

    @property
    def classification(self) -> MobiusClass:
        return self.map.classify()

    @property
    def translation_length(self) -> float:
        return self.map.translation_length()

    def is_trivial(self, tol: float = HOLONOMY_TOL) -> bool:
        return self.displacement < tol

    def to_dict(self) -> Dict:
        n = self.map.normalized()
        return {
            "loop": list(self.loop),
            "matrix": [[[z.real, z.imag] for z in row] for row in n.tolist()],
            "displacement": self.displacement,
            "translation_length": self.translation_length,
            "classification": self.classification.value,
            "signed": self.signed,
        }


# ---------------------------------------------------------------------------
# Placement
# ---------------------------------------------------------------------------

def pair_frame(cb: Circle, ca: Circle) -> MobiusMap:
    """Isometry taking the canonical placement of a circle pair onto (cb, ca).

    The canonical placement depends only on the two radii and their overlap,
    so frame(actual) composed with frame(reference)^-1 carries one placement
    of the pair onto the other.
    """
    if cb.geometry == Geometry.EUCLIDEAN:
        direction = ca.center - cb.center
        if direction == 0:
            raise CoincidentCenters("Circle pair has coincident centers")
        return MobiusMap.euclidean_motion(cb.center, cmath.phase(direction))
    if not cb.is_horocycle:
        move = MobiusMap.disc_move(cb.center)
        w = move.inverse()(ca.anchor)
        return move @ MobiusMap.rotation(cmath.phase(w))
    if not ca.is_horocycle:
        move = MobiusMap.disc_move(ca.center)
        w = move.inverse()(cb.anchor)
        return move @ MobiusMap.rotation(cmath.phase(w) - math.pi)
    zb, za = cb.center, ca.center
    sweep = cmath.phase(zb / za) % (2.0 * math.pi)
    mid = za * cmath.exp(0.5j * sweep)
    ends = MobiusMap.points_to_points((-1.0, 1.0, 1j), (zb, za, mid))
    back = ends.inverse()
    pb, pa = cb.transformed(back), ca.transformed(back)
    d_a = 2.0 * math.atanh(1.0 - 2.0 * pa.e_radius)
    d_b = -2.0 * math.atanh(1.0 - 2.0 * pb.e_radius)
    return ends @ MobiusMap.disc_translation(0.5 * (d_a + d_b))


def _triple_overlaps(Phi: OverlapMap, face: Sequence[int]) -> Tuple[float, float, float]:
    a, b, c = face
    return Phi(a, b), Phi(b, c), Phi(c, a)


def place_third(
    cp: Circle,
    cq: Circle,
    face: Face,
    R: Mapping[int, float],
    Phi: OverlapMap,
    geom: Geometry,
) -> Circle:
    """Circle of face[2] given placed circles of face[0] and face[1]."""
    reference = realize_triple([R[v] for v in face], _triple_overlaps(Phi, face), geom)
    carry = pair_frame(cp, cq) @ pair_frame(reference[0], reference[1]).inverse()
    return reference[2].transformed(carry)


def _base_face(K: Complex, R: Mapping[int, float]) -> int:
    flags = K.boundary_flags
    for index, face in enumerate(K.faces):
        if not any(flags[v - 1] for v in face):
            return index
    for index, face in enumerate(K.faces):
        if any(R[v] != INF for v in face):
            return index
    raise DegenerateFace("Every face consists of horocycles")


def _realize_face(K: Complex, index: int, R: Mapping[int, float], Phi: OverlapMap, geom: Geometry):
    face = K.faces[index]
    return dict(zip(face, realize_triple([R[v] for v in face], _triple_overlaps(Phi, face), geom)))


def _continue_face(
    placed: Mapping[int, Circle], face: Face, R: Mapping[int, float], Phi: OverlapMap, geom: Geometry
) -> Dict[int, Circle]:
    shared = [v for v in face if v in placed]
    if len(shared) < 2:
        raise OpenChain(f"Face {face} does not share an edge with its predecessor")
    new = next((v for v in face if v not in placed), None)
    if new is None:
        raise OpenChain(f"Face {face} repeats the vertices of its predecessor")
    oriented = _rotate_to(face, new)
    p, q = oriented[1], oriented[2]
    circle = place_third(placed[p], placed[q], (p, q, new), R, Phi, geom)
    return {p: placed[p], q: placed[q], new: circle}


def develop(
    K: Complex,
    R: Mapping[int, float],
    Phi: OverlapMap,
    geom: Geometry = Geometry.HYPERBOLIC,
) -> Packing:
    """Lay out every face along a breadth-first face tree.

    Non-tree edges are not enforced; their mismatch is holonomy or branching.
    """
    geom = Geometry(geom)
    base = _base_face(K, R)
    adjacency = K.face_adjacency()
    face_circles: Dict[int, Dict[int, Circle]] = {base: _realize_face(K, base, R, Phi, geom)}
    circles: Dict[int, Circle] = dict(face_circles[base])
    tree: List[Tuple[int, int]] = []
    queue = deque([base])
    while queue:
        index = queue.popleft()
        for other, _ in adjacency[index]:
            if other in face_circles:
                continue
            face_circles[other] = _continue_face(face_circles[index], K.faces[other], R, Phi, geom)
            for v, circle in face_circles[other].items():
                circles.setdefault(v, circle)
            tree.append((index, other))
            queue.append(other)
    logger.debug(f"Developed {len(face_circles)} faces from base face {base}")
    return Packing(
        geom,
        dict(sorted(circles.items())),
        tree,
        base,
        {f: tuple(cs[v] for v in K.faces[f]) for f, cs in face_circles.items()},  # type: ignore[misc]
    )


# ---------------------------------------------------------------------------
# Closure and holonomy
# ---------------------------------------------------------------------------

def check_closure(K: Complex, P: Packing, Phi: OverlapMap) -> float:
    """Largest overlap error over every edge, tree and non-tree alike."""
    worst = 0.0
    for a, b in K.edges:
        measured = measured_overlap(P.circles[a], P.circles[b])
        if measured is None:
            continue
        worst = max(worst, abs(measured - Phi(a, b)))
    return worst


def _displacement(m: MobiusMap, base: complex, geom: Geometry) -> float:
    if geom == Geometry.EUCLIDEAN:
        return abs(m(base) - base) + m.frobenius_deviation()
    return hyp_distance(base, m(base)) + m.frobenius_deviation()


def holonomy(
    K: Complex,
    R: Mapping[int, float],
    Phi: OverlapMap,
    loop: Sequence[int],
    geom: Geometry = Geometry.HYPERBOLIC,
) -> Holonomy:
    """Develop along a closed face chain and compare the first face's two placements."""
    geom = Geometry(geom)
    chain = [int(f) for f in loop]
    if len(chain) < 2:
        raise OpenChain("Loop needs at least two faces")
    for k in range(len(chain)):
        here, there = K.faces[chain[k]], K.faces[chain[(k + 1) % len(chain)]]
        if len(set(here) & set(there)) < 2:
            raise OpenChain(
                f"Faces {here} and {there} do not share an edge",
                context={"position": k},
            )

    first = _realize_face(K, chain[0], R, Phi, geom)
    placed = first
    for index in chain[1:]:
        placed = _continue_face(placed, K.faces[index], R, Phi, geom)
    final = _continue_face(
        {v: c for v, c in placed.items() if v in K.faces[chain[0]]}, K.faces[chain[0]], R, Phi, geom
    )

    finite = [v for v in K.faces[chain[0]] if not first[v].is_horocycle]
    b = finite[0]
    a = next(v for v in K.faces[chain[0]] if v != b)
    m = pair_frame(final[b], final[a]) @ pair_frame(first[b], first[a]).inverse()
    base = first[b].center
    displacement = _displacement(m, base, geom)

    # Signed component of the base point's shift along the direction of the loop.
    if geom == Geometry.EUCLIDEAN:
        shift = m(base) - base
        direction = first[a].center - base
    else:
        to_origin = MobiusMap.disc_move(base).inverse()
        shift = to_origin(m(base))
        direction = to_origin(first[a].anchor)
    signed = (shift * direction.conjugate()).real / abs(direction) if direction != 0 else 0.0
    return Holonomy(tuple(chain), m, displacement, base, signed)


def _tree_cotree_loops(K: Complex) -> List[List[int]]:
    n = K.vertex_count
    faces: List[Face] = list(K.faces)
    cones = []
    for k, cycle in enumerate(K.boundary_cycles):
        cone = n + 1 + k
        cones.append(cone)
        for i in range(len(cycle)):
            faces.append((cone, cycle[(i + 1) % len(cycle)], cycle[i]))
    real = len(K.faces)

    edge_faces: Dict[Tuple[int, int], List[int]] = {}
    neighbors: Dict[int, Set[int]] = {}
    for index, (a, b, c) in enumerate(faces):
        for x, y in ((a, b), (b, c), (c, a)):
            edge_faces.setdefault((min(x, y), max(x, y)), []).append(index)
            neighbors.setdefault(x, set()).add(y)
            neighbors.setdefault(y, set()).add(x)

    root = cones[0] if cones else 1
    primal: Set[Tuple[int, int]] = set()
    seen = {root}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for w in sorted(neighbors[u]):
            if w not in seen:
                seen.add(w)
                primal.add((min(u, w), max(u, w)))
                queue.append(w)

    parent: Dict[int, Optional[int]] = {0: None}
    dual: Set[Tuple[int, int]] = set()
    face_links: Dict[int, List[Tuple[int, Tuple[int, int]]]] = {}
    for edge, pair in edge_faces.items():
        if edge in primal or len(pair) != 2:
            continue
        f1, f2 = pair
        face_links.setdefault(f1, []).append((f2, edge))
        face_links.setdefault(f2, []).append((f1, edge))
    queue = deque([0])
    while queue:
        f = queue.popleft()
        for g, edge in sorted(face_links.get(f, [])):
            if g not in parent:
                parent[g] = f
                dual.add(edge)
                queue.append(g)

    def path_to_root(f: int) -> List[int]:
        path = [f]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])  # type: ignore[arg-type]
        return path

    loops = []
    for edge, pair in sorted(edge_faces.items()):
        if edge in primal or edge in dual or len(pair) != 2:
            continue
        up1, up2 = path_to_root(pair[0]), path_to_root(pair[1])
        common = set(up1) & set(up2)
        head = [f for f in up1 if f not in common]
        tail = [f for f in up2 if f not in common]
        meet = next(f for f in up1 if f in common)
        loop = head + [meet] + list(reversed(tail))
        if any(f >= real for f in loop):
            raise OpenChain("Generator loop crosses a capped boundary")
        loops.append(loop)
    return loops


def boundary_loop(K: Complex, cycle: Sequence[int]) -> List[int]:
    """Closed face chain running alongside one boundary component."""
    index = {normalize_face(face): i for i, face in enumerate(K.faces)}
    chain: List[int] = []
    for v in cycle:
        for face in reversed(K.faces_at(v)):
            f = index[normalize_face(face)]
            if not chain or chain[-1] != f:
                chain.append(f)
    while len(chain) > 1 and chain[0] == chain[-1]:
        chain.pop()
    return chain


def generator_loops(K: Complex) -> List[List[int]]:
    """Face loops for the generators: genus loops, then boundary-parallel loops.

    Boundary-parallel loops are returned only when there are at least two
    boundary components; for an annulus both are returned and are homotopic
    up to orientation.
    """
    loops = _tree_cotree_loops(K) if K.genus > 0 else []
    if len(K.boundary_cycles) >= 2:
        loops += [boundary_loop(K, cycle) for cycle in K.boundary_cycles]
    return loops


def deck_transformation(K: Complex, R: Mapping[int, float], Phi: OverlapMap) -> Holonomy:
    """Holonomy of the first boundary-parallel loop of an annulus."""
    loops = generator_loops(K)
    if not loops:
        raise OpenChain(f"A {K.surface_type.value} complex has no generator loops")
    return holonomy(K, R, Phi, loops[0], Geometry.HYPERBOLIC)


def annulus_modulus(deck: Holonomy) -> float:
    """Inner radius r of the round annulus {r < |z| < 1} covered by the deck group."""
    length = deck.translation_length
    if length <= 0.0:
        raise GeometryError("Deck transformation has zero translation length")
    return math.exp(-(math.pi ** 2) / length)


def torus_periods(K: Complex, R: Mapping[int, float], Phi: Optional[OverlapMap] = None) -> Dict:
    """Translation periods of a euclidean torus packing and their ratio."""
    Phi = Phi or OverlapMap()
    loops = _tree_cotree_loops(K)
    if len(loops) != 2:
        raise OpenChain(f"Expected two generator loops, found {len(loops)}")
    periods = []
    for loop in loops:
        h = holonomy(K, R, Phi, loop, Geometry.EUCLIDEAN)
        periods.append(h.map(0j) - 0j)
    w1, w2 = periods
    tau = w2 / w1
    if tau.imag < 0:
        tau = -tau
    return {"periods": [[w.real, w.imag] for w in periods], "tau": [tau.real, tau.imag]}


def crosscut_mismatch(m: MobiusMap, P: Packing, components: Sequence[Sequence[int]]) -> float:
    """Largest gap between a cross-cut endpoint and its image under the holonomy."""
    worst = 0.0
    for cycle in components:
        zeta = P.circles[cycle[0]].anchor
        worst = max(worst, abs(m(zeta) - zeta))
    return worst


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def normalize_disc(P: Packing, alpha: int, gamma: int) -> Packing:
    """Move alpha's center to 0 and gamma's ideal point to i."""
    if P.geometry != Geometry.HYPERBOLIC:
        raise GeometryError("normalize_disc needs a hyperbolic packing")
    if not P.circles[gamma].is_horocycle:
        raise NotHorocycle(f"Vertex {gamma} is not a horocycle", context={"vertex": gamma})
    centre = MobiusMap.disc_move(P.circles[alpha].center).inverse()
    zeta = centre(P.circles[gamma].center)
    m = MobiusMap.rotation(math.pi / 2.0 - cmath.phase(zeta)) @ centre
    return P.transformed(m)


def normalize_imaginary_axis(P: Packing, v1: int, v2: int) -> Packing:
    """Place v1 at it and v2 at -it for some t > 0."""
    if P.geometry != Geometry.HYPERBOLIC:
        raise GeometryError("normalize_imaginary_axis needs a hyperbolic packing")
    z1, z2 = P.circles[v1].center, P.circles[v2].center
    if P.circles[v1].is_horocycle or P.circles[v2].is_horocycle:
        raise NotHorocycle("Normalized vertices must carry finite circles")
    d = hyp_distance(z1, z2)
    if d < 1e-12:
        raise CoincidentCenters(f"Vertices {v1} and {v2} share a center")
    to_first = MobiusMap.disc_move(z1)
    w = to_first.inverse()(z2)
    midpoint = to_first(math.tanh(d / 4.0) * w / abs(w))
    centre = MobiusMap.disc_move(midpoint).inverse()
    image = centre(z1)
    m = MobiusMap.rotation(math.pi / 2.0 - cmath.phase(image)) @ centre
    return P.transformed(m)


def stereographic_project(P: Packing) -> Dict[int, SphereCircle]:
    """Spherical caps of a planar packing, through each circle's euclidean view.

    Point circles have no cap and are left out.
    """
    caps: Dict[int, SphereCircle] = {}
    for v, circle in sorted(P.circles.items()):
        if circle.e_radius > 0.0:
            caps[v] = project_circle(circle.e_center, circle.e_radius)
    return caps


# ---------------------------------------------------------------------------
# Windings
# ---------------------------------------------------------------------------

def _winding(points: Sequence[complex], about: complex, slack: float) -> int:
    total = 0.0
    n = len(points)
    for k in range(n):
        here, there = points[k] - about, points[(k + 1) % n] - about
        total += cmath.phase(there / here)
    turns = total / (2.0 * math.pi)
    count = round(turns)
    if abs(turns - count) > slack:
        raise NonIntegralWinding(
            f"Winding {turns:.4f} is not an integer", context={"turns": turns}
        )
    return int(count)


def boundary_winding(
    P: Packing, component: Sequence[int], about: complex = 0j, slack: float = 0.05
) -> int:
    """Turns of the component's centers (ideal points for horocycles) about a point."""
    points = [P.circles[v].anchor for v in component]
    if any(abs(z - about) < 1e-14 for z in points):
        raise BranchValueOnCurve("A boundary center coincides with the winding point")
    return _winding(points, about, slack)


def contact_point(c1: Circle, c2: Circle) -> complex:
    if c1.is_horocycle and c2.is_horocycle:
        return 0.5 * (c1.e_center + c2.e_center)
    p, q = c1.e_center, c2.e_center
    total = c1.e_radius + c2.e_radius
    if total == 0.0:
        return p
    return p + (q - p) * c1.e_radius / total


def _segment_distance(z: complex, p: complex, q: complex) -> float:
    d = q - p
    if d == 0:
        return abs(z - p)
    t = max(0.0, min(1.0, ((z - p) * d.conjugate()).real / abs(d) ** 2))
    return abs(z - (p + t * d))


def branch_value(P: Packing, record: BlackHoleRecord) -> complex:
    """Center of the fall guy's circle."""
    return P.circles[record.fall_guy].e_center


def event_horizon_winding(P: Packing, record: BlackHoleRecord, slack: float = 0.05) -> int:
    """Turns of the horizon's carrier polyline about the branch value."""
    about = branch_value(P, record)
    horizon = record.horizon
    points: List[complex] = []
    for k, v in enumerate(horizon):
        here, there = P.circles[v], P.circles[horizon[(k + 1) % len(horizon)]]
        points.append(here.anchor if here.is_horocycle else here.e_center)
        points.append(contact_point(here, there))
    for k in range(len(points)):
        if _segment_distance(about, points[k], points[(k + 1) % len(points)]) < 1e-12:
            raise BranchValueOnCurve(
                "Branch value lies on the horizon carrier", context={"fall_guy": record.fall_guy}
            )
    return _winding(points, about, slack)


def holonomy_in_packing(
    h: Holonomy, K: Complex, R: Mapping[int, float], Phi: OverlapMap, P: Packing
) -> MobiusMap:
    """The holonomy map written in the coordinates of a developed packing."""
    index = h.loop[0]
    if index not in P.face_circles:
        raise OpenChain(f"Face {index} was not placed by the layout")
    reference = _realize_face(K, index, R, Phi, P.geometry)
    placed = dict(zip(K.faces[index], P.face_circles[index]))
    b = next(v for v in K.faces[index] if not reference[v].is_horocycle)
    a = next(v for v in K.faces[index] if v != b)
    carry = pair_frame(placed[b], placed[a]) @ pair_frame(reference[b], reference[a]).inverse()
    return carry @ h.map @ carry.inverse()
