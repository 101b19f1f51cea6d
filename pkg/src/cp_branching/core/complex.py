"""Combinatorial machinery: triangulated surfaces, flowers and surgery.

A complex is an immutable list of positively oriented faces over vertex ids
1..N. Construction validates the manifold conditions and derives flowers;
every surgery returns a new complex.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.sparse import coo_matrix, csgraph

from .error_handling import (
    AdjacentHoleOverlap,
    BoundaryEdge,
    BoundaryFace,
    BoundaryVertex,
    CombinatoricsError,
    Disconnected,
    FlipWouldBreakDegree,
    FlipWouldCreateDuplicateEdge,
    JumpsAdjacent,
    NoReflection,
    NonManifold,
    OpenChain,
    OrientationError,
    PinchedVertex,
    ResultNotManifold,
    TooFewPetals,
    UnknownVertex,
)

logger = logging.getLogger(__name__)

Face = Tuple[int, int, int]
Edge = Tuple[int, int]


class SurfaceType(str, Enum):
    DISC = "disc"
    ANNULUS = "annulus"
    TORUS = "torus"
    SPHERE = "sphere"
    PUNCTURED_TORUS = "punctured_torus"
    OTHER = "other"


class HoleKind(str, Enum):
    SINGULAR = "singular"
    SHIFTED = "shifted"


@dataclass(frozen=True)
class Flower:
    """Counterclockwise petals of a vertex; closed for interior vertices.

    Interior flowers start at their smallest petal. Boundary flowers start at
    the boundary successor and end at the boundary predecessor.
    """
    petals: Tuple[int, ...]
    closed: bool

    def __len__(self) -> int:
        return len(self.petals)

    def wedges(self) -> List[Edge]:
        """Consecutive petal pairs, one per face at the vertex."""
        n = len(self.petals)
        count = n if self.closed else n - 1
        return [(self.petals[k], self.petals[(k + 1) % n]) for k in range(count)]


@dataclass(frozen=True)
class BlackHoleRecord:
    """Auxiliary vertices and horizon of one black hole."""
    kind: HoleKind
    fall_guy: int
    chaperones: Tuple[int, ...]
    horizon: Tuple[int, ...]
    region_faces: Tuple[Face, ...]
    twins: Optional[Tuple[int, int]] = None
    jump_vertices: Optional[Tuple[int, int]] = None
    preceding: Optional[Tuple[int, int]] = None
    original_face: Optional[Face] = None
    original_vertex: Optional[int] = None

    @property
    def aux_vertices(self) -> Tuple[int, ...]:
        extra = self.twins or ()
        return tuple(sorted(set(self.chaperones) | set(extra) | {self.fall_guy}))


def normalize_face(face: Sequence[int]) -> Face:
    """Rotate a face so its smallest vertex comes first, keeping orientation."""
    a, b, c = (int(x) for x in face)
    k = (a, b, c).index(min(a, b, c))
    rot = (a, b, c)[k:] + (a, b, c)[:k]
    return rot  # type: ignore[return-value]


def _rotate_to(face: Sequence[int], v: int) -> Face:
    a, b, c = face
    if a == v:
        return (a, b, c)
    if b == v:
        return (b, c, a)
    return (c, a, b)


class Complex:
    """Oriented simplicial 2-complex triangulating a connected surface."""

    def __init__(
        self,
        faces: Iterable[Sequence[int]],
        meta: Optional[Mapping] = None,
        holes: Sequence[BlackHoleRecord] = (),
    ):
        self.faces: Tuple[Face, ...] = tuple(tuple(int(x) for x in f) for f in faces)  # type: ignore[misc]
        self.meta: Dict = dict(meta or {})
        self.holes: Tuple[BlackHoleRecord, ...] = tuple(holes)
        self._validate()

    # -- construction ------------------------------------------------------

    def _validate(self) -> None:
        if not self.faces:
            raise CombinatoricsError("Complex needs at least one face")
        used: Set[int] = set()
        for face in self.faces:
            if len(face) != 3 or len(set(face)) != 3:
                raise NonManifold(f"Face {face} is not a triangle of distinct vertices")
            used.update(face)
        n = max(used)
        if min(used) != 1 or len(used) != n:
            raise CombinatoricsError(
                "Vertex ids must be contiguous from 1",
                context={"missing": sorted(set(range(1, n + 1)) - used)},
            )
        self.vertex_count = n

        undirected: Dict[Edge, int] = {}
        for face in self.faces:
            for a, b in ((face[0], face[1]), (face[1], face[2]), (face[2], face[0])):
                key = (min(a, b), max(a, b))
                undirected[key] = undirected.get(key, 0) + 1
        crowded = [e for e, count in undirected.items() if count > 2]
        if crowded:
            raise NonManifold(f"Edge {crowded[0]} lies in more than two faces", context={"edges": crowded[:10]})

        directed: Dict[Edge, int] = {}
        for index, face in enumerate(self.faces):
            for a, b in ((face[0], face[1]), (face[1], face[2]), (face[2], face[0])):
                if (a, b) in directed:
                    raise OrientationError(
                        f"Directed edge {(a, b)} appears twice; faces are not coherently oriented",
                        context={"faces": [self.faces[directed[(a, b)]], face]},
                    )
                directed[(a, b)] = index
        self._directed = directed
        self._edges = sorted(undirected)

        rows = np.array([e[0] - 1 for e in self._edges] + [e[1] - 1 for e in self._edges])
        cols = np.array([e[1] - 1 for e in self._edges] + [e[0] - 1 for e in self._edges])
        adjacency = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        components = csgraph.connected_components(adjacency, directed=False, return_labels=False)
        if components != 1:
            raise Disconnected(f"Complex has {components} connected components")

        self._flowers = {v: self._build_flower(v) for v in range(1, n + 1)}

    def _build_flower(self, v: int) -> Flower:
        succ: Dict[int, int] = {}
        pred: Dict[int, int] = {}
        for face in self.faces:
            if v not in face:
                continue
            _, a, b = _rotate_to(face, v)
            succ[a] = b
            pred[b] = a
        starts = [p for p in succ if p not in pred]
        if len(starts) > 1:
            raise PinchedVertex(f"Vertex {v} has a flower of several fans", context={"vertex": v})
        closed = not starts
        start = min(succ) if closed else starts[0]
        petals = [start]
        current = start
        while current in succ:
            current = succ[current]
            if current == start:
                break
            petals.append(current)
        expected = len(succ) if closed else len(succ) + 1
        if len(petals) != expected:
            raise PinchedVertex(f"Vertex {v} has a flower of several cycles", context={"vertex": v})
        return Flower(tuple(petals), closed)

    # -- queries -----------------------------------------------------------

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    @property
    def edges(self) -> List[Edge]:
        return list(self._edges)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @property
    def face_count(self) -> int:
        return len(self.faces)

    def check_vertex(self, v: int) -> None:
        if not 1 <= v <= self.vertex_count:
            raise UnknownVertex(f"Vertex {v} not in complex", context={"vertex": v})

    def flower(self, v: int) -> Flower:
        self.check_vertex(v)
        return self._flowers[v]

    def is_interior(self, v: int) -> bool:
        return self.flower(v).closed

    @cached_property
    def boundary_flags(self) -> Tuple[bool, ...]:
        """Index v-1 is True for boundary vertices."""
        return tuple(not self._flowers[v].closed for v in self.vertices)

    @cached_property
    def interior_vertices(self) -> Tuple[int, ...]:
        return tuple(v for v in self.vertices if self._flowers[v].closed)

    @cached_property
    def boundary_vertices(self) -> Tuple[int, ...]:
        return tuple(v for v in self.vertices if not self._flowers[v].closed)

    def neighbors(self, v: int) -> Tuple[int, ...]:
        return self.flower(v).petals

    def has_edge(self, a: int, b: int) -> bool:
        return (a, b) in self._directed or (b, a) in self._directed

    def face_with_edge(self, a: int, b: int) -> Optional[int]:
        """Index of the face containing the directed edge a -> b."""
        return self._directed.get((a, b))

    def faces_at(self, v: int) -> List[Face]:
        """Faces at v rotated to start with v, in counterclockwise order."""
        return [(v, a, b) for a, b in self.flower(v).wedges()]

    def next_boundary(self, v: int) -> int:
        flower = self.flower(v)
        if flower.closed:
            raise BoundaryVertex(f"Vertex {v} is interior", context={"vertex": v})
        return flower.petals[0]

    @cached_property
    def boundary_cycles(self) -> Tuple[Tuple[int, ...], ...]:
        """Boundary components traversed with the interior on the left."""
        seen: Set[int] = set()
        cycles = []
        for v in self.boundary_vertices:
            if v in seen:
                continue
            cycle = [v]
            seen.add(v)
            current = self.next_boundary(v)
            while current != v:
                cycle.append(current)
                seen.add(current)
                current = self.next_boundary(current)
            cycles.append(tuple(cycle))
        return tuple(cycles)

    @property
    def euler_characteristic(self) -> int:
        return self.vertex_count - self.edge_count + self.face_count

    @property
    def genus(self) -> int:
        return (2 - len(self.boundary_cycles) - self.euler_characteristic) // 2

    @property
    def surface_type(self) -> SurfaceType:
        b, g = len(self.boundary_cycles), self.genus
        table = {
            (1, 0): SurfaceType.DISC,
            (2, 0): SurfaceType.ANNULUS,
            (0, 1): SurfaceType.TORUS,
            (0, 0): SurfaceType.SPHERE,
            (1, 1): SurfaceType.PUNCTURED_TORUS,
        }
        return table.get((b, g), SurfaceType.OTHER)

    def face_adjacency(self) -> List[List[Tuple[int, Edge]]]:
        """Per face, the (neighbor face, shared directed edge of this face) pairs."""
        result: List[List[Tuple[int, Edge]]] = []
        for face in self.faces:
            entries = []
            for a, b in ((face[0], face[1]), (face[1], face[2]), (face[2], face[0])):
                other = self._directed.get((b, a))
                if other is not None:
                    entries.append((other, (a, b)))
            result.append(entries)
        return result

    def is_automorphism(self, mapping: Mapping[int, int], orientation: str = "any") -> bool:
        """Whether a vertex bijection maps the face set onto itself.

        orientation: "preserving", "reversing" or "any".
        """
        if sorted(mapping.get(v, v) for v in self.vertices) != list(self.vertices):
            return False
        original = {normalize_face(f) for f in self.faces}
        image = {normalize_face(tuple(mapping.get(x, x) for x in f)) for f in self.faces}
        reversed_image = {normalize_face((f[0], f[2], f[1])) for f in image}
        if orientation == "preserving":
            return image == original
        if orientation == "reversing":
            return reversed_image == original
        return image == original or reversed_image == original

    def region_boundary(self, faces: Iterable[Sequence[int]]) -> Tuple[int, ...]:
        """Boundary cycle of a set of faces, counterclockwise around the region."""
        directed = set()
        for face in faces:
            a, b, c = face
            directed.update({(a, b), (b, c), (c, a)})
        outer = {(a, b) for a, b in directed if (b, a) not in directed}
        succ: Dict[int, int] = {}
        for a, b in outer:
            if a in succ:
                raise OpenChain("Region boundary touches itself at a vertex", context={"vertex": a})
            succ[a] = b
        if not succ:
            raise OpenChain("Region has no boundary")
        start = min(succ)
        cycle = [start]
        current = succ[start]
        while current != start:
            cycle.append(current)
            if current not in succ or len(cycle) > len(succ):
                raise OpenChain("Region boundary is not a single cycle")
            current = succ[current]
        if len(cycle) != len(succ):
            raise OpenChain("Region boundary has several components")
        return tuple(cycle)

    def with_faces(self, faces: Iterable[Sequence[int]], holes: Sequence[BlackHoleRecord] = ()) -> "Complex":
        return Complex(faces, meta=self.meta, holes=holes)

    def __repr__(self) -> str:
        return (
            f"Complex(vertices={self.vertex_count}, faces={self.face_count}, "
            f"type={self.surface_type.value})"
        )


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def build_complex(faces: Iterable[Sequence[int]], meta: Optional[Mapping] = None) -> Complex:
    """Validated complex from oriented faces."""
    return Complex(faces, meta=meta)


def flower(K: Complex, v: int) -> Flower:
    return K.flower(v)


def _reversed_petals(K: Complex, x: int, y: int, q: int, image_q: int) -> Optional[Dict[int, int]]:
    """Petals of x onto petals of y with orientation reversed and q sent to image_q."""
    source, target = K.flower(x), K.flower(y)
    n = len(source)
    if n != len(target) or source.closed != target.closed or image_q not in target.petals:
        return None
    i, k = source.petals.index(q), target.petals.index(image_q)
    if source.closed:
        return {source.petals[(i + s) % n]: target.petals[(k - s) % n] for s in range(n)}
    if k != n - 1 - i:
        return None
    return {p: target.petals[n - 1 - s] for s, p in enumerate(source.petals)}


def _grow_reflection(K: Complex, anchor: int, petal: int, image: int) -> Optional[Dict[int, int]]:
    mapping = {anchor: anchor}
    seeds = {anchor: (petal, image)}
    queue = deque([anchor])
    while queue:
        x = queue.popleft()
        q, image_q = seeds[x]
        petal_map = _reversed_petals(K, x, mapping[x], q, image_q)
        if petal_map is None:
            return None
        for p, image_p in petal_map.items():
            if p in mapping:
                if mapping[p] != image_p:
                    return None
                continue
            mapping[p] = image_p
            seeds[p] = (x, mapping[x])
            queue.append(p)
    return mapping if len(mapping) == K.vertex_count else None


def find_reflection(K: Complex, fixed: Sequence[int], exchange_boundaries: bool = False) -> Dict[int, int]:
    """Orientation reversing automorphism that fixes every vertex in fixed.

    Candidates are seeded at the flower of the first fixed vertex and grown
    flower by flower. With exchange_boundaries the map must also swap the two
    boundary components, which picks the midline reflection of an annulus.
    """
    if not fixed:
        raise CombinatoricsError("A reflection needs at least one fixed vertex")
    for v in fixed:
        K.check_vertex(v)
    anchor = fixed[0]
    petals = K.flower(anchor).petals
    cycles = K.boundary_cycles
    for image in petals:
        mapping = _grow_reflection(K, anchor, petals[0], image)
        if mapping is None or any(mapping[v] != v for v in fixed):
            continue
        if not K.is_automorphism(mapping, "reversing"):
            continue
        if exchange_boundaries and (len(cycles) != 2 or mapping[cycles[0][0]] not in cycles[1]):
            continue
        logger.debug(f"Reflection fixing {list(fixed)} found from petal {petals[0]} -> {image}")
        return mapping
    raise NoReflection(
        f"No orientation reversing automorphism fixes {list(fixed)}",
        context={"fixed": list(fixed), "exchange_boundaries": exchange_boundaries},
    )


def edge_flip(K: Complex, e: Edge) -> Complex:
    """Replace edge e by the other diagonal of its quadrilateral."""
    a, b = e
    K.check_vertex(a)
    K.check_vertex(b)
    if not K.has_edge(a, b):
        raise CombinatoricsError(f"{(a, b)} is not an edge")
    i1, i2 = K.face_with_edge(a, b), K.face_with_edge(b, a)
    if i1 is None or i2 is None:
        raise BoundaryEdge(f"Edge {(a, b)} is on the boundary", context={"edge": [a, b]})
    c = _rotate_to(K.faces[i1], a)[2]
    d = _rotate_to(K.faces[i2], b)[2]
    if c == d or K.has_edge(c, d):
        raise FlipWouldCreateDuplicateEdge(
            f"Flipping {(a, b)} would duplicate edge {(c, d)}", context={"edge": [c, d]}
        )
    for x in (a, b):
        if len(K.flower(x)) - 1 < 3:
            raise FlipWouldBreakDegree(
                f"Flipping {(a, b)} leaves vertex {x} with fewer than 3 neighbors",
                context={"vertex": x},
            )
    faces = list(K.faces)
    faces[i1] = (a, d, c)
    faces[i2] = (d, b, c)
    logger.debug(f"Flipped edge {(a, b)} to {(c, d)}")
    return Complex(faces, meta=K.meta, holes=K.holes)


def shift_id(w: int, removed: int) -> int:
    """Id of vertex w after vertex `removed` is deleted."""
    return w - 1 if w > removed else w


def puncture(K: Complex, v: int) -> Complex:
    """Remove interior vertex v and its faces; its petals become a boundary."""
    if not K.is_interior(v):
        raise BoundaryVertex(f"Vertex {v} is on the boundary", context={"vertex": v})
    faces = [tuple(shift_id(x, v) for x in f) for f in K.faces if v not in f]
    if not faces:
        raise ResultNotManifold(f"Puncturing {v} leaves no faces", context={"vertex": v})
    try:
        return Complex(faces, meta=K.meta)
    except CombinatoricsError as exc:
        raise ResultNotManifold(
            f"Puncturing {v} does not leave a surface: {exc.message}",
            context={"vertex": v},
            original_error=exc,
        ) from exc


def _check_hole_overlap(K: Complex, region: Iterable[Face], vertices: Iterable[int]) -> None:
    taken_faces = {normalize_face(f) for hole in K.holes for f in hole.region_faces}
    taken_vertices = {x for hole in K.holes for x in hole.aux_vertices}
    if {normalize_face(f) for f in region} & taken_faces or set(vertices) & taken_vertices:
        raise AdjacentHoleOverlap("Region intersects an existing black hole")


def insert_singular_blackhole(K: Complex, f: Sequence[int]) -> Tuple[Complex, BlackHoleRecord]:
    """Retriangulate a face and its three neighbors around a fall guy.

    Chaperone h_i sits across from v_i; the fall guy g has the six petals
    v1, h3, v2, h1, v3, h2.
    """
    v1, v2, v3 = (int(x) for x in f)
    for x in (v1, v2, v3):
        K.check_vertex(x)
    index = K.face_with_edge(v1, v2)
    if index is None or normalize_face(K.faces[index]) != normalize_face((v1, v2, v3)):
        raise CombinatoricsError(f"{(v1, v2, v3)} is not a positively oriented face")
    opposite = {}
    for a, b, name in ((v3, v2, "u1"), (v1, v3, "u2"), (v2, v1, "u3")):
        other = K.face_with_edge(a, b)
        if other is None:
            raise BoundaryFace(f"Face {(v1, v2, v3)} has a boundary edge", context={"face": [v1, v2, v3]})
        opposite[name] = _rotate_to(K.faces[other], a)[2]
    u1, u2, u3 = opposite["u1"], opposite["u2"], opposite["u3"]
    horizon = (v1, u3, v2, u1, v3, u2)
    if len(set(horizon)) != 6:
        raise CombinatoricsError("Horizon of the singular hole is not a simple hexagon")
    old_region = [(v1, v2, v3), (v3, v2, u1), (v1, v3, u2), (v2, v1, u3)]
    _check_hole_overlap(K, old_region, horizon)

    n = K.vertex_count
    h1, h2, h3, g = n + 1, n + 2, n + 3, n + 4
    new_region = [
        (g, v1, h3), (g, h3, v2), (g, v2, h1), (g, h1, v3), (g, v3, h2), (g, h2, v1),
        (v1, u3, h3), (h3, u3, v2), (v2, u1, h1), (h1, u1, v3), (v3, u2, h2), (h2, u2, v1),
    ]
    dropped = {normalize_face(x) for x in old_region}
    faces = [face for face in K.faces if normalize_face(face) not in dropped] + new_region
    record = BlackHoleRecord(
        kind=HoleKind.SINGULAR,
        fall_guy=g,
        chaperones=(h1, h2, h3),
        horizon=horizon,
        region_faces=tuple(new_region),
        original_face=(v1, v2, v3),
    )
    logger.info(f"Inserted singular black hole at face {(v1, v2, v3)}, fall guy {g}")
    return Complex(faces, meta=K.meta, holes=K.holes + (record,)), record


def insert_shifted_blackhole(
    K: Complex, v: int, j1: int, j2: int
) -> Tuple[Complex, BlackHoleRecord]:
    """Split v into twins t1 (keeps id v) and t2 with two chaperones and a fall guy.

    Petals from j1 counterclockwise through w2 attach to t2; petals from j2
    through w1 attach to t1, where w_i is the petal preceding j_i.
    """
    if not K.is_interior(v):
        raise BoundaryVertex(f"Vertex {v} is on the boundary", context={"vertex": v})
    petals = K.flower(v).petals
    n = len(petals)
    if n < 5:
        raise TooFewPetals(f"Vertex {v} has {n} petals, shifted branching needs 5", context={"vertex": v})
    if j1 not in petals or j2 not in petals:
        raise CombinatoricsError(f"Jumps {(j1, j2)} must be petals of {v}")
    a, b = petals.index(j1), petals.index(j2)
    if a == b or (b - a) % n in (1, n - 1):
        raise JumpsAdjacent(f"Jumps {(j1, j2)} coincide or are adjacent", context={"jumps": [j1, j2]})
    _check_hole_overlap(K, K.faces_at(v), (v,) + petals)

    w1, w2 = petals[(a - 1) % n], petals[(b - 1) % n]
    size2 = (b - a) % n
    arc2 = [petals[(a + k) % n] for k in range(size2)]
    arc1 = [petals[(b + k) % n] for k in range(n - size2)]

    t1 = v
    m = K.vertex_count
    t2, h1, h2, g = m + 1, m + 2, m + 3, m + 4
    new_region = [(t2, arc2[k], arc2[k + 1]) for k in range(len(arc2) - 1)]
    new_region += [(t1, arc1[k], arc1[k + 1]) for k in range(len(arc1) - 1)]
    new_region += [
        (h1, w1, j1), (h1, t1, w1), (h1, j1, t2),
        (h2, w2, j2), (h2, t2, w2), (h2, j2, t1),
        (g, h1, t2), (g, t2, h2), (g, h2, t1), (g, t1, h1),
    ]
    faces = [face for face in K.faces if v not in face] + new_region
    record = BlackHoleRecord(
        kind=HoleKind.SHIFTED,
        fall_guy=g,
        chaperones=(h1, h2),
        horizon=petals,
        region_faces=tuple(new_region),
        twins=(t1, t2),
        jump_vertices=(j1, j2),
        preceding=(w1, w2),
        original_vertex=v,
    )
    logger.info(f"Inserted shifted black hole at vertex {v}, jumps {(j1, j2)}, fall guy {g}")
    return Complex(faces, meta=K.meta, holes=K.holes + (record,)), record
