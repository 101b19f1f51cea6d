"""Example complexes with known symmetries.

Every generator returns the complex together with named vertices and the
vertex permutations it is known to be invariant under, so callers never
have to search for automorphisms.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from ..core.complex import Complex, Face, build_complex, edge_flip
from ..core.error_handling import ErrorCategory, PackingError, TooSmall

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Symmetry:
    """Vertex permutation and whether it preserves or reverses orientation."""
    mapping: Dict[int, int]
    orientation: str = "preserving"


@dataclass
class GeneratedComplex:
    complex: Complex
    kind: str
    params: Dict[str, int]
    named: Dict[str, int] = field(default_factory=dict)
    symmetries: Dict[str, Symmetry] = field(default_factory=dict)
    orbit: List[int] = field(default_factory=list)


def _hex_distance(q: int, r: int) -> int:
    return (abs(q) + abs(r) + abs(q + r)) // 2


def disc(rings: int) -> GeneratedComplex:
    """Hexagonal ball of the triangular lattice: 1 + 3 rings (rings + 1) vertices.

    Vertex 1 is the center; the rest are numbered ring by ring,
    counterclockwise from the positive real direction.
    """
    if rings < 1:
        raise TooSmall(f"Disc needs at least one ring, got {rings}", context={"rings": rings})
    omega = complex(0.5, math.sqrt(3.0) / 2.0)
    points = [
        (q, r) for q in range(-rings, rings + 1) for r in range(-rings, rings + 1)
        if _hex_distance(q, r) <= rings
    ]

    def order(p: Tuple[int, int]) -> Tuple[int, float]:
        z = p[0] + p[1] * omega
        return _hex_distance(*p), math.atan2(z.imag, z.real) % (2.0 * math.pi)

    points.sort(key=order)
    ids = {p: k + 1 for k, p in enumerate(points)}
    faces: List[Face] = []
    for q, r in points:
        up = ((q, r), (q + 1, r), (q, r + 1))
        down = ((q + 1, r), (q + 1, r + 1), (q, r + 1))
        for tri in (up, down):
            if all(p in ids for p in tri):
                faces.append(tuple(ids[p] for p in tri))  # type: ignore[arg-type]

    rotation = {ids[(q, r)]: ids[(-r, q + r)] for q, r in points}
    K = build_complex(faces, meta={"kind": "disc", "rings": rings, "center": 1})
    named = {"center": 1, "boundary": ids[(rings, 0)]}
    if rings >= 2:
        k = max(1, rings // 2)
        named["v1"] = ids[(k, 0)]
        named["v2"] = ids[(-k, 0)]
    logger.info(f"Generated disc with {rings} rings: {K.vertex_count} vertices")
    return GeneratedComplex(
        K, "disc", {"rings": rings}, named, {"rotation": Symmetry(rotation)}
    )


def _annulus_faces(rings: int, cols: int) -> Tuple[List[Face], Callable[[int, int], int]]:
    def vid(i: int, j: int) -> int:
        return i * cols + (j % cols) + 1

    faces: List[Face] = []
    for i in range(rings - 1):
        for j in range(cols):
            faces.append((vid(i, j), vid(i, j + 1), vid(i + 1, j)))
            faces.append((vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j)))
    return faces, vid


def annulus(rings: int, cols: int) -> GeneratedComplex:
    """Cylinder of the triangular lattice, rings rows of cols vertices.

    Row i sits half a step to the right of row i - 1, so with an odd row
    count the reflection in the middle row is an orientation reversing
    automorphism; with an even column count the half turn around the
    cylinder is an orientation preserving one.
    """
    if rings < 3 or cols < 6:
        raise TooSmall(
            f"Annulus needs at least 3 rings and 6 columns, got {rings}x{cols}",
            context={"rings": rings, "cols": cols},
        )
    faces, vid = _annulus_faces(rings, cols)
    K = build_complex(faces, meta={"kind": "annulus", "rings": rings, "cols": cols})
    mid = rings // 2
    named = {"v1": vid(mid, 0), "v2": vid(mid, cols // 2)}

    symmetries: Dict[str, Symmetry] = {}
    if rings % 2 == 1:
        symmetries["reflection"] = Symmetry(
            {vid(i, j): vid(rings - 1 - i, j + i - mid) for i in range(rings) for j in range(cols)},
            "reversing",
        )
    if cols % 2 == 0:
        symmetries["half_translation"] = Symmetry(
            {vid(i, j): vid(i, j + cols // 2) for i in range(rings) for j in range(cols)}
        )
    logger.info(f"Generated annulus {rings}x{cols}: {K.vertex_count} vertices")
    return GeneratedComplex(K, "annulus", {"rings": rings, "cols": cols}, named, symmetries)


def broken_annulus(rings: int, cols: int) -> GeneratedComplex:
    """Annulus with two flips mirrored across the middle row.

    The flips sit a quarter turn from v1, so the reflection survives while
    the half turn is lost.
    """
    if rings < 5 or rings % 2 == 0:
        raise TooSmall(
            f"Broken annulus needs an odd ring count of at least 5, got {rings}",
            context={"rings": rings},
        )
    base = annulus(rings, cols)
    _, vid = _annulus_faces(rings, cols)
    mid, j = rings // 2, cols // 4
    flips = [(vid(mid - 1, j), vid(mid - 1, j + 1)), (vid(mid + 1, j - 1), vid(mid + 1, j))]
    K = base.complex
    for e in flips:
        K = edge_flip(K, e)
    K.meta.update({"kind": "broken_annulus", "flips": [list(e) for e in flips]})
    symmetries = {"reflection": base.symmetries["reflection"]}
    return GeneratedComplex(K, "broken_annulus", dict(base.params), dict(base.named), symmetries)


def torus(n: int, m: int, rectangular: bool = False) -> GeneratedComplex:
    """Periodic n x m triangular lattice; vertex (row i, column j) has id i*n + j + 1.

    Rows close up straight by default, giving a rhombic period cell. With
    rectangular=True the m-th row is glued back half a row over, so the
    second period is perpendicular to the first (m must be even). With n
    and m even, and m divisible by 4 in the rectangular case, the two half
    translations are automorphisms and the orbit of vertex 1 under them is
    published as v1..v4.
    """
    if n < 5 or m < 5:
        raise TooSmall(f"Torus needs at least a 5x5 lattice, got {n}x{m}", context={"n": n, "m": m})
    if rectangular and m % 2:
        raise PackingError(
            f"Rectangular torus needs an even row count, got {m}",
            category=ErrorCategory.USAGE,
            context={"n": n, "m": m},
        )
    lag = m // 2 if rectangular else 0

    def vid(i: int, j: int) -> int:
        return (i % m) * n + ((j + (i // m) * lag) % n) + 1

    faces: List[Face] = []
    for i in range(m):
        for j in range(n):
            faces.append((vid(i, j), vid(i, j + 1), vid(i + 1, j)))
            faces.append((vid(i, j + 1), vid(i + 1, j + 1), vid(i + 1, j)))
    K = build_complex(faces, meta={"kind": "torus", "n": n, "m": m, "rectangular": rectangular})

    symmetries: Dict[str, Symmetry] = {}
    named: Dict[str, int] = {}
    orbit: List[int] = []
    if rectangular:
        symmetries["mirror"] = Symmetry(
            {vid(i, j): vid(-i, j + i) for i in range(m) for j in range(n)}, "reversing"
        )
    if n % 2 == 0 and m % 2 == 0 and lag % 2 == 0:
        # a half period up the rows drifts lag/2 columns
        drift = -(lag // 2)
        symmetries["shift_columns"] = Symmetry({vid(i, j): vid(i, j + n // 2) for i in range(m) for j in range(n)})
        symmetries["shift_rows"] = Symmetry(
            {vid(i, j): vid(i + m // 2, j + drift) for i in range(m) for j in range(n)}
        )
        orbit = [vid(0, 0), vid(0, n // 2), vid(m // 2, drift), vid(m // 2, n // 2 + drift)]
        named = {f"v{k + 1}": v for k, v in enumerate(orbit)}
    logger.info(f"Generated {'rectangular ' if rectangular else ''}torus {n}x{m}: {K.vertex_count} vertices")
    return GeneratedComplex(K, "torus", {"n": n, "m": m}, named, symmetries, orbit)


GENERATORS = {
    "disc": disc,
    "annulus": annulus,
    "broken_annulus": broken_annulus,
    "torus": torus,
}


def gen_complex(kind: str, **sizes: int) -> GeneratedComplex:
    """Dispatch to a generator by name."""
    try:
        generator = GENERATORS[kind]
    except KeyError:
        raise PackingError(
            f"Unknown complex kind: {kind}",
            category=ErrorCategory.USAGE,
            context={"known": sorted(GENERATORS)},
        )
    return generator(**sizes)
