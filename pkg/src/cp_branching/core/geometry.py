"""Metric kernels for circle packings.

Edge lengths and face angles from radii and overlaps in hyperbolic and
euclidean geometry, including zero and infinite (horocycle) radii; triple
realization; Möbius maps of the disc, plane and sphere; stereographic
projection.

Hyperbolic circles live in the Poincaré disc. A finite circle is stored by its
hyperbolic center and radius, a horocycle by its ideal point on the unit
circle and the euclidean radius of its disc-model image. Every circle also
carries its euclidean view, which is what overlaps are measured from.
"""

import cmath
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .error_handling import (
    BothInfinite,
    DegenerateFace,
    DegenerateTriple,
    GeometryError,
    LemmaHypothesisViolated,
    NegativeRadius,
    SingularMatrix,
    ViolatesStarStar,
)

logger = logging.getLogger(__name__)

INF = math.inf
ALGEBRAIC_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10


class Geometry(str, Enum):
    """Ambient geometry of a packing."""
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"


class MobiusClass(str, Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    HYPERBOLIC = "hyperbolic"
    LOXODROMIC = "loxodromic"


# ---------------------------------------------------------------------------
# Radius and overlap validation
# ---------------------------------------------------------------------------

def _check_radius(r: float) -> None:
    if math.isnan(r) or r < 0:
        raise NegativeRadius(f"Radius must be non-negative, got {r}", context={"radius": r})


def _check_overlap(phi: float) -> None:
    if math.isnan(phi) or phi < -ALGEBRAIC_TOL or phi > math.pi + ALGEBRAIC_TOL:
        raise GeometryError(f"Overlap {phi} outside [0, pi]", context={"overlap": phi})


def check_overlap_triple(phi_a: float, phi_b: float, phi_ab: float) -> None:
    """Reject a face whose deep overlaps break the per-face bound."""
    for phi in (phi_a, phi_b, phi_ab):
        _check_overlap(phi)
    deep = max(phi_a, phi_b, phi_ab) > math.pi / 2 + ALGEBRAIC_TOL
    total = phi_a + phi_b + phi_ab
    if deep and total > math.pi + ALGEBRAIC_TOL:
        raise ViolatesStarStar(
            f"Deep overlap with face sum {total:.6g} > pi",
            context={"overlaps": [phi_a, phi_b, phi_ab]},
        )


# ---------------------------------------------------------------------------
# Hyperbolic radius data
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HypRadius:
    """cosh, sinh and cosh - 1 of a hyperbolic radius.

    Horocycles use the scaled pair (1, 1); every expression they enter is
    homogeneous in that scale, so angles come out exact.
    """
    ch: float
    sh: float
    m: float
    ideal: bool

    @classmethod
    def of(cls, r: float) -> "HypRadius":
        if r == INF:
            return cls(1.0, 1.0, 0.0, True)
        half = math.sinh(r / 2.0)
        return cls(math.cosh(r), math.sinh(r), 2.0 * half * half, False)

    @classmethod
    def from_x(cls, x: float) -> "HypRadius":
        """Radius given in the coordinate x = exp(-2r), x = 0 for horocycles."""
        if x <= 0.0:
            return cls(1.0, 1.0, 0.0, True)
        return cls.of(-0.5 * math.log(x))


def _hyp_edge(a: HypRadius, b: HypRadius, cos_phi: float) -> Tuple[float, float]:
    """(cosh l, sinh l) of an edge, scaled when an end is ideal."""
    if a.ideal and b.ideal:
        c = 1.0 + cos_phi
        return c, c
    if a.ideal or b.ideal:
        finite = b if a.ideal else a
        c = finite.ch + cos_phi * finite.sh
        return c, c
    # cosh l - 1, kept accurate for short edges
    excess = a.m * b.m + a.m + b.m + cos_phi * a.sh * b.sh
    excess = max(excess, 0.0)
    return 1.0 + excess, math.sqrt(excess * (excess + 2.0))


def _hyp_angle(ca: float, sa: float, cb: float, sb: float, cab: float) -> float:
    numer = cab - ca * cb + sa * sb
    denom = ca * cb + sa * sb - cab
    return 2.0 * math.atan2(math.sqrt(max(numer, 0.0)), math.sqrt(max(denom, 0.0)))


def _euc_angle(p: float, q: float, o: float) -> float:
    numer = (o - p + q) * (o + p - q)
    denom = (p + q + o) * (p + q - o)
    return 2.0 * math.atan2(math.sqrt(max(numer, 0.0)), math.sqrt(max(denom, 0.0)))


def _euc_length(r1: float, r2: float, cos_phi: float) -> float:
    return math.sqrt(max(r1 * r1 + r2 * r2 + 2.0 * r1 * r2 * cos_phi, 0.0))


# ---------------------------------------------------------------------------
# Public kernels
# ---------------------------------------------------------------------------

def edge_length(r1: float, r2: float, phi: float, geom: Geometry) -> float:
    """Distance between centers of two circles with radii r1, r2 and overlap phi.

    A horocycle end gives an infinite hyperbolic length.
    """
    _check_radius(r1)
    _check_radius(r2)
    _check_overlap(phi)
    geom = Geometry(geom)
    if r1 == INF and r2 == INF:
        raise BothInfinite("Edge between two horocycles has no finite length")
    if geom == Geometry.EUCLIDEAN:
        if r1 == INF or r2 == INF:
            raise GeometryError("Infinite radius in euclidean geometry")
        return _euc_length(r1, r2, math.cos(phi))
    if geom != Geometry.HYPERBOLIC:
        raise GeometryError(f"edge_length not defined for {geom.value}")
    if r1 == INF or r2 == INF:
        return INF
    cosh_l, _ = _hyp_edge(HypRadius.of(r1), HypRadius.of(r2), math.cos(phi))
    return math.acosh(max(cosh_l, 1.0))


def face_angle(
    r: float,
    ra: float,
    rb: float,
    phi_a: float,
    phi_b: float,
    phi_ab: float,
    geom: Geometry,
) -> float:
    """Angle at the circle of radius r in the triple (r, ra, rb).

    phi_a and phi_b are the overlaps of r with ra and rb, phi_ab the overlap
    between the two neighbors. The angle is 0 at a horocycle and is continuous
    in every argument, including zero radii.
    """
    for value in (r, ra, rb):
        _check_radius(value)
    check_overlap_triple(phi_a, phi_b, phi_ab)
    if sum(1 for value in (r, ra, rb) if value == 0.0) >= 2:
        raise DegenerateTriple("Two zero radii in one face", context={"radii": [r, ra, rb]})
    if r == 0.0 and abs(phi_a + phi_b + phi_ab - math.pi) < ALGEBRAIC_TOL:
        logger.debug("Zero radius with overlap sum pi: using the limiting angle")
    geom = Geometry(geom)
    ca, cb, cab = math.cos(phi_a), math.cos(phi_b), math.cos(phi_ab)
    if geom == Geometry.EUCLIDEAN:
        if INF in (r, ra, rb):
            raise GeometryError("Infinite radius in euclidean geometry")
        return _euc_angle(_euc_length(r, ra, ca), _euc_length(r, rb, cb), _euc_length(ra, rb, cab))
    if geom != Geometry.HYPERBOLIC:
        raise GeometryError(f"face_angle not defined for {geom.value}")
    if r == INF:
        return 0.0
    hv, ha, hb = HypRadius.of(r), HypRadius.of(ra), HypRadius.of(rb)
    c_a, s_a = _hyp_edge(hv, ha, ca)
    c_b, s_b = _hyp_edge(hv, hb, cb)
    c_ab, _ = _hyp_edge(ha, hb, cab)
    return _hyp_angle(c_a, s_a, c_b, s_b, c_ab)


class FlowerKernel:
    """Angle sum at one vertex as a function of its own radius.

    Neighbor radii and overlaps are frozen at construction; the solver builds
    one kernel per vertex update and root-finds on it.
    """

    def __init__(
        self,
        geom: Geometry,
        faces: Sequence[Tuple[float, float, float, float, float]],
    ):
        """
        Args:
            geom: hyperbolic or euclidean
            faces: (ra, rb, phi_a, phi_b, phi_ab) per face at the vertex
        """
        self.geom = Geometry(geom)
        self.has_zero_neighbor = False
        self._terms: List[tuple] = []
        for ra, rb, phi_a, phi_b, phi_ab in faces:
            if ra == 0.0 or rb == 0.0:
                self.has_zero_neighbor = True
            cos_a, cos_b = math.cos(phi_a), math.cos(phi_b)
            if self.geom == Geometry.EUCLIDEAN:
                o = _euc_length(ra, rb, math.cos(phi_ab))
                self._terms.append((ra, rb, cos_a, cos_b, o))
            else:
                ha, hb = HypRadius.of(ra), HypRadius.of(rb)
                c_ab, _ = _hyp_edge(ha, hb, math.cos(phi_ab))
                self._terms.append((ha, hb, cos_a, cos_b, c_ab))

    def __call__(self, r: float) -> float:
        if self.geom == Geometry.EUCLIDEAN:
            return self.euclidean(r)
        return self.hyperbolic(HypRadius.of(r))

    def euclidean(self, r: float) -> float:
        total = 0.0
        for ra, rb, cos_a, cos_b, o in self._terms:
            total += _euc_angle(_euc_length(r, ra, cos_a), _euc_length(r, rb, cos_b), o)
        return total

    def hyperbolic(self, hv: HypRadius) -> float:
        if hv.ideal:
            return 0.0
        total = 0.0
        for ha, hb, cos_a, cos_b, c_ab in self._terms:
            c_a, s_a = _hyp_edge(hv, ha, cos_a)
            c_b, s_b = _hyp_edge(hv, hb, cos_b)
            total += _hyp_angle(c_a, s_a, c_b, s_b, c_ab)
        return total

    def at_x(self, x: float) -> float:
        """Hyperbolic angle sum with the radius given as x = exp(-2r)."""
        return self.hyperbolic(HypRadius.from_x(x))


# ---------------------------------------------------------------------------
# Disc-model helpers
# ---------------------------------------------------------------------------

def hyp_distance(z: complex, w: complex) -> float:
    """Poincaré-disc distance between two interior points."""
    ratio = abs(z - w) / abs(1.0 - w.conjugate() * z)
    return 2.0 * math.atanh(min(ratio, 1.0 - 1e-16))


def h_to_e(center: complex, radius: float) -> Tuple[complex, float]:
    """Euclidean center and radius of a finite hyperbolic circle."""
    s = math.tanh(radius / 2.0)
    mod2 = abs(center) ** 2
    denom = 1.0 - s * s * mod2
    return center * (1.0 - s * s) / denom, s * (1.0 - mod2) / denom


def e_to_h(e_center: complex, e_radius: float) -> Tuple[complex, float]:
    """Hyperbolic center and radius of a euclidean circle inside the disc."""
    dist = abs(e_center)
    u = e_center / dist if dist > 0 else 1.0 + 0j
    lo, hi = dist - e_radius, dist + e_radius
    if hi >= 1.0:
        raise GeometryError("Circle is not inside the unit disc", context={"center": str(e_center)})
    h_lo, h_hi = 2.0 * math.atanh(lo), 2.0 * math.atanh(hi)
    mid = 0.5 * (h_lo + h_hi)
    return math.tanh(mid / 2.0) * u, 0.5 * (h_hi - h_lo)


def horocycle_radius_tangent_at_origin(t: float, phi: float) -> float:
    """Euclidean radius of the horocycle at +1 overlapping the circle |z| = t by phi."""
    return (1.0 - t * t) / (2.0 * (1.0 + t * math.cos(phi)))


def circumcircle(p1: complex, p2: complex, p3: complex) -> Tuple[complex, float]:
    """Circle through three points."""
    a, b = p2 - p1, p3 - p1
    d = 2.0 * (a.real * b.imag - a.imag * b.real)
    if abs(d) < 1e-300:
        raise GeometryError("Collinear points have no circumcircle")
    a2, b2 = abs(a) ** 2, abs(b) ** 2
    ux = (b.imag * a2 - a.imag * b2) / d
    uy = (a.real * b2 - b.real * a2) / d
    center = p1 + complex(ux, uy)
    return center, abs(center - p1)


# ---------------------------------------------------------------------------
# Circles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Circle:
    """A realized circle with its euclidean view.

    Hyperbolic: center is the hyperbolic center in the disc, or the ideal point
    for a horocycle (radius = inf). Euclidean: center and radius as given.
    """
    geometry: Geometry
    center: complex
    radius: float
    e_center: complex
    e_radius: float

    @classmethod
    def euclidean(cls, center: complex, radius: float) -> "Circle":
        return cls(Geometry.EUCLIDEAN, complex(center), float(radius), complex(center), float(radius))

    @classmethod
    def hyperbolic(cls, center: complex, radius: float) -> "Circle":
        center = complex(center)
        e_center, e_radius = h_to_e(center, radius)
        return cls(Geometry.HYPERBOLIC, center, float(radius), e_center, e_radius)

    @classmethod
    def horocycle(cls, ideal: complex, e_radius: float) -> "Circle":
        ideal = complex(ideal) / abs(ideal)
        return cls(Geometry.HYPERBOLIC, ideal, INF, ideal * (1.0 - e_radius), float(e_radius))

    @property
    def is_horocycle(self) -> bool:
        return self.radius == INF

    @property
    def anchor(self) -> complex:
        """Center used for windings: ideal point for horocycles."""
        return self.center

    def transformed(self, m: "MobiusMap") -> "Circle":
        """Image under a map preserving this circle's geometry."""
        if self.geometry == Geometry.EUCLIDEAN:
            center, radius = m.apply_euclidean_circle(self.e_center, self.e_radius)
            return Circle.euclidean(center, radius)
        if self.is_horocycle:
            zeta = self.center
            q = m((1.0 - 2.0 * self.e_radius) * zeta)
            zeta_img = m(zeta)
            zeta_img = zeta_img / abs(zeta_img)
            inner = (q * zeta_img.conjugate()).real
            rho = abs(zeta_img - q) ** 2 / (2.0 * (1.0 - inner))
            return Circle.horocycle(zeta_img, rho)
        return Circle.hyperbolic(m(self.center), self.radius)


def measured_overlap(c1: Circle, c2: Circle) -> Optional[float]:
    """Overlap angle realized by two circles, None when one is a point."""
    if c1.e_radius <= 0.0 or c2.e_radius <= 0.0:
        return None
    d2 = abs(c1.e_center - c2.e_center) ** 2
    cos_phi = (d2 - c1.e_radius ** 2 - c2.e_radius ** 2) / (2.0 * c1.e_radius * c2.e_radius)
    return math.acos(max(-1.0, min(1.0, cos_phi)))


def point_on_circle_error(point: complex, circle: Circle) -> float:
    """Euclidean distance from a point to a circle's euclidean view."""
    return abs(abs(point - circle.e_center) - circle.e_radius)


# ---------------------------------------------------------------------------
# Möbius maps
# ---------------------------------------------------------------------------

class MobiusMap:
    """Orientation-preserving Möbius map z -> (a z + b) / (c z + d)."""

    def __init__(self, a: complex, b: complex, c: complex, d: complex):
        self.matrix = np.array([[a, b], [c, d]], dtype=complex)
        det = self.det
        scale = max(abs(x) for x in (a, b, c, d)) or 1.0
        if abs(det) < 1e-14 * scale * scale:
            raise SingularMatrix("Möbius matrix is singular", context={"det": str(det)})

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "MobiusMap":
        return cls(matrix[0, 0], matrix[0, 1], matrix[1, 0], matrix[1, 1])

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def rotation(cls, angle: float) -> "MobiusMap":
        return cls(cmath.exp(1j * angle), 0, 0, 1)

    @classmethod
    def disc_move(cls, a: complex) -> "MobiusMap":
        """Disc automorphism sending 0 to a, fixing the diameter through a."""
        a = complex(a)
        return cls(1, a, a.conjugate(), 1)

    @classmethod
    def disc_translation(cls, t: float) -> "MobiusMap":
        """Hyperbolic translation by distance t along the real diameter."""
        tau = math.tanh(t / 2.0)
        return cls(1, tau, tau, 1)

    @classmethod
    def euclidean_motion(cls, shift: complex, angle: float) -> "MobiusMap":
        return cls(cmath.exp(1j * angle), shift, 0, 1)

    @classmethod
    def points_to_01inf(cls, z1: complex, z2: complex, z3: complex) -> "MobiusMap":
        """Map sending z1, z2, z3 to 0, 1, inf."""
        return cls(z2 - z3, -z1 * (z2 - z3), z2 - z1, -z3 * (z2 - z1))

    @classmethod
    def points_to_points(cls, zs: Sequence[complex], ws: Sequence[complex]) -> "MobiusMap":
        """Map sending three distinct points onto three others."""
        return cls.points_to_01inf(*ws).inverse() @ cls.points_to_01inf(*zs)

    @property
    def det(self) -> complex:
        m = self.matrix
        return m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]

    def normalized(self) -> np.ndarray:
        """Matrix scaled to determinant 1."""
        return self.matrix / cmath.sqrt(self.det)

    def inverse(self) -> "MobiusMap":
        m = self.matrix
        return MobiusMap(m[1, 1], -m[0, 1], -m[1, 0], m[0, 0])

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other."""
        product = self.matrix @ other.matrix
        product = product / max(abs(product).max(), 1e-300)
        return MobiusMap.from_matrix(product)

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return self.compose(other)

    def __call__(self, z: complex) -> complex:
        m = self.matrix
        if z == INF:
            return INF if m[1, 0] == 0 else complex(m[0, 0] / m[1, 0])
        denom = m[1, 0] * z + m[1, 1]
        if denom == 0:
            return INF
        return complex((m[0, 0] * z + m[0, 1]) / denom)

    def trace(self) -> complex:
        n = self.normalized()
        return complex(n[0, 0] + n[1, 1])

    def frobenius_deviation(self) -> float:
        """Distance of the normalized matrix from +I or -I."""
        n = self.normalized()
        eye = np.eye(2)
        return float(min(np.linalg.norm(n - eye), np.linalg.norm(n + eye)))

    def classify(self, tol: float = 1e-9) -> MobiusClass:
        if self.frobenius_deviation() < tol:
            return MobiusClass.IDENTITY
        tr = self.trace()
        if abs(tr.imag) > tol:
            return MobiusClass.LOXODROMIC
        size = abs(tr.real)
        if abs(size - 2.0) <= tol:
            return MobiusClass.PARABOLIC
        return MobiusClass.ELLIPTIC if size < 2.0 else MobiusClass.HYPERBOLIC

    def translation_length(self) -> float:
        """Hyperbolic translation length 2 acosh(|tr| / 2), 0 for elliptic maps."""
        tr = self.trace()
        return abs((2.0 * cmath.acosh(tr / 2.0)).real)

    def displacement(self, base: complex) -> float:
        """Hyperbolic distance from base to its image."""
        return hyp_distance(base, self(base))

    def apply_euclidean_circle(self, center: complex, radius: float) -> Tuple[complex, float]:
        """Image of a plane circle, assumed to stay a circle."""
        m = self.matrix
        if m[1, 0] == 0:
            scale = abs(m[0, 0] / m[1, 1])
            return self(center), radius * scale
        points = [self(center + radius * cmath.exp(1j * k * 2.0 * math.pi / 3.0)) for k in range(3)]
        if any(p == INF for p in points):
            raise GeometryError("Circle passes through the pole of the map")
        return circumcircle(*points)

    def is_disc_automorphism(self, tol: float = 1e-9) -> bool:
        n = self.normalized()
        return (
            abs(n[1, 1] - n[0, 0].conjugate()) < tol and abs(n[1, 0] - n[0, 1].conjugate()) < tol
        ) or (
            abs(n[1, 1] + n[0, 0].conjugate()) < tol and abs(n[1, 0] + n[0, 1].conjugate()) < tol
        )

    def __repr__(self) -> str:
        n = self.normalized()
        return f"MobiusMap({n[0, 0]:.6g}, {n[0, 1]:.6g}, {n[1, 0]:.6g}, {n[1, 1]:.6g})"


def mobius_displacement(m: MobiusMap, base: complex, geom: Geometry = Geometry.HYPERBOLIC) -> float:
    """Displacement of base under m: hyperbolic distance, or euclidean in the plane."""
    if Geometry(geom) == Geometry.EUCLIDEAN:
        return abs(m(base) - base)
    return m.displacement(base)


# ---------------------------------------------------------------------------
# Standard placements and triple realization
# ---------------------------------------------------------------------------

def standard_pair(r0: float, r1: float, phi: float, geom: Geometry) -> Tuple[Circle, Circle]:
    """Two circles with overlap phi in standard position.

    A finite first circle sits at the origin with the second on the positive
    real axis. A horocycle first circle against a finite second one is placed
    at ideal point -1 with the second at the origin. Two horocycles sit at -1
    and +1 with equal euclidean radii.
    """
    geom = Geometry(geom)
    if geom == Geometry.EUCLIDEAN:
        return Circle.euclidean(0, r0), Circle.euclidean(_euc_length(r0, r1, math.cos(phi)), r1)
    if r0 == INF and r1 == INF:
        rho = 1.0 / (1.0 + math.cos(phi / 2.0))
        return Circle.horocycle(-1.0, rho), Circle.horocycle(1.0, rho)
    if r0 == INF:
        t = math.tanh(r1 / 2.0)
        return Circle.horocycle(-1.0, horocycle_radius_tangent_at_origin(t, phi)), Circle.hyperbolic(0, r1)
    return Circle.hyperbolic(0, r0), _placed_from_origin(r0, r1, phi, 0.0)


def _placed_from_origin(r0: float, r: float, phi: float, angle: float) -> Circle:
    """Hyperbolic circle of radius r overlapping the origin circle r0, in direction angle."""
    direction = cmath.exp(1j * angle)
    if r == INF:
        t = math.tanh(r0 / 2.0)
        return Circle.horocycle(direction, horocycle_radius_tangent_at_origin(t, phi))
    dist = edge_length(r0, r, phi, Geometry.HYPERBOLIC)
    return Circle.hyperbolic(math.tanh(dist / 2.0) * direction, r)


def realize_triple(
    radii: Sequence[float],
    overlaps: Sequence[float],
    geom: Geometry,
) -> Tuple[Circle, Circle, Circle]:
    """Realize a positively oriented triple of circles.

    Args:
        radii: (r0, r1, r2)
        overlaps: (phi01, phi12, phi20)
        geom: hyperbolic or euclidean

    Returns:
        Circles in canonical placement: the first finite circle at the origin,
        the next one on the positive real axis.
    """
    geom = Geometry(geom)
    r = [float(x) for x in radii]
    phi01, phi12, phi20 = (float(x) for x in overlaps)
    for x in r:
        _check_radius(x)
    if sum(1 for x in r if x == 0.0) >= 2:
        raise LemmaHypothesisViolated("At least two radii of a triple must be non-zero")
    if phi01 + phi12 + phi20 > math.pi + ALGEBRAIC_TOL:
        raise LemmaHypothesisViolated(
            "Overlap sum of a triple exceeds pi",
            context={"overlaps": [phi01, phi12, phi20]},
        )
    if geom == Geometry.EUCLIDEAN and INF in r:
        raise LemmaHypothesisViolated("Infinite radius in euclidean geometry")
    if all(x == INF for x in r):
        raise DegenerateFace("Face of three horocycles has no finite vertex")

    ov = {(0, 1): phi01, (1, 2): phi12, (2, 0): phi20}
    shift = next(k for k in range(3) if r[k] != INF)
    i0, i1, i2 = shift, (shift + 1) % 3, (shift + 2) % 3

    def phi(i: int, j: int) -> float:
        return ov[(i, j)] if (i, j) in ov else ov[(j, i)]

    theta = face_angle(r[i0], r[i1], r[i2], phi(i0, i1), phi(i0, i2), phi(i1, i2), geom)
    if geom == Geometry.EUCLIDEAN:
        c0 = Circle.euclidean(0, r[i0])
        c1 = Circle.euclidean(_euc_length(r[i0], r[i1], math.cos(phi(i0, i1))), r[i1])
        d2 = _euc_length(r[i0], r[i2], math.cos(phi(i0, i2)))
        c2 = Circle.euclidean(d2 * cmath.exp(1j * theta), r[i2])
    else:
        c0 = Circle.hyperbolic(0, r[i0])
        c1 = _placed_from_origin(r[i0], r[i1], phi(i0, i1), 0.0)
        c2 = _placed_from_origin(r[i0], r[i2], phi(i0, i2), theta)
    placed = {i0: c0, i1: c1, i2: c2}
    return placed[0], placed[1], placed[2]


# ---------------------------------------------------------------------------
# Sphere
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SphereCircle:
    """Spherical cap boundary: unit center vector and angular radius in (0, pi)."""
    center: Tuple[float, float, float]
    radius: float

    def angle_to(self, other: "SphereCircle") -> float:
        a, b = np.asarray(self.center, dtype=float), np.asarray(other.center, dtype=float)
        # atan2 keeps full precision near 0 and pi, where acos does not.
        return math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b)))

    def tangency_residual(self, other: "SphereCircle") -> float:
        """Zero when the two caps touch externally."""
        return abs(self.angle_to(other) - self.radius - other.radius)

    def transformed(self, m: "MobiusMap") -> "SphereCircle":
        """Image cap under a Möbius map acting through stereographic projection."""
        c = np.asarray(self.center, dtype=float)
        helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(c, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(c, e1)
        rim = [
            math.cos(self.radius) * c + math.sin(self.radius) * (math.cos(t) * e1 + math.sin(t) * e2)
            for t in (0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0)
        ]
        images = [to_sphere(m(from_sphere(p))) for p in rim]
        normal = np.cross(images[1] - images[0], images[2] - images[0])
        normal /= np.linalg.norm(normal)
        offset = float(np.dot(normal, images[0]))
        inside = to_sphere(m(from_sphere(c)))
        if float(np.dot(inside, normal)) < offset:
            normal, offset = -normal, -offset
        return SphereCircle(
            (float(normal[0]), float(normal[1]), float(normal[2])),
            math.acos(max(-1.0, min(1.0, offset))),
        )


def to_sphere(z: complex) -> np.ndarray:
    """Inverse stereographic projection from the north pole."""
    if z == INF:
        return np.array([0.0, 0.0, 1.0])
    mod2 = abs(z) ** 2
    return np.array([2.0 * z.real, 2.0 * z.imag, mod2 - 1.0]) / (mod2 + 1.0)


def from_sphere(p: Sequence[float]) -> complex:
    x, y, z = (float(v) for v in p)
    if z >= 1.0 - 1e-15:
        return INF
    return complex(x, y) / (1.0 - z)


def project_circle(e_center: complex, e_radius: float) -> SphereCircle:
    """Spherical image of a plane circle, interior mapped to the cap."""
    dist = abs(e_center)
    u = e_center / dist if dist > 0 else 1.0 + 0j
    lo = 2.0 * math.atan(dist - e_radius)
    hi = 2.0 * math.atan(dist + e_radius)
    mid = 0.5 * (lo + hi)
    center = (math.sin(mid) * u.real, math.sin(mid) * u.imag, -math.cos(mid))
    return SphereCircle(center, 0.5 * (hi - lo))


NORTH_HEMISPHERE = SphereCircle((0.0, 0.0, 1.0), math.pi / 2.0)
