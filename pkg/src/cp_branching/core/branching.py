"""Branch specifications, parameter schemes and branched packing builds.

Traditional branching raises a target angle sum. Singular and shifted
branching insert a black hole whose overlaps are set from dial parameters
and whose fall guy is pinned at radius zero; the parameter schemes derive
those dials from a target point in the maximal packing.
"""

import cmath
import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import root_scalar

from ..models.schemas import BranchSpec, JobStatus, ScanSample, ShiftedSpec, SingularSpec, TraditionalSpec
from .complex import (
    BlackHoleRecord,
    Complex,
    HoleKind,
    find_reflection,
    insert_shifted_blackhole,
    insert_singular_blackhole,
)
from .error_handling import (
    JumpsAdjacent,
    NonConvergence,
    NoReflection,
    NoSignChange,
    PackingError,
    PointOutsideCircle,
    PointOutsideInterstice,
    StarViolation,
)
from .geometry import INF, Geometry, MobiusMap, circumcircle, point_on_circle_error
from .layout import (
    Holonomy,
    Packing,
    contact_point,
    develop,
    event_horizon_winding,
    generator_loops,
    holonomy,
)
from .solver import (
    TWO_PI,
    Label,
    OverlapMap,
    SolveReport,
    StarStatus,
    angle_sum,
    check_star,
    check_star_star,
    solve_label,
    star_report,
)

logger = logging.getLogger(__name__)

Mapper = Callable[[Callable[[float], Any], Sequence[float]], List[Any]]


def _sequential_map(fn: Callable[[float], Any], params: Sequence[float]) -> List[Any]:
    return [fn(p) for p in params]


# ---------------------------------------------------------------------------
# Traditional branching
# ---------------------------------------------------------------------------

def traditional_spec(K: Complex, v: int, order: int = 1) -> TraditionalSpec:
    """Spec raising the angle sum at v to 2*pi*(order + 1)."""
    spec = TraditionalSpec(vertex=v, order=order)
    if not K.is_interior(v):
        raise StarViolation(f"Branch vertex {v} is on the boundary", context={"vertex": v})
    check = check_star(K, OverlapMap(), {v: spec.target}, {v}, K.flower(v).petals)
    if check.status != StarStatus.STRICT:
        raise StarViolation(
            f"Vertex {v} with {len(K.flower(v))} petals cannot branch to order {order}",
            context=check.to_dict(),
        )
    if order >= 2:
        logger.warning(f"Branch order {order} at vertex {v} is experimental")
    return spec


# ---------------------------------------------------------------------------
# Singular parameters
# ---------------------------------------------------------------------------

def _interstice_frame(PK: Packing, face: Sequence[int]) -> Tuple[Tuple[complex, complex, complex], complex, float]:
    """Contact points opposite v1, v2, v3 and the circle through them."""
    v1, v2, v3 = face
    c = PK.circles
    taus = (contact_point(c[v2], c[v3]), contact_point(c[v3], c[v1]), contact_point(c[v1], c[v2]))
    center, radius = circumcircle(*taus)
    return taus, center, radius


def _check_in_interstice(PK: Packing, face: Sequence[int], p: complex, center: complex, radius: float) -> None:
    if abs(p - center) >= radius:
        raise PointOutsideInterstice(f"Point {p} is outside the interstice", context={"face": list(face)})
    for v in face:
        circle = PK.circles[v]
        if abs(p - circle.e_center) <= circle.e_radius:
            raise PointOutsideInterstice(
                f"Point {p} lies inside the circle of vertex {v}", context={"face": list(face)}
            )


def singular_params(PK: Packing, face: Sequence[int], p: complex) -> Tuple[float, float, float]:
    """Dials (gamma1, gamma2, gamma3) for a branch point p inside the interstice of face.

    The circle D through the three contact points is treated as a disc
    model; alpha_j is the angle at p subtended by v_j's side of the
    interstice and gamma_j = pi - alpha_j.
    So gamma_j shrinks as p moves toward v_j and tends to 0 as p reaches
    v_j's side of the interstice.
    """
    taus, center, radius = _interstice_frame(PK, face)
    p = complex(p)
    _check_in_interstice(PK, face, p, center, radius)
    q = (p - center) / radius
    to_origin = MobiusMap(1, -q, -q.conjugate(), 1)
    sigma = [cmath.phase(to_origin((t - center) / radius)) for t in taus]
    gammas = []
    for j in range(3):
        a, b = sigma[(j + 1) % 3], sigma[(j + 2) % 3]
        gap = (b - a) % (2.0 * math.pi)
        # The side facing v_j is the arc from a to b that avoids sigma_j.
        if (sigma[j] - a) % (2.0 * math.pi) < gap:
            gap = 2.0 * math.pi - gap
        gammas.append(math.pi - gap)
    gammas[2] = math.pi - gammas[0] - gammas[1]
    logger.debug(f"Singular dials for face {tuple(face)}: {[g / math.pi for g in gammas]} pi")
    return gammas[0], gammas[1], gammas[2]


def interstice_center(PK: Packing, face: Sequence[int]) -> complex:
    """Point of the interstice at which the three dials are equal."""
    taus, center, radius = _interstice_frame(PK, face)
    local = [(t - center) / radius for t in taus]
    turn = ((local[1] - local[0]) * (local[2] - local[0]).conjugate()).imag
    omega = cmath.exp(2j * math.pi / 3.0)
    targets = (1.0, omega, omega * omega) if turn < 0 else (1.0, omega * omega, omega)
    m = MobiusMap.points_to_points(local, targets)
    return center + radius * m.inverse()(0j)


# ---------------------------------------------------------------------------
# Shifted parameters
# ---------------------------------------------------------------------------

def _petal_directions(K: Complex, PK: Packing, v: int) -> List[float]:
    base = PK.circles[v]
    return [cmath.phase(contact_point(base, PK.circles[w]) - base.e_center) for w in K.flower(v).petals]


def _valid_jumps(n: int, a: int, b: int) -> bool:
    return a != b and (b - a) % n not in (1, n - 1)


def shifted_params(K: Complex, PK: Packing, v: int, p: complex) -> Tuple[int, int, float, float]:
    """Jumps and dials (j1, j2, gamma1, gamma2) for a branch point p inside v's circle.

    The geodesic of v's disc through p orthogonal to the ray from the center
    cuts off the arc of the circle that is handed to the second twin. Each
    arc endpoint selects the first petal contact at or beyond it as a jump,
    and its dial is the endpoint's fractional position between that contact
    and the preceding one.
    """
    circle = PK.circles[v]
    petals = K.flower(v).petals
    n = len(petals)
    u = (complex(p) - circle.e_center) / circle.e_radius
    if abs(u) >= 1.0:
        raise PointOutsideCircle(f"Point {p} is outside the circle of vertex {v}", context={"vertex": v})
    taus = _petal_directions(K, PK, v)
    psi = cmath.phase(u) if abs(u) > 1e-12 else taus[0]
    beta = math.acos(min(1.0, 2.0 * abs(u) / (1.0 + abs(u) ** 2)))
    ends = (psi - beta, psi + beta)

    picks = []
    for end in ends:
        offsets = [(t - end) % (2.0 * math.pi) for t in taus]
        k = int(np.argmin(offsets))
        prev = (k - 1) % n
        span = (taus[k] - taus[prev]) % (2.0 * math.pi)
        gamma = math.pi * offsets[k] / span if span > 0 else 0.0
        picks.append([k, min(max(gamma, 0.0), math.pi)])

    while not _valid_jumps(n, picks[0][0], picks[1][0]):
        logger.warning(f"Jumps at vertex {v} coincide or touch; advancing the second jump")
        picks[1] = [(picks[1][0] + 1) % n, 0.0]

    (a, g1), (b, g2) = picks
    logger.info(f"Shifted dials at {v}: jumps {(petals[a], petals[b])}, gammas {(g1, g2)}")
    return petals[a], petals[b], g1, g2


def shifted_spec_from_point(K: Complex, PK: Packing, v: int, p: complex) -> ShiftedSpec:
    j1, j2, g1, g2 = shifted_params(K, PK, v, p)
    return ShiftedSpec(vertex=v, jumps=(j1, j2), gamma1=g1, gamma2=g2)


def symmetric_family(
    K: Complex, v: int, gamma1: float, reflection: Optional[Mapping[int, int]] = None
) -> ShiftedSpec:
    """Shifted spec at a six-petal midline vertex with gamma2 = pi - gamma1.

    The jumps are paired by the reflection: j1 mirrors w2 and j2 mirrors w1,
    where w_i is the petal preceding j_i, so the reflection carries the hole
    onto itself with the chaperones exchanged. Without an explicit reflection
    the one fixing v and swapping the boundary components is used.
    """
    petals = K.flower(v).petals
    n = len(petals)
    if n != 6:
        raise StarViolation(f"Symmetric family needs a six-petal vertex, {v} has {n}")
    if reflection is None:
        reflection = find_reflection(K, [v], exchange_boundaries=True)
    first = reflection.get(petals[0], 0)
    shift = petals.index(first) if first in petals else -1
    if reflection.get(v) != v or shift < 0 or any(
        reflection.get(petals[k]) != petals[(shift - k) % n] for k in range(n)
    ):
        raise NoReflection(f"Map does not reflect the flower of {v}", context={"vertex": v})
    # j1 = petals[a], j2 = petals[b] with reflection(w2) = j1 forces a + b = shift + 1
    pairs = []
    for a in range(n):
        b = (shift + 1 - a) % n
        if _valid_jumps(n, a, b):
            pairs.append((abs((b - a) % n - n // 2), a, b))
    if not pairs:
        raise JumpsAdjacent(f"Reflection at {v} leaves no valid jump pair", context={"vertex": v})
    _, a, b = min(pairs)
    return ShiftedSpec(vertex=v, jumps=(petals[a], petals[b]), gamma1=gamma1, gamma2=math.pi - gamma1)


# ---------------------------------------------------------------------------
# Builds
# ---------------------------------------------------------------------------

@dataclass
class BranchedResult:
    """Modified complex, its label and packing, and build diagnostics."""
    complex: Complex
    label: Label
    packing: Optional[Packing]
    overlaps: OverlapMap
    targets: Dict[int, float]
    pinned: List[int]
    records: List[BlackHoleRecord]
    report: SolveReport
    diagnostics: Dict[str, Any] = field(default_factory=dict)


def assemble(
    K: Complex, specs: Sequence[BranchSpec]
) -> Tuple[Complex, OverlapMap, Dict[int, float], List[int], List[BlackHoleRecord]]:
    """Apply surgery for every spec and collect overlaps, targets and pins."""
    current = K
    overlaps: Dict[Tuple[int, int], float] = {}
    targets: Dict[int, float] = {}
    pinned: List[int] = []
    records: List[BlackHoleRecord] = []
    for spec in specs:
        if isinstance(spec, TraditionalSpec):
            traditional_spec(current, spec.vertex, spec.order)
            targets[spec.vertex] = spec.target
            continue
        if isinstance(spec, SingularSpec):
            current, record = insert_singular_blackhole(current, spec.face)
            v1, v2, v3 = record.original_face  # type: ignore[misc]
            h1, h2, h3 = record.chaperones
            g1, g2, g3 = spec.gammas
            overlaps.update({
                (v1, h3): g1, (v1, h2): g1,
                (v2, h3): g2, (v2, h1): g2,
                (v3, h1): g3, (v3, h2): g3,
            })
        else:
            spec = spec.canonical(current.flower(spec.vertex).petals)
            current, record = insert_shifted_blackhole(current, spec.vertex, *spec.jumps)
            (j1, j2), (w1, w2) = record.jump_vertices, record.preceding  # type: ignore[misc]
            h1, h2 = record.chaperones
            overlaps.update({
                (h1, w1): spec.gamma1, (h1, j1): math.pi - spec.gamma1,
                (h2, w2): spec.gamma2, (h2, j2): math.pi - spec.gamma2,
            })
        records.append(record)
        if spec.unbranched:
            targets[record.fall_guy] = TWO_PI
        else:
            targets[record.fall_guy] = 2.0 * TWO_PI
            pinned.append(record.fall_guy)
    return current, OverlapMap(overlaps), targets, pinned, records


def _hole_diagnostics(P: Packing, label: Label, record: BlackHoleRecord, K: Complex) -> Dict[str, Any]:
    g = record.fall_guy
    value = P.circles[g].e_center
    petals = K.flower(g).petals
    info: Dict[str, Any] = {
        "kind": record.kind.value,
        "fall_guy": g,
        "fall_guy_radius": label[g],
        "branch_value": [value.real, value.imag],
        "concurrency": max(point_on_circle_error(value, P.circles[w]) for w in petals),
    }
    try:
        info["horizon_winding"] = event_horizon_winding(P, record)
    except PackingError as exc:
        info["horizon_winding_error"] = exc.message
    if record.kind == HoleKind.SHIFTED:
        t1, t2 = record.twins  # type: ignore[misc]
        info["twin_radii"] = [label[t1], label[t2]]
    return info


def build_branched(
    K: Complex,
    specs: Sequence[BranchSpec],
    bc: Optional[Mapping[int, float]] = None,
    geometry: Geometry = Geometry.HYPERBOLIC,
    tol: float = 1e-8,
    max_iters: int = 50000,
    layout: bool = True,
    **options,
) -> BranchedResult:
    """Surgery, label solve and layout for a list of branch specs.

    Holonomy of a multiply connected complex is reported in the diagnostics,
    not raised.
    """
    geometry = Geometry(geometry)
    Kt, Phi, targets, pinned, records = assemble(K, specs)
    if bc is None:
        if geometry != Geometry.HYPERBOLIC:
            raise PackingError("Euclidean builds need an explicit boundary condition")
        bc = {v: INF for v in Kt.boundary_vertices}
    label, report = solve_label(Kt, Phi, targets, bc, pinned, tol, max_iters, geometry, **options)

    diagnostics: Dict[str, Any] = {
        "star_star": check_star_star(Kt, Phi).passed,
        "star": [c.to_dict() for c in star_report(Kt, Phi, targets, pinned)],
        "residual": report.residual,
        "sweeps": report.sweeps,
    }
    for spec in specs:
        if isinstance(spec, TraditionalSpec):
            diagnostics.setdefault("angle_sums", {})[spec.vertex] = angle_sum(Kt, label, Phi, spec.vertex, geometry)

    packing = None
    if layout:
        packing = develop(Kt, label, Phi, geometry)
        diagnostics["holes"] = [_hole_diagnostics(packing, label, r, Kt) for r in records]
        loops = generator_loops(Kt)
        diagnostics["holonomy"] = [holonomy(Kt, label, Phi, loop, geometry).to_dict() for loop in loops]
    return BranchedResult(Kt, label, packing, Phi, targets, pinned, records, report, diagnostics)


# ---------------------------------------------------------------------------
# Holonomy search
# ---------------------------------------------------------------------------

@dataclass
class SearchResult:
    gamma1: float
    holonomy: Holonomy
    result: BranchedResult
    scan: List[ScanSample]


def _family_holonomy(
    K: Complex,
    fixed: Sequence[BranchSpec],
    vertex: int,
    loop_index: int,
    reflection: Mapping[int, int],
    solver: Mapping[str, Any],
    gamma1: float,
) -> Tuple[float, float]:
    specs = list(fixed) + [symmetric_family(K, vertex, gamma1, reflection)]
    built = build_branched(K, specs, layout=False, **solver)
    loop = generator_loops(built.complex)[loop_index]
    h = holonomy(built.complex, built.label, built.overlaps, loop)
    return h.signed, h.displacement


def _scan_entry(evaluate: Callable[[float], Tuple[float, float]], gamma: float) -> Tuple[Optional[float], Optional[float], Optional[str]]:
    try:
        signed, displacement = evaluate(gamma)
        return signed, displacement, None
    except PackingError as exc:
        return None, None, exc.message


def annihilate_holonomy(
    K: Complex,
    fixed_spec: Union[BranchSpec, Sequence[BranchSpec]],
    vertex: int,
    loop_index: int = 0,
    tol_h: float = 1e-6,
    samples: int = 33,
    mapper: Optional[Mapper] = None,
    reflection: Optional[Mapping[int, int]] = None,
    **solver,
) -> SearchResult:
    """Find gamma1 for the symmetric shifted family at vertex that kills the holonomy.

    A coarse scan over (0, pi) looks for a sign change of the signed
    translation along the generator loop, then brentq refines it. With
    tol_h = inf the scan minimizer is returned.
    The reflection pairing the jumps defaults to the one fixing vertex and
    swapping the boundary components.
    """
    fixed = [fixed_spec] if isinstance(fixed_spec, (TraditionalSpec, SingularSpec, ShiftedSpec)) else list(fixed_spec)
    if reflection is None:
        reflection = find_reflection(K, [vertex], exchange_boundaries=True)
    reflection = dict(reflection)
    evaluate = functools.partial(_family_holonomy, K, tuple(fixed), vertex, loop_index, reflection, dict(solver))
    grid = [float(x) for x in np.linspace(0.0, math.pi, samples + 2)[1:-1]]
    mapper = mapper or _sequential_map
    entries = mapper(functools.partial(_scan_entry, evaluate), grid)

    scan = []
    for index, (gamma, entry) in enumerate(zip(grid, entries)):
        signed, displacement, error = entry if entry is not None else (None, None, "sample raised")
        scan.append(ScanSample(
            index=index,
            parameter=gamma,
            status=JobStatus.FAILED if error else JobStatus.COMPLETED,
            value=signed,
            displacement=displacement,
            error=error,
        ))
    good = [s for s in scan if s.status == JobStatus.COMPLETED]
    if not good:
        raise NoSignChange("Every scan sample failed", context={"scan": [s.model_dump(mode="json") for s in scan]})

    def finish(gamma: float) -> SearchResult:
        specs = fixed + [symmetric_family(K, vertex, gamma, reflection)]
        built = build_branched(K, specs, **solver)
        loop = generator_loops(built.complex)[loop_index]
        h = holonomy(built.complex, built.label, built.overlaps, loop)
        return SearchResult(gamma, h, built, scan)

    if math.isinf(tol_h):
        best = min(good, key=lambda s: s.displacement)  # type: ignore[arg-type,return-value]
        return finish(best.parameter)

    brackets = [
        (a, b) for a, b in zip(good, good[1:])
        if a.value is not None and b.value is not None and a.value * b.value <= 0.0
    ]
    if not brackets:
        raise NoSignChange(
            "Signed holonomy never changes sign over the scan",
            context={"scan": [s.model_dump(mode="json") for s in scan]},
        )
    lo, hi = min(brackets, key=lambda pair: abs(pair[0].value) + abs(pair[1].value))  # type: ignore[arg-type]
    if lo.value == 0.0:
        root = lo.parameter
    elif hi.value == 0.0:
        root = hi.parameter
    else:
        solution = root_scalar(
            lambda g: evaluate(g)[0],
            bracket=(lo.parameter, hi.parameter),
            method="brentq",
            xtol=1e-13,
            maxiter=100,
        )
        root = float(solution.root)
    found = finish(root)
    logger.info(f"Holonomy search: gamma1 = {root:.12f}, displacement {found.holonomy.displacement:.3e}")
    if found.holonomy.displacement >= tol_h:
        raise NonConvergence(
            f"Refined gamma1 = {root:.12f} leaves displacement {found.holonomy.displacement:.3e}",
            context={"gamma1": root, "displacement": found.holonomy.displacement},
        )
    return found


# ---------------------------------------------------------------------------
# Diagnostics
# ---------------------------------------------------------------------------

def restricted_vertices(K: Complex, result: BranchedResult) -> List[int]:
    """Original vertices on or outside every horizon."""
    inside = set()
    for record in result.records:
        if record.original_vertex is not None:
            inside.add(record.original_vertex)
    return [v for v in K.vertices if v not in inside]


def _restricted_change(
    K: Complex,
    spec: Union[SingularSpec, ShiftedSpec],
    parameter: str,
    base: Mapping[int, float],
    keep: Sequence[int],
    solver: Mapping[str, Any],
    delta: float,
) -> float:
    moved = type(spec).model_validate({**spec.model_dump(), parameter: getattr(spec, parameter) - delta})
    other = build_branched(K, [moved], layout=False, **solver)
    return max(abs(other.label[v] - base[v]) for v in keep if base[v] != INF)


def continuity_sweep(
    K: Complex,
    spec: Union[SingularSpec, ShiftedSpec],
    parameter: str = "gamma1",
    deltas: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    mapper: Optional[Mapper] = None,
    **solver,
) -> List[Dict[str, float]]:
    """Largest restricted-label change for each perturbation of one dial."""
    base = build_branched(K, [spec], layout=False, **solver)
    keep = restricted_vertices(K, base)
    mapper = mapper or _sequential_map
    perturbed = functools.partial(_restricted_change, K, spec, parameter, dict(base.label), tuple(keep), dict(solver))
    changes = mapper(perturbed, list(deltas))
    return [
        {"delta": float(d), "change": float(c) if c is not None else math.nan}
        for d, c in zip(deltas, changes)
    ]


def schwarz_ratios(domain: Mapping[int, float], image: Mapping[int, float]) -> Dict[int, float]:
    """Image over domain radius at every vertex with a finite positive domain radius."""
    return {
        v: image[v] / r for v, r in sorted(domain.items())
        if v in image and 0.0 < r < INF and image[v] < INF
    }
