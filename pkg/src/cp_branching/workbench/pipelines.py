"""Named constructions: maximal packings, branched packings and the three
discrete functions (Blaschke product, Ahlfors function, Weierstrass function).

Each pipeline returns a PipelineRun holding the report and the packings;
write_outputs puts them on disk as <name>.report.json, <name>.domain.json,
<name>.image.json, <name>.svg plus CSV traces, and <name>.complex.json when
surgery cut black holes.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from .. import __version__
from ..config import get_settings
from ..core.branching import (
    BranchedResult,
    Mapper,
    annihilate_holonomy,
    build_branched,
    continuity_sweep,
    interstice_center,
    schwarz_ratios,
    shifted_spec_from_point,
    singular_params,
    symmetric_family,
    traditional_spec,
)
from ..core.complex import Complex, SurfaceType, find_reflection, puncture, shift_id
from ..core.error_handling import (
    ErrorCategory,
    HolonomyNontrivial,
    PackingError,
    PointOutsideCircle,
    PointOutsideInterstice,
    SingularMatrix,
    WindingMismatch,
)
from ..core.geometry import (
    INF,
    NORTH_HEMISPHERE,
    Geometry,
    MobiusMap,
    SphereCircle,
    circumcircle,
    from_sphere,
)
from ..core.layout import (
    Packing,
    annulus_modulus,
    boundary_winding,
    check_closure,
    contact_point,
    crosscut_mismatch,
    deck_transformation,
    develop,
    generator_loops,
    holonomy,
    holonomy_in_packing,
    normalize_disc,
    normalize_imaginary_axis,
    stereographic_project,
    torus_periods,
)
from ..core.solver import OverlapMap, SolveReport, max_label
from ..jobs import ScanManager
from ..models.schemas import (
    BranchSpec,
    FunctionKind,
    PipelineReport,
    ShiftedSpec,
    SingularSpec,
    TraditionalSpec,
)
from .io import caps_to_document, packing_to_document, save_complex, write_json, write_scan_csv
from .svg import render_sphere_svg, render_svg, roles_from_records, write_svg

logger = logging.getLogger(__name__)

BranchMode = str  # traditional | singular | shifted
REPAIR_MODES = ("none", "shifted", "shifted_search")


@dataclass
class PipelineRun:
    """Report plus the in-memory artifacts it refers to."""
    report: PipelineReport
    domain: Optional[Packing] = None
    image: Optional[Packing] = None
    caps: Optional[Dict[int, SphereCircle]] = None
    complex: Optional[Complex] = None
    roles: Dict[int, str] = field(default_factory=dict)
    solves: Dict[str, SolveReport] = field(default_factory=dict)


def solver_options(tol: Optional[float] = None, max_iters: Optional[int] = None) -> Dict[str, Any]:
    """Solver keyword arguments from settings, with explicit overrides."""
    options = get_settings().get_solver_config()
    if tol is not None:
        options["tol"] = tol
    if max_iters is not None:
        options["max_iters"] = max_iters
    return options


def _report(kind: FunctionKind, name: str, **fields: Any) -> PipelineReport:
    return PipelineReport(kind=kind, name=name, version=__version__, **fields)


def _branch_entries(specs: Sequence[BranchSpec], built: BranchedResult) -> List[Dict[str, Any]]:
    holes = iter(built.diagnostics.get("holes", []))
    entries = []
    for spec in specs:
        entry: Dict[str, Any] = {"spec": spec.model_dump(mode="json")}
        if isinstance(spec, TraditionalSpec):
            entry["angle_sum"] = built.diagnostics["angle_sums"][spec.vertex]
            if built.packing is not None:
                value = built.packing.circles[spec.vertex].e_center
                entry["branch_value"] = [value.real, value.imag]
        else:
            entry.update(next(holes, {}))
        entries.append(entry)
    return entries


def _expected_winding(specs: Sequence[BranchSpec]) -> int:
    total = 1
    for spec in specs:
        if isinstance(spec, TraditionalSpec):
            total += spec.order
        elif not spec.unbranched:
            total += 1
    return total


def _default_alpha(K: Complex) -> int:
    centre = K.meta.get("center")
    if centre is not None:
        return int(centre)
    return K.interior_vertices[0]


# ---------------------------------------------------------------------------
# Maximal and branched packings
# ---------------------------------------------------------------------------

def maxpack(
    K: Complex,
    name: str = "maxpack",
    alpha: Optional[int] = None,
    gamma: Optional[int] = None,
    **solver: Any,
) -> PipelineRun:
    """Maximal packing with the normalization suited to the surface type."""
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    label, solve = max_label(K, **options)
    surface = K.surface_type
    logger.info(f"Maximal label for {surface.value} complex solved in {solve.sweeps} sweeps")
    report = _report(FunctionKind.MAXPACK, name, residuals={"label": solve.residual})

    if surface == SurfaceType.TORUS:
        P = develop(K, label, OverlapMap(), Geometry.EUCLIDEAN)
        report.extra.update(torus_periods(K, label))
        report.normalization = {"kind": "euclidean_base_face"}
    else:
        P = develop(K, label, OverlapMap(), Geometry.HYPERBOLIC)
        if len(K.boundary_cycles) == 1 and K.genus == 0:
            alpha = alpha or _default_alpha(K)
            gamma = gamma or K.boundary_cycles[0][0]
            P = normalize_disc(P, alpha, gamma)
            report.normalization = {"kind": "disc", "alpha": alpha, "gamma": gamma}
            report.residuals["closure"] = check_closure(K, P, OverlapMap())
            report.windings["boundary"] = boundary_winding(P, K.boundary_cycles[0])
        elif surface == SurfaceType.ANNULUS:
            deck = deck_transformation(K, label, OverlapMap())
            report.holonomy.append(deck.to_dict())
            report.extra["annulus_modulus"] = annulus_modulus(deck)
    return PipelineRun(report, domain=P, complex=K, solves={"domain": solve})


def branchpack(
    K: Complex,
    specs: Sequence[BranchSpec],
    name: str = "branchpack",
    **solver: Any,
) -> PipelineRun:
    """Branched packing for explicit specs, reported without normalization."""
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    built = build_branched(K, specs, **options)
    report = _report(
        FunctionKind.BRANCHPACK,
        name,
        branch=_branch_entries(specs, built),
        holonomy=built.diagnostics.get("holonomy", []),
        residuals={"label": built.report.residual},
        star=built.diagnostics["star"],
        star_star=built.diagnostics["star_star"],
    )
    if built.packing is not None and len(K.boundary_cycles) == 1 and K.genus == 0:
        report.windings["boundary"] = boundary_winding(built.packing, K.boundary_cycles[0])
    roles = roles_from_records(built.records, [s.vertex for s in specs if isinstance(s, TraditionalSpec)])
    return PipelineRun(report, image=built.packing, complex=built.complex, roles=roles, solves={"image": built.report})


# ---------------------------------------------------------------------------
# Discrete Blaschke product
# ---------------------------------------------------------------------------

def _locate_interstice(K: Complex, P: Packing, p: complex) -> Tuple[int, int, int]:
    for face in K.faces:
        if any(P.circles[v].is_horocycle for v in face):
            continue
        a, b, c = (P.circles[v] for v in face)
        center, radius = circumcircle(contact_point(b, c), contact_point(c, a), contact_point(a, b))
        inside_circle = any(abs(p - x.e_center) <= x.e_radius for x in (a, b, c))
        if abs(p - center) < radius and not inside_circle:
            return face
    raise PointOutsideInterstice(f"Point {p} is not inside any interstice")


def _locate_circle(K: Complex, P: Packing, p: complex) -> int:
    for v in K.interior_vertices:
        circle = P.circles[v]
        if abs(p - circle.e_center) < circle.e_radius:
            return v
    raise PointOutsideCircle(f"Point {p} is not inside any interior circle")


def _generalized_spec(
    K: Complex, PK: Packing, mode: BranchMode, vertex: Optional[int], point: Optional[complex]
) -> BranchSpec:
    if mode == "singular":
        if point is None:
            face = K.faces_at(vertex)[0]  # type: ignore[arg-type]
            point = interstice_center(PK, face)
        else:
            face = _locate_interstice(K, PK, point)
        return SingularSpec.from_gammas(face, singular_params(PK, face, point))
    if point is None:
        point = PK.circles[vertex].e_center  # type: ignore[index]
    else:
        vertex = _locate_circle(K, PK, point)
    return shifted_spec_from_point(K, PK, vertex, point)  # type: ignore[arg-type]


def blaschke(
    K: Complex,
    v1: Optional[int] = None,
    v2: Optional[int] = None,
    mode: BranchMode = "traditional",
    points: Optional[Sequence[complex]] = None,
    name: str = "blaschke",
    alpha: Optional[int] = None,
    gamma: Optional[int] = None,
    **solver: Any,
) -> PipelineRun:
    """Two-point branched self-map of the disc.

    Branch sites are vertices v1, v2 or, for the generalized modes, points
    p1, p2 in the normalized maximal packing. Domain and image are both
    normalized with alpha at 0 and gamma's ideal point at i.
    """
    if mode not in ("traditional", "singular", "shifted"):
        raise PackingError(f"Unknown branch mode: {mode}", category=ErrorCategory.USAGE)
    if K.surface_type != SurfaceType.DISC:
        raise PackingError(
            f"Blaschke products need a disc complex, got {K.surface_type.value}",
            category=ErrorCategory.USAGE,
        )
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    alpha = alpha or _default_alpha(K)
    gamma = gamma or K.boundary_cycles[0][0]

    domain_label, domain_solve = max_label(K, **options)
    PK = normalize_disc(develop(K, domain_label, OverlapMap()), alpha, gamma)

    sites: List[Tuple[Optional[int], Optional[complex]]]
    if points:
        sites = [(None, complex(p)) for p in points]
    else:
        sites = [(v1, None), (v2, None)]
    if mode == "traditional":
        if any(v is None for v, _ in sites):
            raise PackingError("Traditional branching needs branch vertices", category=ErrorCategory.USAGE)
        specs: List[BranchSpec] = [traditional_spec(K, v) for v, _ in sites]  # type: ignore[arg-type]
    else:
        specs = [_generalized_spec(K, PK, mode, v, p) for v, p in sites]
    logger.info(f"Blaschke branch specs: {[s.model_dump(mode='json') for s in specs]}")

    built = build_branched(K, specs, **options)
    image = normalize_disc(built.packing, alpha, gamma)  # type: ignore[arg-type]
    slack = get_settings().winding_slack
    winding = boundary_winding(image, K.boundary_cycles[0], slack=slack)

    ratios = schwarz_ratios(domain_label, built.label)
    for record in built.records:
        if record.original_vertex is not None:
            ratios.pop(record.original_vertex, None)
    report = _report(
        FunctionKind.BLASCHKE,
        name,
        normalization={"kind": "disc", "alpha": alpha, "gamma": gamma},
        windings={"boundary": winding},
        branch=_branch_entries(specs, built),
        holonomy=built.diagnostics.get("holonomy", []),
        residuals={"domain_label": domain_solve.residual, "image_label": built.report.residual},
        star=built.diagnostics["star"],
        star_star=built.diagnostics["star_star"],
        extra={
            "mode": mode,
            "expected_winding": _expected_winding(specs),
            "schwarz_max_ratio": max(ratios.values()) if ratios else None,
            "schwarz_ratios": {str(v): r for v, r in ratios.items()},
        },
    )
    branch_vertices = [s.vertex for s in specs if isinstance(s, TraditionalSpec)]
    return PipelineRun(
        report,
        domain=PK,
        image=image,
        complex=built.complex,
        roles=roles_from_records(built.records, branch_vertices),
        solves={"domain": domain_solve, "image": built.report},
    )


# ---------------------------------------------------------------------------
# Discrete Ahlfors function
# ---------------------------------------------------------------------------

def ahlfors(
    K: Complex,
    v1: int,
    v2: int,
    repair: str = "none",
    name: str = "ahlfors",
    samples: Optional[int] = None,
    mapper: Optional[Mapper] = None,
    **solver: Any,
) -> PipelineRun:
    """Two-sheeted branched map of an annulus onto the disc.

    With repair "none" a non-trivial generator holonomy is fatal; with
    "shifted_search" the branching at v2 is replaced by the symmetric
    shifted family and its dial is searched until the holonomy vanishes.
    """
    if repair not in REPAIR_MODES:
        raise PackingError(f"Unknown repair mode: {repair}", category=ErrorCategory.USAGE)
    if K.surface_type != SurfaceType.ANNULUS:
        raise PackingError(
            f"Ahlfors functions need an annulus complex, got {K.surface_type.value}",
            category=ErrorCategory.USAGE,
        )
    settings = get_settings()
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    tol_h = settings.holonomy_tol

    domain_label, domain_solve = max_label(K, **options)
    deck = deck_transformation(K, domain_label, OverlapMap())
    domain = normalize_imaginary_axis(develop(K, domain_label, OverlapMap()), v1, v2)

    scan = []
    if repair == "none":
        specs: List[BranchSpec] = [traditional_spec(K, v1), traditional_spec(K, v2)]
        built = build_branched(K, specs, **options)
        h = holonomy(built.complex, built.label, built.overlaps, _first_loop(built))
        gamma_star = None
    else:
        scan_config = settings.get_scan_config()
        if mapper is None:
            mapper = ScanManager.from_settings().map
        reflection = find_reflection(K, [v2, v1], exchange_boundaries=True)
        search = annihilate_holonomy(
            K,
            traditional_spec(K, v1),
            v2,
            tol_h=tol_h,
            samples=samples or scan_config["samples"],
            mapper=mapper,
            reflection=reflection,
            **options,
        )
        built, h, scan = search.result, search.holonomy, search.scan
        specs = [traditional_spec(K, v1), symmetric_family(K, v2, search.gamma1, reflection)]
        gamma_star = search.gamma1

    if not h.is_trivial(tol_h):
        raise HolonomyNontrivial(
            f"Generator holonomy displacement {h.displacement:.3e} exceeds {tol_h:g}",
            context={"holonomy": h.to_dict()},
        )
    image = normalize_imaginary_axis(built.packing, v1, v2)  # type: ignore[arg-type]
    conjugated = holonomy_in_packing(h, built.complex, built.label, built.overlaps, image)
    slack = settings.winding_slack
    windings = {
        f"component_{k + 1}": boundary_winding(image, cycle, slack=slack)
        for k, cycle in enumerate(K.boundary_cycles)
    }
    report = _report(
        FunctionKind.AHLFORS,
        name,
        normalization={"kind": "imaginary_axis", "v1": v1, "v2": v2},
        windings=windings,
        branch=_branch_entries(specs, built),
        holonomy=[h.to_dict()],
        residuals={
            "domain_label": domain_solve.residual,
            "image_label": built.report.residual,
            "crosscut_mismatch": crosscut_mismatch(conjugated, image, K.boundary_cycles),
        },
        star=built.diagnostics["star"],
        star_star=built.diagnostics["star_star"],
        scan=scan,
        extra={
            "repair": repair,
            "gamma1": gamma_star,
            "domain_deck": deck.to_dict(),
            "annulus_modulus": annulus_modulus(deck),
        },
    )
    return PipelineRun(
        report,
        domain=domain,
        image=image,
        complex=built.complex,
        roles=roles_from_records(built.records, [v1] if repair != "none" else [v1, v2]),
        solves={"domain": domain_solve, "image": built.report},
    )


def _first_loop(built: BranchedResult) -> List[int]:
    loops = generator_loops(built.complex)
    if not loops:
        raise PackingError("Complex has no generator loops", category=ErrorCategory.USAGE)
    return loops[0]


# ---------------------------------------------------------------------------
# Discrete Weierstrass function
# ---------------------------------------------------------------------------

_PAIRINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def _split_map(a: complex, b: complex) -> MobiusMap:
    """Map sending a to 0 and b to infinity."""
    if a == INF:
        return MobiusMap(0, 1, 1, -b)
    if b == INF:
        return MobiusMap(1, -a, 0, 1)
    return MobiusMap(1, -a, 1, -b)


def _pair_score(points: Sequence[complex], pairing) -> float:
    (i, j), (k, l) = pairing
    m = _split_map(points[i], points[j])
    w, u = m(points[k]), m(points[l])
    if w in (0, INF) or u in (0, INF):
        return math.inf
    return abs(abs(cmath.phase(u * w.conjugate())) - math.pi)


def _antipodality(caps: Mapping[int, SphereCircle], pairs: Sequence[Tuple[int, int]]) -> float:
    return max(abs(caps[a].angle_to(caps[b]) - math.pi) for a, b in pairs)


def _refine_antipodal(
    caps: Mapping[int, SphereCircle],
    pairs: Sequence[Tuple[int, int]],
    start: MobiusMap,
    tol: float,
) -> MobiusMap:
    """Least-squares polish of a normalizing map: the centers of each pair sum to zero."""
    (a, b), (c, d) = pairs

    def compose(x: np.ndarray) -> MobiusMap:
        step = MobiusMap(complex(1.0 + x[0], x[1]), complex(x[2], x[3]), complex(x[4], x[5]), 1.0)
        return step @ start

    def residuals(x: np.ndarray) -> np.ndarray:
        try:
            m = compose(x)
        except SingularMatrix:
            return np.full(6, 2.0)
        ends = {v: np.asarray(caps[v].transformed(m).center) for v in (a, b, c, d)}
        return np.concatenate([ends[a] + ends[b], ends[c] + ends[d]])

    fit = least_squares(residuals, np.zeros(6), method="trf", xtol=tol, ftol=tol, gtol=tol)
    return compose(fit.x)


def antipodal_normalization(
    caps: Mapping[int, SphereCircle],
    branch: Sequence[int],
    max_rounds: int = 60,
    tol: float = 1e-13,
) -> Tuple[Dict[int, SphereCircle], List[Tuple[int, int]], float]:
    """Move four branch caps so their centers form two antipodal pairs.

    The pairing whose cross ratio is closest to a negative real is used.
    Each round sends one pair to 0 and infinity and scales so the other
    pair's center points become antipodal, then re-measures the cap
    centers; rounds stop once the residual no longer improves.
    A least-squares pass over the Möbius coefficients then polishes the
    map; it is kept only when it lowers the residual.
    """
    if len(branch) != 4:
        raise PackingError("Antipodal normalization needs four branch circles", category=ErrorCategory.USAGE)
    points = [from_sphere(caps[v].center) for v in branch]
    pairing = min(_PAIRINGS, key=lambda p: _pair_score(points, p))
    pairs = [(branch[i], branch[j]) for i, j in pairing]

    total = MobiusMap.identity()
    current = dict(caps)
    residual = _antipodality(current, pairs)
    for _ in range(max_rounds):
        if residual < tol:
            break
        (a, b), (c, d) = pairs
        pts = {v: from_sphere(current[v].center) for v in (a, b, c, d)}
        split = _split_map(pts[a], pts[b])
        w, u = split(pts[c]), split(pts[d])
        if w in (0, INF) or u in (0, INF):
            break
        scale = 1.0 / math.sqrt(abs(w) * abs(u))
        step = MobiusMap(scale, 0, 0, 1) @ split
        trial_map = step @ total
        trial = {v: cap.transformed(trial_map) for v, cap in caps.items()}
        trial_residual = _antipodality(trial, pairs)
        if trial_residual >= residual:
            break
        total, current, residual = trial_map, trial, trial_residual
    if residual >= tol:
        polished = _refine_antipodal(caps, pairs, total, tol)
        trial = {v: cap.transformed(polished) for v, cap in caps.items()}
        trial_residual = _antipodality(trial, pairs)
        if trial_residual < residual:
            current, residual = trial, trial_residual
    logger.info(f"Antipodal normalization: pairs {pairs}, residual {residual:.3e}")
    return current, pairs, residual


def weierstrass(
    K: Complex,
    orbit: Sequence[int],
    name: str = "weierstrass",
    **solver: Any,
) -> PipelineRun:
    """Branched map of a torus onto the sphere with four branch circles.

    The last orbit vertex is punctured; the other three branch to order
    one in the hyperbolic packing of the punctured torus, whose boundary
    chain must wind twice. The disc image is lifted to the sphere and the
    punctured vertex gets the complementary hemisphere.
    """
    if K.surface_type != SurfaceType.TORUS:
        raise PackingError(
            f"Weierstrass functions need a torus complex, got {K.surface_type.value}",
            category=ErrorCategory.USAGE,
        )
    if len(orbit) != 4 or len(set(orbit)) != 4:
        raise PackingError("Weierstrass needs four distinct orbit vertices", category=ErrorCategory.USAGE)
    settings = get_settings()
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    v4 = orbit[3]

    domain_label, domain_solve = max_label(K, **options)
    domain = develop(K, domain_label, OverlapMap(), Geometry.EUCLIDEAN)
    periods = torus_periods(K, domain_label)

    Kp = puncture(K, v4)
    sites = [shift_id(v, v4) for v in orbit[:3]]
    specs: List[BranchSpec] = [traditional_spec(Kp, v) for v in sites]
    built = build_branched(Kp, specs, **options)

    tol_h = settings.holonomy_tol
    for entry in built.diagnostics["holonomy"]:
        if entry["displacement"] >= tol_h:
            logger.error(
                f"Punctured torus holonomy is non-trivial: displacement {entry['displacement']:.3e} "
                f"on loop {entry['loop'][:6]}..."
            )
            raise HolonomyNontrivial(
                f"Generator holonomy displacement {entry['displacement']:.3e} exceeds {tol_h:g}",
                context={"holonomy": built.diagnostics["holonomy"]},
            )

    image = built.packing
    assert image is not None
    winding = boundary_winding(image, Kp.boundary_cycles[0], slack=settings.winding_slack)
    if winding != 2:
        raise WindingMismatch(
            f"Boundary chain winds {winding} times, expected 2", context={"winding": winding}
        )

    # Back to the ids of K; the punctured vertex takes the far hemisphere.
    caps: Dict[int, SphereCircle] = {
        (w + 1 if w >= v4 else w): cap for w, cap in stereographic_project(image).items()
    }
    caps[v4] = NORTH_HEMISPHERE
    tangency = max(caps[p].tangency_residual(caps[v4]) for p in K.flower(v4).petals)

    normalized, pairs, antipodal = antipodal_normalization(caps, list(orbit))
    tangency_after = max(normalized[p].tangency_residual(normalized[v4]) for p in K.flower(v4).petals)

    report = _report(
        FunctionKind.WEIERSTRASS,
        name,
        normalization={"kind": "antipodal_pairs", "pairs": [list(p) for p in pairs]},
        windings={"boundary": winding},
        branch=_branch_entries(specs, built),
        holonomy=built.diagnostics["holonomy"],
        residuals={
            "domain_label": domain_solve.residual,
            "image_label": built.report.residual,
            "hemisphere_tangency": max(tangency, tangency_after),
            "antipodality": antipodal,
        },
        star=built.diagnostics["star"],
        star_star=built.diagnostics["star_star"],
        extra={"orbit": list(orbit), "punctured": v4, **periods},
    )
    return PipelineRun(
        report,
        domain=domain,
        image=image,
        caps=normalized,
        complex=K,
        roles={v: "branch" for v in orbit},
        solves={"domain": domain_solve, "image": built.report},
    )


# ---------------------------------------------------------------------------
# Continuity sweep
# ---------------------------------------------------------------------------

def sweep(
    K: Complex,
    spec: Union[SingularSpec, ShiftedSpec],
    parameter: str = "gamma1",
    deltas: Sequence[float] = (1e-1, 1e-2, 1e-3, 1e-4),
    name: str = "sweep",
    mapper: Optional[Mapper] = None,
    **solver: Any,
) -> PipelineRun:
    """Restricted-label changes under shrinking perturbations of one dial."""
    options = solver_options(solver.pop("tol", None), solver.pop("max_iters", None))
    options.update(solver)
    if mapper is None:
        mapper = ScanManager.from_settings().map
    changes = continuity_sweep(K, spec, parameter, deltas, mapper=mapper, **options)
    values = [c["change"] for c in changes]
    monotone = all(a > b for a, b in zip(values, values[1:]))
    report = _report(
        FunctionKind.SWEEP,
        name,
        branch=[{"spec": spec.model_dump(mode="json"), "parameter": parameter}],
        extra={"changes": changes, "monotone": monotone},
    )
    return PipelineRun(report, complex=K)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def write_outputs(run: PipelineRun, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """Write every artifact of a run; report fields name files relative to out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = run.report.name
    paths: Dict[str, Path] = {}

    if run.domain is not None:
        paths["domain"] = write_json(out / f"{name}.domain.json", packing_to_document(run.domain))
        run.report.domain = paths["domain"].name
    if run.caps is not None:
        paths["image"] = write_json(out / f"{name}.image.json", caps_to_document(run.caps))
        run.report.image = paths["image"].name
        svg = render_sphere_svg(run.caps, run.roles)
    elif run.image is not None:
        paths["image"] = write_json(out / f"{name}.image.json", packing_to_document(run.image))
        run.report.image = paths["image"].name
        svg = render_svg(run.image, run.complex, run.roles, edges=True)
    elif run.domain is not None:
        svg = render_svg(run.domain, run.complex, run.roles, edges=True)
    else:
        svg = None
    if svg is not None:
        paths["svg"] = write_svg(out / f"{name}.svg", svg)
        run.report.svg = paths["svg"].name

    for role, solve in sorted(run.solves.items()):
        paths[f"{role}_residuals"] = solve.write_residual_trace(out / f"{name}.{role}.residuals.csv")
    if run.complex is not None and run.complex.holes:
        paths["complex"] = save_complex(out / f"{name}.complex.json", run.complex)
        run.report.complex = paths["complex"].name
    if run.report.scan:
        paths["scan"] = write_scan_csv(out / f"{name}.scan.csv", run.report.scan)

    paths["report"] = write_json(out / f"{name}.report.json", run.report)
    logger.info(f"Wrote {len(paths)} artifacts for {name} to {out}")
    return paths
