"""Packing labels by per-vertex relaxation.

Each free interior vertex is adjusted in turn until its angle sum hits its
target. The angle sum is strictly decreasing in the vertex's own label, so
every update is a bracketed 1-D root find. Boundary labels and pinned zeros
never move.
"""

import csv
import logging
import math
import time
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from scipy.optimize import root_scalar

from .complex import Complex, Edge, SurfaceType
from .error_handling import (
    CombinatoricsError,
    GeometryError,
    InconsistentPins,
    LoopNotSeparating,
    NonConvergence,
    OpenChain,
    PackingError,
    ErrorCategory,
    StarViolation,
    ViolatesStarStar,
)
from .geometry import ALGEBRAIC_TOL, INF, FlowerKernel, Geometry, face_angle

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
STAR_TOL = 1e-9

Label = Dict[int, float]
TargetAngles = Dict[int, float]
BoundaryCondition = Dict[int, float]
SweepCallback = Callable[[int, Label], None]


def edge_key(a: int, b: int) -> Edge:
    return (a, b) if a < b else (b, a)


class OverlapMap:
    """Per-edge overlap angles; unlisted edges are tangencies."""

    def __init__(self, values: Optional[Mapping[Edge, float]] = None):
        self._values: Dict[Edge, float] = {}
        for (a, b), phi in (values or {}).items():
            if not 0.0 - ALGEBRAIC_TOL <= phi <= math.pi + ALGEBRAIC_TOL:
                raise GeometryError(f"Overlap {phi} on edge {(a, b)} outside [0, pi]")
            if phi != 0.0:
                self._values[edge_key(a, b)] = float(phi)

    @classmethod
    def tangency(cls) -> "OverlapMap":
        return cls()

    def __call__(self, a: int, b: int) -> float:
        return self._values.get(edge_key(a, b), 0.0)

    def updated(self, values: Mapping[Edge, float]) -> "OverlapMap":
        merged = dict(self._values)
        merged.update({edge_key(a, b): phi for (a, b), phi in values.items()})
        return OverlapMap(merged)

    def items(self) -> List[Tuple[Edge, float]]:
        return sorted(self._values.items())

    def __len__(self) -> int:
        return len(self._values)

    def __repr__(self) -> str:
        return f"OverlapMap({len(self._values)} non-tangent edges)"


class StarStatus(str, Enum):
    STRICT = "strict"
    EQUALITY = "equality"
    VIOLATED = "violated"


class SweepMode(str, Enum):
    GAUSS_SEIDEL = "gauss_seidel"
    JACOBI = "jacobi"


@dataclass
class StarCheck:
    """One evaluation of the loop inequality."""
    loop: Tuple[int, ...]
    enclosed: Tuple[int, ...]
    lhs: float
    rhs: float
    status: StarStatus
    source: str = "flower"

    def to_dict(self) -> Dict:
        return {
            "loop": list(self.loop),
            "enclosed": list(self.enclosed),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "status": self.status.value,
            "source": self.source,
        }


@dataclass
class StarStarReport:
    passed: bool
    offending: List[Tuple[int, int, int]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class SolveReport:
    """Outcome of a label solve."""
    geometry: Geometry
    unknowns: int
    sweeps: int = 0
    residual: float = INF
    converged: bool = False
    elapsed: float = 0.0
    trace: List[Tuple[int, float]] = field(default_factory=list)

    def write_residual_trace(self, path: Union[str, Path]) -> Path:
        """Write the residual trace as CSV with header iteration,max_residual."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["iteration", "max_residual"])
            for sweep, residual in self.trace:
                writer.writerow([sweep, repr(residual)])
        return path

    def to_dict(self) -> Dict:
        return {
            "geometry": self.geometry.value,
            "unknowns": self.unknowns,
            "sweeps": self.sweeps,
            "residual": self.residual,
            "converged": self.converged,
        }


# ---------------------------------------------------------------------------
# Angle sums and feasibility conditions
# ---------------------------------------------------------------------------

def _flower_faces(K: Complex, R: Mapping[int, float], Phi: OverlapMap, v: int) -> List[tuple]:
    return [(R[a], R[b], Phi(v, a), Phi(v, b), Phi(a, b)) for a, b in K.flower(v).wedges()]


def angle_sum(
    K: Complex,
    R: Mapping[int, float],
    Phi: OverlapMap,
    v: int,
    geom: Geometry = Geometry.HYPERBOLIC,
) -> float:
    """Total angle at v over its faces."""
    return sum(
        face_angle(R[v], ra, rb, pa, pb, pab, geom) for ra, rb, pa, pb, pab in _flower_faces(K, R, Phi, v)
    )


def angle_sums(K: Complex, R: Mapping[int, float], Phi: OverlapMap, geom: Geometry) -> Dict[int, float]:
    return {v: angle_sum(K, R, Phi, v, geom) for v in K.vertices}


def _classify(lhs: float, rhs: float) -> StarStatus:
    if lhs > rhs + STAR_TOL:
        return StarStatus.STRICT
    if lhs >= rhs - STAR_TOL:
        return StarStatus.EQUALITY
    return StarStatus.VIOLATED


def check_star(
    K: Complex,
    Phi: OverlapMap,
    A: Mapping[int, float],
    E: Iterable[int],
    loop: Sequence[int],
    source: str = "flower",
) -> StarCheck:
    """Compare the loop's overlap deficit with the curvature it must enclose.

    loop is a closed vertex cycle; E the edge-connected set it separates from
    the boundary.
    """
    enclosed = tuple(sorted(set(E)))
    cycle = tuple(loop)
    if not enclosed:
        raise LoopNotSeparating("Enclosed vertex set is empty")
    if set(enclosed) & set(cycle):
        raise LoopNotSeparating("Loop passes through an enclosed vertex")
    n = len(cycle)
    for k in range(n):
        if not K.has_edge(cycle[k], cycle[(k + 1) % n]):
            raise LoopNotSeparating(
                f"{(cycle[k], cycle[(k + 1) % n])} is not an edge", context={"loop": list(cycle)}
            )

    blocked = set(cycle)
    seen = {enclosed[0]}
    queue = deque([enclosed[0]])
    while queue:
        u = queue.popleft()
        if not K.is_interior(u):
            raise LoopNotSeparating(
                "Loop does not separate the enclosed set from the boundary",
                context={"loop": list(cycle), "reached": u},
            )
        for w in K.neighbors(u):
            if w not in blocked and w not in seen:
                seen.add(w)
                queue.append(w)
    if not set(enclosed) <= seen:
        raise LoopNotSeparating("Enclosed set is not edge-connected inside the loop")

    lhs = sum(math.pi - Phi(cycle[k], cycle[(k + 1) % n]) for k in range(n))
    rhs = TWO_PI + sum(A.get(v, TWO_PI) - TWO_PI for v in enclosed)
    return StarCheck(cycle, enclosed, lhs, rhs, _classify(lhs, rhs), source)


def check_star_star(K: Complex, Phi: OverlapMap) -> StarStarReport:
    """Every face's three overlaps must sum to at most pi."""
    offending = []
    for a, b, c in K.faces:
        if Phi(a, b) + Phi(b, c) + Phi(c, a) > math.pi + ALGEBRAIC_TOL:
            offending.append((a, b, c))
    return StarStarReport(not offending, offending)


def star_report(
    K: Complex,
    Phi: OverlapMap,
    A: Mapping[int, float],
    pinned: Iterable[int] = (),
) -> List[StarCheck]:
    """Run check_star over every loop the branching constructions can tighten.

    Covers flower loops of vertices with target above 2pi, pinned fall guys,
    black-hole horizons and the two-vertex loops around such vertices.
    """
    pinned = set(pinned)
    heavy = {v for v in K.interior_vertices if A.get(v, TWO_PI) > TWO_PI + STAR_TOL}
    checks: List[StarCheck] = []
    for v in sorted(heavy | pinned):
        checks.append(check_star(K, Phi, A, {v}, K.flower(v).petals, "pinned" if v in pinned else "flower"))

    for hole in K.holes:
        aux = {x for face in hole.region_faces for x in face} - set(hole.horizon)
        try:
            checks.append(check_star(K, Phi, A, aux, hole.horizon, "horizon"))
        except LoopNotSeparating as exc:
            logger.debug(f"Horizon of hole at {hole.fall_guy} skipped: {exc.message}")

    for v in sorted(heavy | pinned):
        for w in K.flower(v).petals:
            if not K.is_interior(w) or (w in heavy | pinned and w < v):
                continue
            try:
                loop = K.region_boundary(K.faces_at(v) + K.faces_at(w))
                checks.append(check_star(K, Phi, A, {v, w}, loop, "pair"))
            except (OpenChain, LoopNotSeparating):
                continue
    return checks


# ---------------------------------------------------------------------------
# Per-vertex updates
# ---------------------------------------------------------------------------

def _solve_hyperbolic(kernel: FlowerKernel, target: float) -> float:
    """x = exp(-2r) with angle sum equal to target; 1.0 if even r = 0 falls short."""
    top = kernel.at_x(1.0) - target
    if top <= 0.0:
        return 1.0
    result = root_scalar(
        lambda x: kernel.at_x(x) - target,
        bracket=(0.0, 1.0),
        method="brentq",
        xtol=1e-16,
    )
    return float(result.root)


def _solve_euclidean(kernel: FlowerKernel, target: float, scale: float) -> float:
    lo, hi = math.log(scale) - 30.0, math.log(scale) + 30.0
    if kernel.euclidean(math.exp(lo)) - target <= 0.0:
        return 0.0
    result = root_scalar(
        lambda s: kernel.euclidean(math.exp(s)) - target,
        bracket=(lo, hi),
        method="brentq",
        xtol=1e-14,
    )
    return math.exp(float(result.root))


class LabelSolver:
    """Iterates per-vertex updates until every free angle sum meets its target."""

    def __init__(
        self,
        K: Complex,
        Phi: OverlapMap,
        A: Mapping[int, float],
        geom: Geometry,
        bc: Optional[Mapping[int, float]] = None,
        pinned: Iterable[int] = (),
        tol: float = 1e-8,
        max_iters: int = 50000,
        zero_floor: float = 1e-9,
        sweep_mode: Union[SweepMode, str] = SweepMode.GAUSS_SEIDEL,
        workers: int = 1,
    ):
        self.K = K
        self.Phi = Phi
        self.geom = Geometry(geom)
        self.A = {v: float(A.get(v, TWO_PI)) for v in K.interior_vertices}
        self.bc = {int(v): float(r) for v, r in (bc or {}).items()}
        self.pinned = set(int(v) for v in pinned)
        self.tol = tol
        self.max_iters = max_iters
        self.zero_floor = zero_floor
        self.sweep_mode = SweepMode(sweep_mode)
        self.workers = max(1, int(workers))
        self._validate()
        self.free = [v for v in K.interior_vertices if v not in self.pinned]

    def _validate(self) -> None:
        K = self.K
        if self.geom not in (Geometry.HYPERBOLIC, Geometry.EUCLIDEAN):
            raise GeometryError(f"Cannot solve labels in {self.geom.value} geometry")
        missing = [v for v in K.boundary_vertices if v not in self.bc]
        if missing:
            raise PackingError(
                f"Boundary condition missing for {len(missing)} vertices",
                category=ErrorCategory.USAGE,
                context={"vertices": missing[:20]},
            )
        if self.geom == Geometry.EUCLIDEAN and any(r == INF for r in self.bc.values()):
            raise GeometryError("Horocycle boundary condition in euclidean geometry")
        if any(r < 0 for r in self.bc.values()):
            raise GeometryError("Negative boundary radius")

        report = check_star_star(K, self.Phi)
        if not report:
            raise ViolatesStarStar(
                f"{len(report.offending)} faces have overlap sum above pi",
                context={"faces": [list(f) for f in report.offending[:20]]},
            )

        for g in sorted(self.pinned):
            K.check_vertex(g)
            if not K.is_interior(g):
                raise InconsistentPins(f"Pinned vertex {g} is on the boundary", context={"vertex": g})
            clash = [w for w in K.neighbors(g) if w in self.pinned]
            if clash:
                raise InconsistentPins(f"Pinned vertices {g} and {clash[0]} are adjacent")
            check = check_star(K, self.Phi, self.A, {g}, K.flower(g).petals, "pinned")
            if check.status != StarStatus.EQUALITY:
                raise InconsistentPins(
                    f"Pinned vertex {g} has a {check.status.value} flower loop",
                    context=check.to_dict(),
                )

        for v in K.interior_vertices:
            if v in self.pinned or self.A[v] <= TWO_PI + STAR_TOL:
                continue
            check = check_star(K, self.Phi, self.A, {v}, K.flower(v).petals)
            if check.status != StarStatus.STRICT:
                raise StarViolation(
                    f"Vertex {v} cannot carry angle sum {self.A[v]:.6g}",
                    context=check.to_dict(),
                )

    def initial_label(self, initial: Union[None, float, Mapping[int, float]] = None) -> Label:
        default = 0.5 if self.geom == Geometry.HYPERBOLIC else 1.0
        label: Label = {}
        for v in self.K.vertices:
            if v in self.bc:
                label[v] = self.bc[v]
            elif v in self.pinned:
                label[v] = 0.0
            elif isinstance(initial, Mapping):
                label[v] = float(initial.get(v, default))
            elif initial is not None:
                label[v] = float(initial)
            else:
                label[v] = default
        return label

    def residual_at(self, label: Label, v: int) -> float:
        return abs(FlowerKernel(self.geom, _flower_faces(self.K, label, self.Phi, v))(label[v]) - self.A[v])

    def max_residual(self, label: Label) -> float:
        return max((self.residual_at(label, v) for v in self.free), default=0.0)

    def update(self, label: Label, v: int) -> float:
        """New label at v with its neighbors frozen."""
        kernel = FlowerKernel(self.geom, _flower_faces(self.K, label, self.Phi, v))
        target = self.A[v]
        current = label[v]
        if abs(kernel(current) - target) < self.tol / 10.0:
            return current
        if self.geom == Geometry.HYPERBOLIC:
            x = _solve_hyperbolic(kernel, target)
            radius = -0.5 * math.log(x) if x > 0.0 else INF
            scale = 1.0
        else:
            neighbors = [label[w] for w in self.K.neighbors(v) if label[w] > 0.0]
            scale = math.exp(sum(math.log(r) for r in neighbors) / len(neighbors)) if neighbors else 1.0
            radius = _solve_euclidean(kernel, target, scale)
        if radius < self.zero_floor * scale:
            raise StarViolation(
                f"Label at free vertex {v} driven to zero",
                context={"vertex": v, "radius": radius, "target": target},
            )
        return radius

    def _gauge(self, label: Label) -> None:
        if self.geom != Geometry.EUCLIDEAN or self.K.boundary_vertices:
            return
        values = [label[v] for v in self.free]
        shift = sum(math.log(r) for r in values) / len(values)
        factor = math.exp(-shift)
        for v in self.free:
            label[v] *= factor

    def _sweep(self, label: Label, pool: Optional[ThreadPoolExecutor]) -> None:
        if self.sweep_mode == SweepMode.GAUSS_SEIDEL:
            for v in self.free:
                label[v] = self.update(label, v)
            return
        snapshot = dict(label)
        if pool is not None:
            values = list(pool.map(lambda v: self.update(snapshot, v), self.free))
        else:
            values = [self.update(snapshot, v) for v in self.free]
        for v, r in zip(self.free, values):
            label[v] = r

    def solve(
        self,
        initial: Union[None, float, Mapping[int, float]] = None,
        on_sweep: Optional[SweepCallback] = None,
    ) -> Tuple[Label, SolveReport]:
        label = self.initial_label(initial)
        report = SolveReport(self.geom, len(self.free))
        start = time.perf_counter()
        self._gauge(label)
        residual = self.max_residual(label)
        report.trace.append((0, residual))
        pool = (
            ThreadPoolExecutor(max_workers=self.workers)
            if self.sweep_mode == SweepMode.JACOBI and self.workers > 1
            else None
        )
        try:
            sweep = 0
            while residual > self.tol:
                if sweep >= self.max_iters:
                    report.sweeps, report.residual = sweep, residual
                    raise NonConvergence(
                        f"No convergence after {sweep} sweeps (residual {residual:.3e})",
                        context={"sweeps": sweep, "residual": residual},
                    )
                sweep += 1
                self._sweep(label, pool)
                self._gauge(label)
                residual = self.max_residual(label)
                report.trace.append((sweep, residual))
                logger.debug(f"Sweep {sweep}: residual {residual:.3e}")
                if on_sweep is not None:
                    on_sweep(sweep, dict(label))
        finally:
            if pool is not None:
                pool.shutdown(wait=True)

        report.sweeps = sweep
        report.residual = residual
        report.converged = True
        report.elapsed = time.perf_counter() - start
        logger.info(
            f"Solved {self.geom.value} label: {len(self.free)} unknowns, "
            f"{sweep} sweeps, residual {residual:.3e}"
        )
        return label, report


def solve_label(
    K: Complex,
    Phi: OverlapMap,
    A: Mapping[int, float],
    bc: Optional[Mapping[int, float]] = None,
    pz: Iterable[int] = (),
    tol: float = 1e-8,
    max_iters: int = 50000,
    geom: Geometry = Geometry.HYPERBOLIC,
    initial: Union[None, float, Mapping[int, float]] = None,
    on_sweep: Optional[SweepCallback] = None,
    **options,
) -> Tuple[Label, SolveReport]:
    """Packing label for targets A with boundary condition bc and pinned zeros pz.

    Extra keyword options (zero_floor, sweep_mode, workers) go to LabelSolver.
    """
    solver = LabelSolver(K, Phi, A, geom, bc=bc, pinned=pz, tol=tol, max_iters=max_iters, **options)
    return solver.solve(initial=initial, on_sweep=on_sweep)


def max_label(K: Complex, tol: float = 1e-8, max_iters: int = 50000, **options) -> Tuple[Label, SolveReport]:
    """Maximal packing label: horocycle boundary in the disc, or a flat torus."""
    if K.surface_type == SurfaceType.TORUS:
        return solve_label(K, OverlapMap(), {}, {}, (), tol, max_iters, Geometry.EUCLIDEAN, **options)
    if not K.boundary_vertices:
        raise CombinatoricsError(
            f"No maximal packing for a closed {K.surface_type.value} complex",
            context={"surface": K.surface_type.value},
        )
    bc = {v: INF for v in K.boundary_vertices}
    return solve_label(K, OverlapMap(), {}, bc, (), tol, max_iters, Geometry.HYPERBOLIC, **options)
