"""Core circle packing machinery: complexes, kernels, solver, layout, branching."""

from .branching import (
    BranchedResult,
    SearchResult,
    annihilate_holonomy,
    build_branched,
    continuity_sweep,
    schwarz_ratios,
    shifted_params,
    shifted_spec_from_point,
    singular_params,
    symmetric_family,
    traditional_spec,
)
from .complex import (
    BlackHoleRecord,
    Complex,
    Flower,
    SurfaceType,
    build_complex,
    edge_flip,
    find_reflection,
    flower,
    insert_shifted_blackhole,
    insert_singular_blackhole,
    puncture,
)
from .error_handling import (
    ErrorCategory,
    ErrorClassifier,
    ErrorSeverity,
    PackingError,
)
from .geometry import (
    INF,
    Circle,
    Geometry,
    MobiusMap,
    SphereCircle,
    edge_length,
    face_angle,
    project_circle,
    realize_triple,
)
from .layout import (
    Holonomy,
    Packing,
    boundary_winding,
    develop,
    event_horizon_winding,
    generator_loops,
    holonomy,
    normalize_disc,
    normalize_imaginary_axis,
    stereographic_project,
)
from .solver import (
    OverlapMap,
    SolveReport,
    angle_sum,
    check_star,
    check_star_star,
    max_label,
    solve_label,
)

__all__ = [
    # Combinatorics
    "Complex",
    "Flower",
    "BlackHoleRecord",
    "SurfaceType",
    "build_complex",
    "flower",
    "edge_flip",
    "find_reflection",
    "puncture",
    "insert_singular_blackhole",
    "insert_shifted_blackhole",

    # Geometry
    "INF",
    "Geometry",
    "Circle",
    "MobiusMap",
    "SphereCircle",
    "edge_length",
    "face_angle",
    "realize_triple",
    "project_circle",

    # Solver
    "OverlapMap",
    "SolveReport",
    "angle_sum",
    "check_star",
    "check_star_star",
    "solve_label",
    "max_label",

    # Layout
    "Packing",
    "Holonomy",
    "develop",
    "holonomy",
    "generator_loops",
    "normalize_disc",
    "normalize_imaginary_axis",
    "stereographic_project",
    "boundary_winding",
    "event_horizon_winding",

    # Branching
    "BranchedResult",
    "SearchResult",
    "traditional_spec",
    "singular_params",
    "shifted_params",
    "shifted_spec_from_point",
    "symmetric_family",
    "build_branched",
    "annihilate_holonomy",
    "continuity_sweep",
    "schwarz_ratios",

    # Error handling
    "PackingError",
    "ErrorClassifier",
    "ErrorCategory",
    "ErrorSeverity",
]
