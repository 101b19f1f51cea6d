"""Example complexes, named pipelines, document I/O and SVG rendering."""

from .generators import GENERATORS, GeneratedComplex, Symmetry, gen_complex
from .pipelines import (
    PipelineRun,
    ahlfors,
    antipodal_normalization,
    blaschke,
    branchpack,
    maxpack,
    sweep,
    weierstrass,
    write_outputs,
)
from .svg import render_sphere_svg, render_svg, roles_from_records

__all__ = [
    "GENERATORS",
    "GeneratedComplex",
    "Symmetry",
    "gen_complex",
    "PipelineRun",
    "maxpack",
    "branchpack",
    "blaschke",
    "ahlfors",
    "weierstrass",
    "sweep",
    "antipodal_normalization",
    "write_outputs",
    "render_svg",
    "render_sphere_svg",
    "roles_from_records",
]
