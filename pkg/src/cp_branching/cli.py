"""Command-line interface for cp-branching."""

import json
import logging
import math
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import typer
from rich.console import Console
from rich.table import Table

from .config import get_settings
from .core.error_handling import DocumentError, ErrorCategory, ErrorClassifier, PackingError
from .core.geometry import Geometry, measured_overlap, realize_triple
from .core.layout import generator_loops, holonomy
from .models.schemas import ComplexDocument, LabelDocument, PackingDocument
from .workbench import io
from .workbench.generators import gen_complex
from .workbench.pipelines import (
    PipelineRun,
    ahlfors,
    blaschke,
    branchpack,
    maxpack,
    sweep,
    weierstrass,
    write_outputs,
)
from .workbench.svg import render_sphere_svg, render_svg, roles_from_records, write_svg

console = Console()
err_console = Console(stderr=True)
app = typer.Typer(
    name="cpb",
    help="cp-branching - maximal and branched circle packings with holonomy repair",
    no_args_is_help=True,
)

logging.basicConfig(
    level=logging.WARNING,
    format='%(levelname)s: %(message)s'
)

TOL = typer.Option(None, "--tol", help="Angle-sum residual tolerance")
MAX_ITERS = typer.Option(None, "--max-iters", help="Maximum solver sweeps")
OUT_DIR = typer.Option(None, "--out-dir", "-o", help="Directory for reports and renders")
AS_JSON = typer.Option(False, "--json", help="Print the report as JSON")
VERBOSE = typer.Option(False, "--verbose", "-v", help="Enable verbose logging")
COMPLEX = typer.Option(..., "--complex", "-k", help="Complex JSON file")


def _configure_logging(verbose: bool) -> None:
    settings = get_settings()
    level = logging.INFO if verbose else getattr(logging, settings.log_level, logging.WARNING)
    for name in ("cp_branching", "src.cp_branching"):
        logging.getLogger(name).setLevel(level)
    log_path = settings.get_log_file_path()
    if log_path is not None:
        root = logging.getLogger()
        if not any(isinstance(h, logging.FileHandler) for h in root.handlers):
            handler = logging.FileHandler(log_path, encoding="utf-8")
            handler.setFormatter(logging.Formatter("%(asctime)s %(name)s %(levelname)s: %(message)s"))
            root.addHandler(handler)


def _run(action: Callable[[], Any], verbose: bool) -> Any:
    """Run a command body, mapping failures to stderr and an exit code."""
    _configure_logging(verbose)
    try:
        return action()
    except typer.Exit:
        raise
    except KeyboardInterrupt:
        err_console.print("[yellow]Cancelled by user[/yellow]")
        raise typer.Exit(1)
    except Exception as e:
        code = ErrorClassifier.exit_code(e)
        error = ErrorClassifier.classify_exception(e)
        err_console.print(f"[red]Error ({error.category.value}): {error.message}[/red]")
        if verbose:
            err_console.print_exception()
        raise typer.Exit(code)


def _solver(tol: Optional[float], max_iters: Optional[int]) -> Dict[str, Any]:
    options: Dict[str, Any] = {}
    if tol is not None:
        options["tol"] = tol
    if max_iters is not None:
        options["max_iters"] = max_iters
    return options


def _parse_ints(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise PackingError(f"Expected comma separated integers, got {text!r}", category=ErrorCategory.USAGE, original_error=e)


def _parse_point(text: str) -> complex:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError as e:
        raise PackingError(f"Expected a point as x,y, got {text!r}", category=ErrorCategory.USAGE, original_error=e)
    return complex(x, y)


def _finish(run: PipelineRun, out_dir: Optional[str], as_json: bool) -> None:
    """Write artifacts and print a summary or the report JSON."""
    target = Path(out_dir or get_settings().out_dir)
    paths = write_outputs(run, target)
    report = run.report
    if as_json:
        typer.echo(report.model_dump_json(by_alias=True, indent=2))
        return

    console.print(f"[bold blue]{report.kind.value}[/bold blue] {report.name}")
    table = Table(show_header=True, header_style="bold magenta")
    table.add_column("Quantity")
    table.add_column("Value", justify="right")
    for key, value in sorted(report.residuals.items()):
        table.add_row(f"residual {key}", f"{value:.3e}")
    for key, value in sorted(report.windings.items()):
        table.add_row(f"winding {key}", str(value))
    for k, h in enumerate(report.holonomy):
        table.add_row(f"holonomy {k + 1}", f"{h['displacement']:.3e} ({h['classification']})")
    table.add_row("star-star", "ok" if report.star_star else "violated")
    console.print(table)
    for role, path in sorted(paths.items()):
        console.print(f"[green]✓[/green] {role}: {path}")


@app.command()
def validate(
    file: str = typer.Argument(..., help="Complex, label, packing or branch spec JSON file"),
    sample: int = typer.Option(0, "--sample", help="Also check N random triples against the trig kernels"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for the sampled check"),
    verbose: bool = VERBOSE,
):
    """
    Validate an input document and show what it holds.

    Examples:
        cpb validate torus.json
        cpb validate specs.json --sample 1000 --seed 7
    """
    def action() -> None:
        path = Path(file)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as e:
            raise DocumentError(f"File not found: {path}", original_error=e)
        except json.JSONDecodeError as e:
            raise DocumentError(f"Invalid JSON in {path}: {e}", original_error=e)

        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Field")
        table.add_column("Value")
        if isinstance(data, list) or (isinstance(data, dict) and "specs" in data):
            specs = io.load_specs(path)
            table.add_row("document", "branch specs")
            for k, spec in enumerate(specs, 1):
                table.add_row(f"spec {k}", spec.model_dump_json())
        elif "faces" in data:
            K = io.complex_from_document(ComplexDocument.model_validate(data))
            table.add_row("document", "complex")
            table.add_row("surface", K.surface_type.value)
            table.add_row("vertices / edges / faces", f"{K.vertex_count} / {K.edge_count} / {K.face_count}")
            table.add_row("euler characteristic", str(K.euler_characteristic))
            table.add_row("boundary components", str(len(K.boundary_cycles)))
        elif "radii" in data:
            R, Phi, targets, pinned, geometry = io.label_from_document(LabelDocument.model_validate(data))
            table.add_row("document", "label")
            table.add_row("geometry", geometry.value)
            table.add_row("radii", str(len(R)))
            table.add_row("overlaps", str(len(Phi)))
            table.add_row("pinned", ", ".join(map(str, pinned)) or "-")
        elif "circles" in data:
            doc = PackingDocument.model_validate(data)
            table.add_row("document", "packing")
            table.add_row("geometry", doc.geometry)
            table.add_row("circles", str(len(doc.circles)))
        else:
            raise DocumentError(f"{path} is not a recognised document")
        console.print(f"[green]✓ {path} is valid[/green]")
        console.print(table)

        if sample > 0:
            worst = _trig_sample(sample, get_settings().seed if seed is None else seed)
            for geom, error in worst.items():
                console.print(f"Trig kernel {geom}: max overlap error {error:.2e} over {sample} triples")

    _run(action, verbose)


def _trig_sample(count: int, seed: int) -> Dict[str, float]:
    """Realize random triples and measure the worst overlap error."""
    rng = np.random.default_rng(seed)
    worst: Dict[str, float] = {}
    for geom in (Geometry.EUCLIDEAN, Geometry.HYPERBOLIC):
        error = 0.0
        for _ in range(count):
            radii = rng.uniform(0.05, 3.0, size=3)
            overlaps = rng.uniform(0.0, math.pi / 3.0, size=3)
            c0, c1, c2 = realize_triple(radii, overlaps, geom)
            for (a, b), phi in zip(((c0, c1), (c1, c2), (c2, c0)), overlaps):
                measured = measured_overlap(a, b)
                if measured is not None:
                    error = max(error, abs(measured - phi))
        worst[geom.value] = error
    return worst


@app.command()
def gen(
    kind: str = typer.Option(..., "--kind", help="disc, annulus, broken_annulus or torus"),
    rings: Optional[int] = typer.Option(None, "--rings", help="Rings of a disc or annulus"),
    cols: Optional[int] = typer.Option(None, "--cols", help="Columns of an annulus"),
    n: Optional[int] = typer.Option(None, "--n", help="Torus columns"),
    m: Optional[int] = typer.Option(None, "--m", help="Torus rows"),
    rectangular: bool = typer.Option(False, "--rectangular", help="Glue torus rows with a half-row lag"),
    output: Optional[str] = typer.Option(None, "--output", help="Write the complex here instead of stdout"),
    verbose: bool = VERBOSE,
):
    """
    Generate an example complex.

    Examples:
        cpb gen --kind torus --n 8 --m 8
        cpb gen --kind torus --n 8 --m 8 --rectangular
        cpb gen --kind annulus --rings 5 --cols 12 --output k.json
    """
    def action() -> None:
        sizes = {k: v for k, v in {"rings": rings, "cols": cols, "n": n, "m": m}.items() if v is not None}
        if rectangular:
            sizes["rectangular"] = True
        try:
            generated = gen_complex(kind, **sizes)
        except TypeError as e:
            raise PackingError(f"Bad sizes for {kind}: {e}", category=ErrorCategory.USAGE, original_error=e)
        K = generated.complex
        K.meta["named"] = generated.named
        if generated.orbit:
            K.meta["orbit"] = generated.orbit
        document = io.complex_to_document(K)
        if output:
            io.write_json(output, document)
            console.print(f"[green]✓[/green] {generated.kind}: {K.vertex_count} vertices → {output}")
            console.print(f"Named vertices: {generated.named}")
        else:
            typer.echo(document.model_dump_json(by_alias=True, indent=2))

    _run(action, verbose)


@app.command("maxpack")
def maxpack_command(
    complex_file: str = COMPLEX,
    name: str = typer.Option("maxpack", "--name"),
    alpha: Optional[int] = typer.Option(None, "--alpha", help="Vertex placed at the origin"),
    gamma: Optional[int] = typer.Option(None, "--gamma", help="Boundary vertex whose ideal point goes to i"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """Maximal packing of a disc, annulus or torus."""
    def action() -> None:
        K = io.load_complex(complex_file)
        _finish(maxpack(K, name, alpha, gamma, **_solver(tol, max_iters)), out_dir, as_json)

    _run(action, verbose)


@app.command("branchpack")
def branchpack_command(
    complex_file: str = COMPLEX,
    specs_file: str = typer.Option(..., "--specs", "-s", help="Branch spec JSON file"),
    name: str = typer.Option("branchpack", "--name"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """Branched packing for explicit traditional, singular or shifted specs."""
    def action() -> None:
        K = io.load_complex(complex_file)
        specs = io.load_specs(specs_file)
        _finish(branchpack(K, specs, name, **_solver(tol, max_iters)), out_dir, as_json)

    _run(action, verbose)


@app.command("blaschke")
def blaschke_command(
    complex_file: str = COMPLEX,
    v1: Optional[int] = typer.Option(None, "--v1", help="First branch vertex"),
    v2: Optional[int] = typer.Option(None, "--v2", help="Second branch vertex"),
    mode: str = typer.Option("traditional", "--mode", help="traditional, singular or shifted"),
    p1: Optional[str] = typer.Option(None, "--p1", help="First branch point x,y"),
    p2: Optional[str] = typer.Option(None, "--p2", help="Second branch point x,y"),
    name: str = typer.Option("blaschke", "--name"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """
    Discrete Blaschke product with two branch sites.

    Examples:
        cpb blaschke --complex disc.json --v1 8 --v2 14
        cpb blaschke --complex disc.json --mode shifted --p1 0.3,0.1 --p2 -0.2,-0.3
    """
    def action() -> None:
        K = io.load_complex(complex_file)
        points = [_parse_point(p) for p in (p1, p2) if p is not None] or None
        run = blaschke(K, v1, v2, mode, points, name, **_solver(tol, max_iters))
        _finish(run, out_dir, as_json)

    _run(action, verbose)


@app.command("ahlfors")
def ahlfors_command(
    complex_file: str = COMPLEX,
    v1: int = typer.Option(..., "--v1", help="Branch vertex on the symmetry line"),
    v2: int = typer.Option(..., "--v2", help="Second branch vertex"),
    repair: str = typer.Option("none", "--repair", help="none, shifted or shifted_search"),
    samples: Optional[int] = typer.Option(None, "--samples", help="Coarse scan samples"),
    name: str = typer.Option("ahlfors", "--name"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """
    Discrete Ahlfors function of an annulus.

    Examples:
        cpb ahlfors --complex k.json --v1 17 --v2 41 --repair shifted
    """
    def action() -> None:
        K = io.load_complex(complex_file)
        run = ahlfors(K, v1, v2, repair, name, samples, **_solver(tol, max_iters))
        _finish(run, out_dir, as_json)

    _run(action, verbose)


@app.command("weierstrass")
def weierstrass_command(
    complex_file: str = COMPLEX,
    orbit: Optional[str] = typer.Option(None, "--orbit", help="Four vertices v1,v2,v3,v4; v4 is punctured"),
    name: str = typer.Option("weierstrass", "--name"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """Discrete Weierstrass function of a torus; the orbit defaults to the one stored by gen."""
    def action() -> None:
        K = io.load_complex(complex_file)
        if orbit is not None:
            vertices = _parse_ints(orbit)
        elif K.meta.get("orbit"):
            vertices = [int(v) for v in K.meta["orbit"]]
        else:
            raise PackingError("No --orbit given and the complex stores none", category=ErrorCategory.USAGE)
        _finish(weierstrass(K, vertices, name, **_solver(tol, max_iters)), out_dir, as_json)

    _run(action, verbose)


@app.command("holonomy")
def holonomy_command(
    complex_file: str = COMPLEX,
    label_file: str = typer.Option(..., "--label", "-l", help="Label JSON file"),
    loop: str = typer.Option("generator", "--loop", help="'generator' or comma separated face indices"),
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """
    Holonomy of a closed face chain under a label.

    Examples:
        cpb holonomy --complex kp.json --label r.json --loop generator
    """
    def action() -> None:
        K = io.load_complex(complex_file)
        R, Phi, _, _, geometry = io.load_label(label_file)
        loops = generator_loops(K) if loop == "generator" else [_parse_ints(loop)]
        results = [holonomy(K, R, Phi, chain, geometry).to_dict() for chain in loops]
        if as_json:
            typer.echo(json.dumps(results, indent=2, sort_keys=True))
            return
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("#", style="dim", width=4)
        table.add_column("Faces")
        table.add_column("Displacement", justify="right")
        table.add_column("Class")
        table.add_column("Matrix")
        for k, h in enumerate(results, 1):
            matrix = "; ".join(
                " ".join(f"{complex(*z):.4g}" for z in row) for row in h["matrix"]
            )
            faces = ",".join(map(str, h["loop"][:8])) + ("..." if len(h["loop"]) > 8 else "")
            table.add_row(str(k), faces, f"{h['displacement']:.3e}", h["classification"], matrix)
        console.print(table)

    _run(action, verbose)


@app.command()
def render(
    packing_file: str = typer.Option(..., "--packing", "-p", help="Packing JSON file"),
    complex_file: Optional[str] = typer.Option(None, "--complex", "-k", help="Complex for carrier edges"),
    output: str = typer.Option(..., "--output", help="SVG file to write"),
    size: float = typer.Option(600.0, "--size", help="Panel size in pixels"),
    verbose: bool = VERBOSE,
):
    """Render a packing document as SVG."""
    def action() -> None:
        doc = io.read_json(packing_file, PackingDocument)
        if Geometry(doc.geometry) == Geometry.SPHERICAL:
            document = render_sphere_svg(io.caps_from_document(doc), size=size)
        else:
            K = io.load_complex(complex_file) if complex_file else None
            roles = roles_from_records(K.holes) if K is not None else {}
            document = render_svg(io.packing_from_document(doc), K, roles, edges=K is not None, size=size)
        write_svg(output, document)
        console.print(f"[green]✓[/green] {len(doc.circles)} circles → {output}")

    _run(action, verbose)


@app.command("sweep")
def sweep_command(
    complex_file: str = COMPLEX,
    spec_file: str = typer.Option(..., "--spec", "-s", help="Spec file; the first singular or shifted spec is swept"),
    parameter: str = typer.Option("gamma1", "--parameter", help="Dial to perturb"),
    deltas: str = typer.Option("0.1,0.01,0.001,0.0001", "--deltas", help="Comma separated perturbations"),
    name: str = typer.Option("sweep", "--name"),
    tol: Optional[float] = TOL,
    max_iters: Optional[int] = MAX_ITERS,
    out_dir: Optional[str] = OUT_DIR,
    as_json: bool = AS_JSON,
    verbose: bool = VERBOSE,
):
    """Restricted-label changes for shrinking perturbations of a black-hole dial."""
    def action() -> None:
        K = io.load_complex(complex_file)
        holes = [s for s in io.load_specs(spec_file) if s.kind in ("singular", "shifted")]
        if not holes:
            raise PackingError("Spec file holds no singular or shifted spec", category=ErrorCategory.USAGE)
        try:
            steps = [float(x) for x in deltas.split(",") if x]
        except ValueError as e:
            raise PackingError(f"Bad deltas: {deltas!r}", category=ErrorCategory.USAGE, original_error=e)
        run = sweep(K, holes[0], parameter, steps, name, **_solver(tol, max_iters))  # type: ignore[arg-type]
        if as_json:
            _finish(run, out_dir, as_json)
            return
        write_outputs(run, Path(out_dir or get_settings().out_dir))
        table = Table(show_header=True, header_style="bold magenta")
        table.add_column("Delta", justify="right")
        table.add_column("Max change", justify="right")
        for row in run.report.extra["changes"]:
            table.add_row(f"{row['delta']:.1e}", f"{row['change']:.3e}")
        console.print(table)
        console.print(f"Monotone: {run.report.extra['monotone']}")

    _run(action, verbose)


@app.command()
def version():
    """Show version information."""
    from . import __version__
    console.print(f"cp-branching version {__version__}")


def main() -> None:
    """Main CLI entry point."""
    app()


if __name__ == "__main__":
    main()
