"""Pydantic models for cp-branching documents and branch specifications."""

import math
from enum import Enum
from typing import Annotated, Any, Dict, List, Literal, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = "cpb-1"

RadiusValue = Union[float, Literal["inf"]]


class JobStatus(str, Enum):
    """Scan sample execution status."""
    QUEUED = "queued"
    RUNNING = "running"
    COMPLETED = "completed"
    FAILED = "failed"
    CANCELLED = "cancelled"


class BranchKind(str, Enum):
    TRADITIONAL = "traditional"
    SINGULAR = "singular"
    SHIFTED = "shifted"


class FunctionKind(str, Enum):
    """Named pipelines."""
    BLASCHKE = "blaschke"
    AHLFORS = "ahlfors"
    WEIERSTRASS = "weierstrass"
    MAXPACK = "maxpack"
    BRANCHPACK = "branchpack"
    SWEEP = "sweep"


# ---------------------------------------------------------------------------
# Branch specifications
# ---------------------------------------------------------------------------

class TraditionalSpec(BaseModel):
    """Angle sum 2*pi*(order + 1) at an interior vertex."""
    kind: Literal["traditional"] = "traditional"
    vertex: int = Field(..., ge=1, description="Branch vertex")
    order: int = Field(1, ge=1, description="Branch order n, target angle sum 2*pi*(n+1)")

    @property
    def target(self) -> float:
        return 2.0 * math.pi * (self.order + 1)


class SingularSpec(BaseModel):
    """Black hole at a face; gamma3 = pi - gamma1 - gamma2."""
    kind: Literal["singular"] = "singular"
    face: Tuple[int, int, int] = Field(..., description="Positively oriented interior face")
    gamma1: float = Field(..., gt=0.0, lt=math.pi)
    gamma2: float = Field(..., gt=0.0, lt=math.pi)
    unbranched: bool = Field(False, description="Fall guy target 2*pi and left free")

    @model_validator(mode="after")
    def _check_partition(self) -> "SingularSpec":
        if self.gamma3 <= 0.0:
            raise ValueError(f"gamma1 + gamma2 = {self.gamma1 + self.gamma2} must stay below pi")
        return self

    @property
    def gamma3(self) -> float:
        return math.pi - self.gamma1 - self.gamma2

    @property
    def gammas(self) -> Tuple[float, float, float]:
        return self.gamma1, self.gamma2, self.gamma3

    @classmethod
    def from_gammas(cls, face: Sequence[int], gammas: Sequence[float], **kwargs) -> "SingularSpec":
        return cls(face=tuple(face), gamma1=gammas[0], gamma2=gammas[1], **kwargs)


class ShiftedSpec(BaseModel):
    """Black hole splitting a vertex into twins; jumps j1, j2 with dials gamma1, gamma2."""
    kind: Literal["shifted"] = "shifted"
    vertex: int = Field(..., ge=1)
    jumps: Tuple[int, int]
    gamma1: float = Field(..., ge=0.0, le=math.pi)
    gamma2: float = Field(..., ge=0.0, le=math.pi)
    unbranched: bool = Field(False, description="Fall guy target 2*pi and left free")

    @field_validator("jumps")
    @classmethod
    def _distinct(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if value[0] == value[1]:
            raise ValueError("Jump petals must differ")
        return value

    @property
    def gammas(self) -> Tuple[float, float]:
        return self.gamma1, self.gamma2

    def canonical(self, petals: Sequence[int]) -> "ShiftedSpec":
        """Rewrite a dial at pi as the preceding petal with dial 0, when still valid."""
        n = len(petals)
        jumps = list(self.jumps)
        gammas = [self.gamma1, self.gamma2]
        for i in range(2):
            if gammas[i] < math.pi:
                continue
            moved = petals[(petals.index(jumps[i]) - 1) % n]
            trial = list(jumps)
            trial[i] = moved
            a, b = petals.index(trial[0]), petals.index(trial[1])
            if a != b and (b - a) % n not in (1, n - 1):
                jumps, gammas[i] = trial, 0.0
        return self.model_copy(update={"jumps": tuple(jumps), "gamma1": gammas[0], "gamma2": gammas[1]})


BranchSpec = Annotated[Union[TraditionalSpec, SingularSpec, ShiftedSpec], Field(discriminator="kind")]


class BranchSpecFile(BaseModel):
    """JSON list of branch specifications."""
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    specs: List[BranchSpec] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)


# ---------------------------------------------------------------------------
# Complexes, labels and packings
# ---------------------------------------------------------------------------

class HoleRecord(BaseModel):
    """Surgery record of one black hole, stored with the complex it was cut into."""
    kind: Literal["singular", "shifted"]
    fall_guy: int = Field(..., ge=1)
    chaperones: List[int]
    horizon: List[int]
    region_faces: List[Tuple[int, int, int]]
    twins: Optional[Tuple[int, int]] = None
    jump_vertices: Optional[Tuple[int, int]] = None
    preceding: Optional[Tuple[int, int]] = None
    original_face: Optional[Tuple[int, int, int]] = None
    original_vertex: Optional[int] = None

    @model_validator(mode="after")
    def _chaperone_count(self) -> "HoleRecord":
        expected = 3 if self.kind == "singular" else 2
        if len(self.chaperones) != expected:
            raise ValueError(f"A {self.kind} hole has {expected} chaperones")
        return self


class ComplexDocument(BaseModel):
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    faces: List[Tuple[int, int, int]] = Field(..., min_length=1)
    meta: Dict[str, Any] = Field(default_factory=dict)
    holes: List[HoleRecord] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)


class OverlapRecord(BaseModel):
    edge: Tuple[int, int]
    angle: float = Field(..., ge=0.0, le=math.pi)


class LabelDocument(BaseModel):
    """Per-vertex radii plus the data the label was solved for."""
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    geometry: str = "hyperbolic"
    radii: Dict[int, RadiusValue]
    overlaps: List[OverlapRecord] = Field(default_factory=list)
    targets: Dict[int, float] = Field(default_factory=dict)
    pinned: List[int] = Field(default_factory=list)

    model_config = ConfigDict(populate_by_name=True)


class CircleRecord(BaseModel):
    """One circle: center is the ideal point for horocycles, a unit 3-vector on the sphere."""
    v: int
    center: List[float] = Field(..., min_length=2, max_length=3)
    radius: RadiusValue
    e_center: Optional[List[float]] = None
    e_radius: Optional[float] = None


class PackingDocument(BaseModel):
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    geometry: str
    circles: List[CircleRecord] = Field(default_factory=list)
    tree: List[Tuple[int, int]] = Field(default_factory=list)
    base_face: int = 0

    model_config = ConfigDict(populate_by_name=True)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

class ScanSample(BaseModel):
    """One evaluated parameter of a scan."""
    index: int
    parameter: float
    status: JobStatus = JobStatus.QUEUED
    value: Optional[float] = None
    displacement: Optional[float] = None
    error: Optional[str] = None


class PipelineReport(BaseModel):
    """Artifacts and diagnostics of one pipeline run."""
    schema_: str = Field(SCHEMA_VERSION, alias="schema")
    kind: FunctionKind
    name: str
    version: str
    domain: Optional[str] = Field(None, description="Domain packing file")
    image: Optional[str] = Field(None, description="Image packing file")
    complex: Optional[str] = Field(None, description="Complex after surgery, when holes were cut")
    svg: Optional[str] = None
    normalization: Dict[str, Any] = Field(default_factory=dict)
    windings: Dict[str, int] = Field(default_factory=dict)
    branch: List[Dict[str, Any]] = Field(default_factory=list)
    holonomy: List[Dict[str, Any]] = Field(default_factory=list)
    residuals: Dict[str, float] = Field(default_factory=dict)
    star: List[Dict[str, Any]] = Field(default_factory=list)
    star_star: bool = True
    scan: List[ScanSample] = Field(default_factory=list)
    extra: Dict[str, Any] = Field(default_factory=dict)

    model_config = ConfigDict(populate_by_name=True)
