"""Pydantic models and data schemas."""

from .schemas import (
    SCHEMA_VERSION,
    BranchKind,
    BranchSpec,
    BranchSpecFile,
    CircleRecord,
    ComplexDocument,
    FunctionKind,
    HoleRecord,
    JobStatus,
    LabelDocument,
    OverlapRecord,
    PackingDocument,
    PipelineReport,
    ScanSample,
    ShiftedSpec,
    SingularSpec,
    TraditionalSpec,
)

__all__ = [
    "SCHEMA_VERSION",
    "BranchKind",
    "BranchSpec",
    "BranchSpecFile",
    "CircleRecord",
    "ComplexDocument",
    "FunctionKind",
    "HoleRecord",
    "JobStatus",
    "LabelDocument",
    "OverlapRecord",
    "PackingDocument",
    "PipelineReport",
    "ScanSample",
    "ShiftedSpec",
    "SingularSpec",
    "TraditionalSpec",
]
