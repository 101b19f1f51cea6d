"""Error taxonomy for combinatorial, geometric and numerical failures."""

import logging
import time
from enum import Enum
from typing import Any, Dict, Optional

from pydantic import ValidationError

logger = logging.getLogger(__name__)


class ErrorSeverity(Enum):
    """Classification of error severity levels."""
    LOW = "low"           # Diagnostic only, computation may continue
    MEDIUM = "medium"     # Input rejected, caller can fix and retry
    HIGH = "high"         # Numerical failure for a valid input
    CRITICAL = "critical" # Internal inconsistency


class ErrorCategory(Enum):
    """Categories of errors, used to pick CLI exit codes."""
    COMBINATORICS = "combinatorics"  # Invalid complexes and surgeries
    GEOMETRY = "geometry"            # Invalid radii, overlaps, points
    SOLVER = "solver"                # Non-convergence, (★) failures
    HOLONOMY = "holonomy"            # Non-trivial holonomy, winding mismatch
    IO = "io"                        # Malformed documents
    USAGE = "usage"                  # Bad arguments
    UNKNOWN = "unknown"


class PackingError(Exception):
    """Base exception for packing computations."""

    def __init__(
        self,
        message: str,
        category: ErrorCategory = ErrorCategory.UNKNOWN,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        context: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None,
    ):
        """
        Initialize packing error.

        Args:
            message: Human-readable error message
            category: Error category, decides the exit code
            severity: Error severity level
            context: Structured diagnostics (vertices, residuals, scan tables)
            original_error: Original exception that caused this error
        """
        super().__init__(message)
        self.message = message
        self.category = category
        self.severity = severity
        self.context = context or {}
        self.original_error = original_error
        self.timestamp = time.time()

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready diagnostic record."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "category": self.category.value,
            "severity": self.severity.value,
            "context": self.context,
        }


class CombinatoricsError(PackingError):
    """Invalid complex or surgery request."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.COMBINATORICS)
        super().__init__(message, **kwargs)


class GeometryError(PackingError):
    """Invalid metric input."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.GEOMETRY)
        super().__init__(message, **kwargs)


class SolverError(PackingError):
    """Label computation failed."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.SOLVER)
        kwargs.setdefault("severity", ErrorSeverity.HIGH)
        super().__init__(message, **kwargs)


class HolonomyError(PackingError):
    """Layout does not close up or wraps the wrong number of times."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.HOLONOMY)
        kwargs.setdefault("severity", ErrorSeverity.HIGH)
        super().__init__(message, **kwargs)


class DocumentError(PackingError):
    """Malformed JSON document."""

    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.IO)
        super().__init__(message, **kwargs)


# Complex construction and surgery

class NonManifold(CombinatoricsError):
    pass


class OrientationError(CombinatoricsError):
    pass


class Disconnected(CombinatoricsError):
    pass


class PinchedVertex(CombinatoricsError):
    pass


class UnknownVertex(CombinatoricsError):
    pass


class BoundaryEdge(CombinatoricsError):
    pass


class FlipWouldCreateDuplicateEdge(CombinatoricsError):
    pass


class FlipWouldBreakDegree(CombinatoricsError):
    pass


class BoundaryVertex(CombinatoricsError):
    pass


class ResultNotManifold(CombinatoricsError):
    pass


class BoundaryFace(CombinatoricsError):
    pass


class AdjacentHoleOverlap(CombinatoricsError):
    pass


class TooFewPetals(CombinatoricsError):
    pass


class JumpsAdjacent(CombinatoricsError):
    pass


class TooSmall(CombinatoricsError):
    pass


class OpenChain(CombinatoricsError):
    pass


class LoopNotSeparating(CombinatoricsError):
    pass


class NoReflection(CombinatoricsError):
    pass


# Metric kernels

class BothInfinite(GeometryError):
    pass


class NegativeRadius(GeometryError):
    pass


class DegenerateTriple(GeometryError):
    pass


class ViolatesStarStar(GeometryError):
    pass


class LemmaHypothesisViolated(GeometryError):
    pass


class SingularMatrix(GeometryError):
    pass


class DegenerateFace(GeometryError):
    pass


class NotHorocycle(GeometryError):
    pass


class CoincidentCenters(GeometryError):
    pass


class PointOutsideInterstice(GeometryError):
    pass


class PointOutsideCircle(GeometryError):
    pass


class BranchValueOnCurve(GeometryError):
    pass


# Solver

class NonConvergence(SolverError):
    pass


class StarViolation(SolverError):
    pass


class InconsistentPins(SolverError):
    def __init__(self, message: str, **kwargs):
        kwargs.setdefault("category", ErrorCategory.USAGE)
        kwargs.setdefault("severity", ErrorSeverity.MEDIUM)
        super().__init__(message, **kwargs)


class NoSignChange(SolverError):
    """Coarse holonomy scan never changed sign; context carries the scan table."""


# Holonomy and winding

class HolonomyNontrivial(HolonomyError):
    pass


class WindingMismatch(HolonomyError):
    pass


class NonIntegralWinding(HolonomyError):
    pass


class ErrorClassifier:
    """Maps exceptions onto CLI exit codes."""

    EXIT_OK = 0
    EXIT_FAILURE = 1
    EXIT_VALIDATION = 2
    EXIT_NONCONVERGENCE = 3
    EXIT_HOLONOMY = 4

    @staticmethod
    def classify_exception(exception: Exception) -> PackingError:
        """
        Classify an exception into a PackingError.

        Args:
            exception: Original exception

        Returns:
            Classified PackingError
        """
        if isinstance(exception, PackingError):
            return exception

        if isinstance(exception, ValidationError):
            return DocumentError(
                f"Invalid document: {exception.error_count()} validation error(s)",
                context={"errors": exception.errors(include_url=False)},
                original_error=exception,
            )
        elif isinstance(exception, (FileNotFoundError, IsADirectoryError)):
            return DocumentError(f"File error: {exception}", original_error=exception)
        elif isinstance(exception, (ValueError, KeyError)):
            return PackingError(
                f"Invalid input: {exception}",
                category=ErrorCategory.USAGE,
                original_error=exception,
            )
        elif isinstance(exception, (FloatingPointError, ZeroDivisionError, OverflowError)):
            return PackingError(
                f"Numerical error: {exception}",
                category=ErrorCategory.SOLVER,
                severity=ErrorSeverity.HIGH,
                original_error=exception,
            )
        else:
            return PackingError(
                f"Unknown error: {exception}",
                category=ErrorCategory.UNKNOWN,
                severity=ErrorSeverity.CRITICAL,
                original_error=exception,
            )

    @classmethod
    def exit_code(cls, exception: Exception) -> int:
        """Exit code for an exception raised by a CLI command."""
        error = cls.classify_exception(exception)
        if isinstance(error, (NonConvergence, StarViolation, NoSignChange)):
            return cls.EXIT_NONCONVERGENCE
        if error.category == ErrorCategory.HOLONOMY:
            return cls.EXIT_HOLONOMY
        if error.category in (
            ErrorCategory.COMBINATORICS,
            ErrorCategory.GEOMETRY,
            ErrorCategory.IO,
            ErrorCategory.USAGE,
        ):
            return cls.EXIT_VALIDATION
        if error.category == ErrorCategory.SOLVER:
            return cls.EXIT_NONCONVERGENCE
        logger.error(f"Unclassified failure: {error.message}")
        return cls.EXIT_FAILURE
