"""
Exception hierarchy for the closed geodesic toolkit.

Library code raises these; the CLI maps them to exit code 2 and the MCP server
maps them to {"success": False, "error": ..., "error_type": ...} payloads.
"""

from typing import Any, Dict, Optional


class GeodesicError(Exception):
    """Base class for every error raised by the toolkit."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = dict(details or {})

    def to_payload(self) -> Dict[str, Any]:
        return {
            "success": False,
            "error": self.message,
            "error_type": type(self).__name__,
            "details": self.details,
        }


# Mesh construction and validation

class MeshError(GeodesicError):
    pass


class ParseError(MeshError):
    pass


class TopologyError(MeshError):
    pass


class DegenerateFace(MeshError):
    pass


class SizeError(MeshError):
    pass


class NonPositiveAxis(MeshError):
    pass


class SelfIntersectionError(MeshError):
    pass


# Curves, level sets and distance queries

class CurveError(GeodesicError):
    pass


class EmptyRegion(CurveError):
    pass


class DegenerateLevel(CurveError):
    pass


class NoComponentNear(CurveError):
    pass


class WindowTooLarge(CurveError):
    pass


class NonGenericCrossing(CurveError):
    pass


class PathThroughCurve(CurveError):
    pass


class GapTooLarge(CurveError):
    pass


# Shortening, tracking and constructions

class SolverError(GeodesicError):
    pass


class CorridorMiss(SolverError):
    pass


class NeverIntersects(SolverError):
    pass


class NeverSeparates(SolverError):
    pass


class RotmanViolated(SolverError):
    pass


class ContinuityLost(SolverError):
    pass


class SideTooThin(SolverError):
    pass


class BudgetExceeded(SolverError):
    pass


class FateUndecided(SolverError):
    pass


class ConstructionDegenerate(SolverError):
    pass


class GenericityFailure(SolverError):
    pass


class PreconditionError(SolverError):
    pass


# End-to-end pipeline

class PipelineError(GeodesicError):
    pass


class NoGeodesicFound(PipelineError):
    pass


class NoDistinctGeodesic(PipelineError):
    pass


class RegionExtractionFailed(PipelineError):
    pass
