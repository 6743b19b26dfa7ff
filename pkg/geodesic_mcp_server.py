"""
Closed Geodesic MCP Server

Exposes mesh generation, mesh checks, the shortest/second geodesic pipeline,
the width check and the covering arithmetic as FastMCP tools. Every tool
returns a plain dict with a `success` flag and an ISO timestamp; library
errors come back as error payloads instead of being raised.
"""

import io
import logging
from datetime import datetime
from typing import Any, Dict, Optional

from fastmcp import FastMCP

from config import LOG_FORMAT, load_settings, log_level
from constructions import bracket_n, covering_N, rotman_bound
from errors import GeodesicError
from harness import find_shortest_geodesic, run_pipeline, width1_check
from mesh import GENERATORS, SKIMAGE_AVAILABLE, TriMesh, load_mesh, save_off

logger = logging.getLogger(__name__)

SERVICE_NAME = "Closed Geodesic MCP Server"
VERSION = "1.0.0"

mcp = FastMCP("ClosedGeodesics")

if not SKIMAGE_AVAILABLE:
    logger.warning("scikit-image not available; the starfish generator is disabled")


def _now() -> str:
    return datetime.now().isoformat()


def _ok(**payload) -> Dict[str, Any]:
    return {"success": True, "timestamp": _now(), **payload}


def _failed(exc: Exception) -> Dict[str, Any]:
    if isinstance(exc, GeodesicError):
        payload = exc.to_payload()
    else:
        payload = {"success": False, "error": str(exc), "error_type": type(exc).__name__, "details": {}}
    payload["timestamp"] = _now()
    logger.info("tool error %s: %s", payload["error_type"], payload["error"])
    return payload


def _mesh_from_text(mesh_text: str, format: str) -> TriMesh:
    return load_mesh(io.StringIO(mesh_text), format.lower())


def health_check() -> Dict[str, Any]:
    """
    Health check endpoint for service monitoring.

    Returns:
        Service status, version and the available tools
    """
    return {
        "success": True,
        "status": "healthy",
        "service": SERVICE_NAME,
        "version": VERSION,
        "timestamp": _now(),
        "available_tools": list(TOOLS),
        "generators": sorted(GENERATORS),
        "optional_stack": {"scikit_image": SKIMAGE_AVAILABLE},
    }


def generate_mesh(kind: str, params: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Generate a test surface.

    Args:
        kind: icosphere, ellipsoid, capsule, starfish, dumbbell or bumpy
        params: keyword arguments for the generator (e.g. {"subdiv": 3})

    Returns:
        Mesh diagnostics and the mesh as OFF text
    """
    if kind not in GENERATORS:
        return {"success": False, "error": f"Unknown mesh kind. Available kinds: {sorted(GENERATORS)}",
                "error_type": "ValueError", "details": {}, "timestamp": _now()}
    try:
        mesh = GENERATORS[kind](**(params or {}))
        return _ok(kind=kind, diagnostics=mesh.diagnostics().model_dump(), off=save_off(mesh))
    except (GeodesicError, TypeError, ValueError) as exc:
        return _failed(exc)


def check_mesh(mesh_text: str, format: str = "off") -> Dict[str, Any]:
    """
    Validate a closed triangulated sphere.

    Args:
        mesh_text: OFF or OBJ file contents
        format: "off" or "obj"
    """
    try:
        mesh = _mesh_from_text(mesh_text, format)
        return _ok(diagnostics=mesh.diagnostics().model_dump())
    except GeodesicError as exc:
        return _failed(exc)


def find_geodesic(mesh_text: str, format: str = "off", seeds: int = 4, seed: int = 0) -> Dict[str, Any]:
    """
    Find the shortest closed geodesic.

    Args:
        mesh_text: OFF or OBJ file contents
        format: "off" or "obj"
        seeds: number of sweepouts and of random loops to try
        seed: random seed
    """
    try:
        mesh = _mesh_from_text(mesh_text, format)
        settings = load_settings({"seeds": seeds, "rng_seed": seed})
        record = find_shortest_geodesic(mesh, settings=settings)
        return _ok(geodesic=record.summary().model_dump(), area=mesh.area)
    except (GeodesicError, ValueError) as exc:
        return _failed(exc)


def verify_mesh(mesh_text: str, format: str = "off", seed: int = 0) -> Dict[str, Any]:
    """
    Run the full pipeline: both geodesics, the case label and every constant row.

    Returns:
        The verification report and whether all applicable checks passed
    """
    try:
        mesh = _mesh_from_text(mesh_text, format)
        report, _, _ = run_pipeline(mesh, load_settings({"rng_seed": seed}))
        return _ok(report=report.model_dump(mode="json"), all_pass=report.all_applicable_pass)
    except (GeodesicError, ValueError) as exc:
        return _failed(exc)


def width_check(mesh_text: str, format: str = "off", seed: int = 0) -> Dict[str, Any]:
    """
    Estimate the width and compare it with 1600 sqrt(A).
    """
    try:
        mesh = _mesh_from_text(mesh_text, format)
        width, bound, passed = width1_check(mesh, load_settings({"rng_seed": seed}))
        return _ok(width=width, bound=bound, passed=passed)
    except (GeodesicError, ValueError) as exc:
        return _failed(exc)


def bracket(area: float, L1: float) -> Dict[str, Any]:
    """
    Covering arithmetic for a surface of area `area` with shortest geodesic length `L1`.

    Returns:
        n with 4 sqrt(2A)/(n+1) < L1 <= 4 sqrt(2A)/n, the covering count N and the bound
    """
    try:
        n = bracket_n(area, L1)
        return _ok(n=n, N=covering_N(n), rotman_bound=rotman_bound(area))
    except GeodesicError as exc:
        return _failed(exc)


TOOLS = {
    "health_check": health_check,
    "generate_mesh": generate_mesh,
    "check_mesh": check_mesh,
    "find_geodesic": find_geodesic,
    "verify_mesh": verify_mesh,
    "width_check": width_check,
    "bracket": bracket,
}

for _tool in TOOLS.values():
    mcp.tool(_tool)


if __name__ == "__main__":
    logging.basicConfig(level=log_level(), format=LOG_FORMAT)
    logger.info("%s %s starting with tools: %s", SERVICE_NAME, VERSION, ", ".join(TOOLS))
    mcp.run()
