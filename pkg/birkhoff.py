"""
Birkhoff curve shortening on a TriMesh.

One step marks n equally spaced break points on the curve, replaces the arcs
between even-indexed break points by locally shortest paths, then repeats
with break points at the midpoints of the new arcs. Lengths never increase.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from config import Settings
from curves import (
    ClosedCurve,
    Path,
    SurfacePoint,
    arc,
    crossing_count,
    curves_meet,
    hausdorff_distance,
    insert_at_arclengths,
    join_paths,
    point_location,
    polyline_records,
    resample,
    shortest_in_corridor,
    winding_mod2,
)
from errors import (
    CorridorMiss,
    EmptyRegion,
    NeverIntersects,
    NeverSeparates,
    NonGenericCrossing,
    PreconditionError,
)
from mesh import BARY_TOL, TriMesh
from metric import LevelCycle, local_path, shortest_path

logger = logging.getLogger(__name__)

STALL_RELATIVE_DECREASE = 1e-10
RESIDUAL_CHECK_DECREASE = 1e-5


class OutcomeKind(str, Enum):
    GEODESIC = "Geodesic"
    POINT_COLLAPSE = "PointCollapse"
    STALLED = "Stalled"


@dataclass
class HomotopyTrace:
    """Every curve visited by a shortening run, in order."""

    curves: List[ClosedCurve] = field(default_factory=list)
    lengths: List[float] = field(default_factory=list)

    def append(self, c: ClosedCurve) -> None:
        self.curves.append(c)
        self.lengths.append(c.length)

    def __len__(self) -> int:
        return len(self.curves)

    def __getitem__(self, k):
        return self.curves[k]

    def max_step_hausdorff(self) -> float:
        steps = [hausdorff_distance(a, b) for a, b in zip(self.curves[:-1], self.curves[1:])]
        return max(steps, default=0.0)

    def records(self, mesh: TriMesh, every: int = 1) -> List[Dict[str, Any]]:
        """Per-step polyline records for animation and debugging."""
        out = []
        for k in range(0, len(self.curves), max(1, every)):
            out.append({"step": k, "length": self.lengths[k],
                        "points": polyline_records(mesh, self.curves[k])})
        return out


@dataclass
class ShorteningOutcome:
    kind: OutcomeKind
    curve: ClosedCurve
    residual: float
    iterations: int
    point: Optional[SurfacePoint] = None
    trace: Optional[HomotopyTrace] = None
    stopped: bool = False
    reason: str = ""
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def length(self) -> float:
        return self.curve.length

    @property
    def is_geodesic(self) -> bool:
        return self.kind is OutcomeKind.GEODESIC

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "length": self.length,
            "residual": self.residual,
            "iterations": self.iterations,
            "stopped": self.stopped,
            "reason": self.reason,
        }


# --- single step ------------------------------------------------------------------

def geodesic_join(mesh: TriMesh, p: SurfacePoint, q: SurfacePoint, hint: Sequence[int],
                  widen: bool = False, steiner: int = 3) -> Path:
    """Locally shortest path from p to q through the face corridor `hint`.

    With widen=True a corridor miss falls back to a bounded graph search
    around p.
    """
    xp, xq = p.position(mesh), q.position(mesh)
    try:
        if mesh.barycentric(int(hint[0]), xp).min() < -BARY_TOL:
            raise CorridorMiss("start point is not in the first corridor face", {"face": int(hint[0])})
        if mesh.barycentric(int(hint[-1]), xq).min() < -BARY_TOL:
            raise CorridorMiss("end point is not in the last corridor face", {"face": int(hint[-1])})
        return shortest_in_corridor(mesh, hint, xp, xq)
    except CorridorMiss as exc:
        if not widen:
            raise
        logger.debug("widening corridor after miss: %s", exc)
        radius = 2.0 * float(np.linalg.norm(xq - xp)) + 2.0 * mesh.max_edge
        try:
            return local_path(mesh, p, q, radius, steiner)
        except EmptyRegion as miss:
            raise CorridorMiss("no path within the widened search radius",
                               {"radius": radius, **exc.details}) from miss


def _replace_arcs(mesh: TriMesh, c: ClosedCurve, breaks: np.ndarray, steiner: int) -> List[Path]:
    paths = []
    for k in range(len(breaks)):
        a, b = int(breaks[k]), int(breaks[(k + 1) % len(breaks)])
        piece = arc(c, a, b)
        joined = geodesic_join(mesh, piece.start_point(mesh), piece.end_point(mesh), piece.faces,
                               widen=True, steiner=steiner)
        paths.append(joined if joined.length < piece.length else piece)
    return paths


def birkhoff_step(mesh: TriMesh, c: ClosedCurve, n: int, steiner: int = 3) -> ClosedCurve:
    if n < 4 or n % 2:
        raise PreconditionError("break count must be even and at least 4", {"n": n})
    r = resample(mesh, c, n)
    even = np.unique(r.breaks[0::2])
    if len(even) < 2:
        return c
    first = _replace_arcs(mesh, r, even, steiner)
    half = join_paths(mesh, first)

    starts = np.concatenate([[0.0], np.cumsum([p.length for p in first])[:-1]])
    mids = [s + p.length / 2.0 for s, p in zip(starts, first)]
    shifted = insert_at_arclengths(mesh, half, mids)
    odd = np.unique(shifted.breaks)
    if len(odd) < 2:
        return half
    out = join_paths(mesh, _replace_arcs(mesh, shifted, odd, steiner))
    return out if out.length <= c.length else c


# --- geodesic test -----------------------------------------------------------------

def turning_defects(mesh: TriMesh, c: ClosedCurve) -> np.ndarray:
    """Per-vertex shortfall of the smaller side angle below pi."""
    n = c.n
    if n < 3:
        return np.full(max(n, 1), math.pi)
    out = np.zeros(n)
    for i in range(n):
        x = c.points[i]
        f_in, f_out = int(c.faces[i - 1]), int(c.faces[i])
        try:
            loc = point_location(mesh, x, (f_in, f_out))
        except NonGenericCrossing:
            loc = mesh.locate(f_out, x)
        total = mesh.cone_total(loc)
        a_in = mesh.cone_angle(loc, f_in, x, c.points[i - 1])
        a_out = mesh.cone_angle(loc, f_out, x, c.points[(i + 1) % n])
        side = (a_out - a_in) % total
        out[i] = max(0.0, math.pi - min(side, total - side))
    return out


def geodesic_residual(mesh: TriMesh, c: ClosedCurve) -> float:
    """Residual of c: the largest turning defect over its vertices."""
    return float(turning_defects(mesh, c).max())


def is_geodesic(mesh: TriMesh, c: ClosedCurve, tol: float) -> bool:
    return geodesic_residual(mesh, c) <= tol


# --- full run ------------------------------------------------------------------------

def break_count(mesh: TriMesh, length: float, settings: Settings) -> int:
    n = max(settings.min_break_points, int(math.ceil(length / (0.5 * mesh.min_edge))))
    n = min(n, settings.max_break_points)
    n -= n % 2
    return max(n, 4)


StopWhen = Callable[[ClosedCurve, int], bool]


def birkhoff_run(mesh: TriMesh, c: ClosedCurve, settings: Optional[Settings] = None,
                 n: Optional[int] = None, geodesic_tol: Optional[float] = None,
                 collapse_tol: Optional[float] = None, max_iter: Optional[int] = None,
                 record_trace: bool = False, stop_when: Optional[StopWhen] = None) -> ShorteningOutcome:
    """Shorten c until it is a geodesic, collapses to a point or stops moving.

    A step that shortens the curve by more than RESIDUAL_CHECK_DECREASE
    (relative) rules out a geodesic, so the residual is only evaluated on the
    first curve and after steps that barely move.
    """
    settings = settings or Settings()
    tol = settings.geodesic_tol if geodesic_tol is None else geodesic_tol
    ctol = settings.collapse_tol_for(mesh) if collapse_tol is None else collapse_tol
    limit = settings.max_iter if max_iter is None else max_iter
    trace = HomotopyTrace() if record_trace else None
    lengths: List[float] = []
    window = settings.stall_window

    def finish(kind, curve, it, residual=None, **extra):
        if residual is None:
            residual = geodesic_residual(mesh, curve)
        logger.debug("birkhoff run: %s after %d iterations, length %.6g, residual %.3g",
                     kind.value, it, curve.length, residual)
        return ShorteningOutcome(kind, curve, residual, it, trace=trace, **extra)

    it = 0
    while True:
        if trace is not None:
            trace.append(c)
        lengths.append(c.length)
        if c.is_point(ctol):
            centroid = c.points.mean(axis=0)
            return finish(OutcomeKind.POINT_COLLAPSE, c, it, math.pi,
                          point=SurfacePoint.locate(mesh, centroid), reason="length below collapse tolerance")
        residual: Optional[float] = None
        if len(lengths) < 2 or lengths[-2] - lengths[-1] <= RESIDUAL_CHECK_DECREASE * lengths[-2]:
            residual = geodesic_residual(mesh, c)
            if residual <= tol:
                return finish(OutcomeKind.GEODESIC, c, it, residual, reason="residual within tolerance")
        if stop_when is not None and stop_when(c, it):
            return finish(OutcomeKind.STALLED, c, it, residual, stopped=True, reason="stopped by caller")
        if it >= limit:
            return finish(OutcomeKind.STALLED, c, it, residual, reason="iteration limit")
        if len(lengths) > window:
            before = lengths[-window - 1]
            if before - lengths[-1] <= STALL_RELATIVE_DECREASE * before:
                return finish(OutcomeKind.STALLED, c, it, residual, reason="length stopped decreasing")
        step_n = n if n is not None else break_count(mesh, c.length, settings)
        c = birkhoff_step(mesh, c, step_n, settings.steiner_per_edge)
        it += 1
        if it % 100 == 0:
            logger.debug("birkhoff iteration %d: length %.6g", it, c.length)


# --- trace queries -----------------------------------------------------------------

def last_intersection_index(mesh: TriMesh, trace: Union[HomotopyTrace, Sequence[ClosedCurve]],
                            cycle: Union[LevelCycle, ClosedCurve]) -> int:
    """Index of the last trace curve meeting `cycle`."""
    curves = trace.curves if isinstance(trace, HomotopyTrace) else list(trace)
    target = cycle.curve if isinstance(cycle, LevelCycle) else cycle
    if not curves:
        raise NeverIntersects("empty trace")
    if curves_meet(mesh, curves[-1], target):
        raise NeverSeparates("the final trace curve still meets the cycle",
                             {"final_length": curves[-1].length})
    for k in range(len(curves) - 2, -1, -1):
        if curves_meet(mesh, curves[k], target):
            return k
    raise NeverIntersects("no trace curve meets the cycle", {"steps": len(curves)})


def track_last_intersection(mesh: TriMesh, trace: Union[HomotopyTrace, Sequence[ClosedCurve]],
                            cycle: Union[LevelCycle, ClosedCurve]) -> ClosedCurve:
    curves = trace.curves if isinstance(trace, HomotopyTrace) else list(trace)
    k = last_intersection_index(mesh, curves, cycle)
    target = cycle.curve if isinstance(cycle, LevelCycle) else cycle
    if curves[k].length >= target.length:
        raise PreconditionError("tracked curve is not shorter than the cycle it last meets",
                                {"index": k, "length": curves[k].length, "cycle_length": target.length})
    return curves[k]


def trace_winding_constant(mesh: TriMesh, trace: Union[HomotopyTrace, Sequence[ClosedCurve]],
                           p: SurfacePoint, far: SurfacePoint, steiner: int = 3) -> bool:
    """Does winding_mod2 around p stay the same along the trace?"""
    curves = trace.curves if isinstance(trace, HomotopyTrace) else list(trace)
    path = shortest_path(mesh, p, far, steiner=steiner)
    seen = set()
    for c in curves:
        try:
            seen.add(crossing_count(mesh, c, path) % 2)
        except NonGenericCrossing:
            seen.add(winding_mod2(mesh, c, p, far, steiner=steiner))
        if len(seen) > 1:
            return False
    return True
