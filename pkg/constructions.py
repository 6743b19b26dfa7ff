"""
Sweepouts, min-max and the second-geodesic constructions.

The long-sphere construction pulls N copies of a short loop around one end
across the sphere to the other end, one copy at a time, with the copies
strung together along a spine path, and bisects on where the shortening
process sends each intermediate curve. The figure-eight constructions build
either a single spine-connected candidate or an explicit sweepout that is
then pulled tight.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from birkhoff import (
    OutcomeKind,
    ShorteningOutcome,
    birkhoff_run,
    birkhoff_step,
    break_count,
    track_last_intersection,
)
from config import Settings
from curves import (
    ClosedCurve,
    Path,
    Region,
    SurfacePoint,
    carrier_mask,
    complement_regions,
    concatenate,
    crossing_count,
    crossing_events,
    densify,
    hausdorff_distance,
    insert_at_arclengths,
    is_distinct,
    open_at,
    oriented_intersection_number,
    point_at,
    polyline_records,
    project_to_curve,
    region_containing,
    reverse,
    self_intersections,
    sub_path,
    winding_mod2,
)
from errors import (
    BudgetExceeded,
    ConstructionDegenerate,
    ContinuityLost,
    CurveError,
    DegenerateLevel,
    FateUndecided,
    GenericityFailure,
    NeverIntersects,
    NeverSeparates,
    NoComponentNear,
    NonGenericCrossing,
    PreconditionError,
    RotmanViolated,
    SideTooThin,
)
from mesh import TriMesh
from metric import (
    DistanceField,
    LevelCycle,
    coarea_slice_search,
    component_through,
    distance_field,
    farthest_point,
    level_set,
    region_diameter,
    shortest_path,
)

logger = logging.getLogger(__name__)

LONG_SPHERE_DEPTH = 170.0
LONG_SPHERE_CONSTANT = 320.0
FIGURE_EIGHT_CONSTANT = 16.0 * math.sqrt(2.0)
SHORT_Z_CONSTANT = 2804.0 * math.sqrt(2.0) + 64.0
SHORT_XY_CONSTANT = 64.0 * math.sqrt(2.0)
UNIVERSAL_CONSTANT = 2.0 ** 9 * 10.0 ** 4

MIN_SLICES = 64
RESLICE_ATTEMPTS = 3
RESLICE_SHRINK = 0.75
MAX_HOMOTOPY_STEPS = 200
OFFSET_RESOLUTIONS = 2.5
LENGTH_GRACE = 0.01
NONCONTRACTIBILITY_ATTEMPTS = 5
REFERENCE_POINTS = 8
WHISKER_STEPS = 16


class CaseLabel(str, Enum):
    LONG_SPHERE = "LongSphere"
    STARFISH_ALL_LONG = "StarfishAllLong"
    STARFISH_SHORT_Z = "StarfishShortZ"
    STARFISH_SHORT_XY = "StarfishShortXY"
    GENERAL_FALLBACK = "GeneralFallback"


def rotman_bound(area: float) -> float:
    return 4.0 * math.sqrt(2.0 * area)


def bracket_n(area: float, L1: float) -> int:
    """The integer n with 4 sqrt(2A)/(n+1) < L1 <= 4 sqrt(2A)/n."""
    bound = rotman_bound(area)
    if not 0 < L1 <= bound:
        raise RotmanViolated("shortest geodesic exceeds 4 sqrt(2A)",
                             {"L1": L1, "area": area, "bound": bound})
    n = max(1, int(math.floor(bound / L1)))
    while bound / (n + 1) >= L1:
        n += 1
    while n > 1 and L1 > bound / n:
        n -= 1
    return n


def covering_N(n: int) -> int:
    if n < 1:
        raise PreconditionError("covering count needs n >= 1", {"n": n})
    return ((n + 1) ** 2 + 16) // 8


# --- sweepouts ---------------------------------------------------------------------

def point_curve(mesh: TriMesh, sp: SurfacePoint) -> ClosedCurve:
    return ClosedCurve(np.array([sp.position(mesh)]), np.array([sp.face]))


@dataclass
class Sweepout:
    slices: List[ClosedCurve]
    continuity_bound: float
    provenance: str = ""
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([c.length for c in self.slices])

    @property
    def max_length(self) -> float:
        return float(self.lengths.max()) if self.slices else 0.0

    def gaps(self) -> np.ndarray:
        return np.array([hausdorff_distance(a, b) for a, b in zip(self.slices[:-1], self.slices[1:])])

    def violations(self) -> List[int]:
        return [int(k) for k in np.nonzero(self.gaps() > self.continuity_bound)[0]]

    def records(self, mesh: TriMesh) -> List[Dict[str, Any]]:
        return [{"index": k, "length": c.length, "points": polyline_records(mesh, c)}
                for k, c in enumerate(self.slices)]


def assemble_sweepout(mesh: TriMesh, slices: Sequence[ClosedCurve], provenance: str,
                      details: Optional[Dict[str, Any]] = None, bound: Optional[float] = None,
                      settings: Optional[Settings] = None) -> Sweepout:
    """Wrap a hand-built family and check it against its declared continuity bound.

    Without an explicit bound the family must move by at most
    settings.continuity_factor mesh edges between consecutive slices.
    """
    settings = settings or Settings()
    bound = settings.continuity_bound_for(mesh) if bound is None else float(bound)
    s = Sweepout(list(slices), bound, provenance, dict(details or {}))
    gaps = s.gaps()
    s.details.setdefault("max_gap", float(gaps.max()) if len(gaps) else 0.0)
    bad = [int(k) for k in np.nonzero(gaps > bound)[0]]
    if bad:
        raise ContinuityLost(f"{provenance}: {len(bad)} transitions exceed the continuity bound",
                             {"bound": bound, "transitions": bad[:10],
                              "gaps": [float(gaps[k]) for k in bad[:10]]})
    return s


def sweepout_from_distance(mesh: TriMesh, x: SurfacePoint, slices: int = MIN_SLICES,
                           steiner: int = 3) -> Sweepout:
    """Largest level cycle of the distance from x at evenly spaced levels."""
    if slices < MIN_SLICES:
        raise PreconditionError(f"a sweepout needs at least {MIN_SLICES} slices", {"slices": slices})
    field_x = distance_field(mesh, x, steiner)
    far, dmax = farthest_point(field_x)
    count = slices
    last: Optional[Sweepout] = None
    last_error: Optional[Exception] = None
    worst = np.inf
    for attempt in range(RESLICE_ATTEMPTS + 1):
        curves = [point_curve(mesh, x)]
        try:
            for k in range(1, count - 1):
                cycles = level_set(field_x, dmax * k / (count - 1))
                if not cycles:
                    raise DegenerateLevel("empty level", {"level": dmax * k / (count - 1)})
                curves.append(cycles[0].curve)
        except DegenerateLevel as exc:
            last_error = exc
            logger.debug("re-slicing after degenerate level (attempt %d): %s", attempt, exc)
            count = 2 * count - 1
            continue
        curves.append(point_curve(mesh, far))
        bound = 4.0 * dmax / (count - 1) + 2.0 * mesh.max_edge
        last = Sweepout(curves, bound, f"distance levels from face {x.face}",
                        {"source": list(x.position(mesh)), "farthest": dmax})
        gaps = last.gaps()
        bad = [int(k) for k in np.nonzero(gaps > bound)[0]]
        if not bad:
            return last
        logger.debug("continuity violated at %d transitions with %d slices", len(bad), count)
        # a jump that finer slicing does not shrink is a change of level component
        if float(gaps.max()) > RESLICE_SHRINK * worst:
            break
        worst = float(gaps.max())
        count = 2 * count - 1
    if last is None:
        raise DegenerateLevel("levels stay degenerate after refinement",
                              {"reason": str(last_error), "slices": count})
    raise ContinuityLost("distance sweepout stays discontinuous after re-slicing",
                         {"source_face": x.face, "slices": len(last.slices),
                          "transitions": last.violations()[:10], "bound": last.continuity_bound})


@dataclass
class MinMaxResult:
    width: float
    critical: ClosedCurve
    outcome: ShorteningOutcome
    widths: List[float]
    sweepout: Sweepout


def minmax_over_sweepout(mesh: TriMesh, s: Sweepout, settings: Optional[Settings] = None,
                         pull_tight_iters: Optional[int] = None) -> MinMaxResult:
    """Pull the sweepout tight and shorten its longest slice."""
    settings = settings or Settings()
    iters = settings.pull_tight_iters if pull_tight_iters is None else pull_tight_iters
    ctol = settings.collapse_tol_for(mesh)
    slices = list(s.slices)
    bound = s.continuity_bound
    ok_before = [hausdorff_distance(a, b) <= bound for a, b in zip(slices[:-1], slices[1:])]
    widths = [max(c.length for c in slices)]

    for it in range(iters):
        width = widths[-1]
        changed: List[int] = []
        for k in range(1, len(slices) - 1):
            c = slices[k]
            if c.length < settings.focus * width or c.is_point(ctol):
                continue
            cand = birkhoff_step(mesh, c, break_count(mesh, c.length, settings), settings.steiner_per_edge)
            if cand.length >= c.length:
                continue
            if (hausdorff_distance(cand, slices[k - 1]) <= bound
                    and hausdorff_distance(cand, slices[k + 1]) <= bound):
                slices[k] = cand
                changed.append(k)
        touched = sorted({t for k in changed for t in (k - 1, k)})
        for k in touched:
            if ok_before[k] and hausdorff_distance(slices[k], slices[k + 1]) > bound:
                raise ContinuityLost("pull-tight broke the continuity bound",
                                     {"iteration": it, "transition": k, "bound": bound})
        widths.append(max(c.length for c in slices))
        logger.debug("pull-tight iteration %d: width %.6g, %d slices moved", it, widths[-1], len(changed))
        if not changed:
            break

    lengths = [c.length for c in slices]
    critical = slices[int(np.argmax(lengths))]
    outcome = birkhoff_run(mesh, critical, settings)
    tight = Sweepout(slices, bound, s.provenance + " (pulled tight)", dict(s.details))
    return MinMaxResult(widths[-1], critical, outcome, widths, tight)


# --- offsets and collapses --------------------------------------------------------------

def _as_mask(side: Union[Region, np.ndarray]) -> np.ndarray:
    return side.mask if isinstance(side, Region) else np.asarray(side, dtype=bool)


def perturb_offside(mesh: TriMesh, gamma1: ClosedCurve, side: Union[Region, np.ndarray], eps: float,
                    steiner: int = 3) -> ClosedCurve:
    """A copy of gamma1 pushed about eps/2 into one complementary region."""
    resolution = mesh.max_edge / (steiner + 1)
    if eps < 2.0 * resolution:
        raise PreconditionError("offset must be at least twice the lattice resolution",
                                {"eps": eps, "resolution": resolution})
    mask = _as_mask(side)
    field_g = DistanceField(mesh, gamma1, steiner)
    r = eps / 2.0
    try:
        cycles = level_set(field_g, r)
    except (DegenerateLevel, PreconditionError) as exc:
        raise SideTooThin("no offset level around the curve", {"eps": eps, "reason": str(exc)}) from exc

    lat = field_g.lattice
    above = np.nonzero(field_g.values > r)[0]
    if len(above) == 0:
        raise SideTooThin("nothing lies farther than the offset", {"eps": eps})
    sub = lat.graph[above][:, above]
    _, labels = connected_components(sub, directed=False)
    node_faces = lat.node_face[above]
    informative = ~carrier_mask(mesh, gamma1)[node_faces]
    n_labels = int(labels.max()) + 1
    inside = np.bincount(labels, weights=(informative & mask[node_faces]).astype(float), minlength=n_labels)
    total = np.bincount(labels, weights=informative.astype(float), minlength=n_labels)
    on_side = (total > 0) & (inside > 0.5 * np.maximum(total, 1))

    tree = cKDTree(lat.positions[above])
    picks = []
    for c in cycles:
        _, idx = tree.query(c.curve.points)
        if np.mean(on_side[labels[np.atleast_1d(idx)]]) > 0.5:
            picks.append(c.curve)
    if not picks:
        raise SideTooThin("the offset curve leaves the requested region", {"eps": eps})
    best = max(picks, key=lambda c: c.length)
    if best.length > gamma1.length * (1.0 + LENGTH_GRACE):
        logger.warning("offset curve is longer than the original (%.6g vs %.6g)",
                       best.length, gamma1.length)
    return best


def _thin(curves: Sequence[ClosedCurve], limit: int = MAX_HOMOTOPY_STEPS) -> List[ClosedCurve]:
    if len(curves) <= limit:
        return list(curves)
    idx = np.unique(np.linspace(0, len(curves) - 1, limit).round().astype(int))
    return [curves[i] for i in idx]


def _level_contraction(mesh: TriMesh, field_p: DistanceField, r_hi: float, r_lo: float,
                       steps: int = 48) -> List[ClosedCurve]:
    """Largest level cycles from radius r_hi down to r_lo."""
    out = []
    for r in np.linspace(r_hi, r_lo, steps):
        if not 0 < r < field_p.max:
            continue
        try:
            cycles = level_set(field_p, float(r))
        except DegenerateLevel:
            continue
        if cycles:
            out.append(cycles[0].curve)
    return out


@dataclass
class Collapse:
    """Curves from an offset loop down to a point, outermost first."""

    curves: List[ClosedCurve]
    point: SurfacePoint
    via: str
    run: ShorteningOutcome


def collapse_family(mesh: TriMesh, start: ClosedCurve, center: SurfacePoint, field_c: DistanceField,
                    settings: Settings) -> Collapse:
    """Shorten `start` to a point; when the run does not collapse, contract
    through the level cycles around `center` instead."""
    run = birkhoff_run(mesh, start, settings, record_trace=True)
    if run.kind is OutcomeKind.POINT_COLLAPSE:
        curves = _thin(run.trace.curves) + [point_curve(mesh, run.point)]
        return Collapse(curves, run.point, "shortening", run)
    logger.info("offset loop did not collapse (%s); contracting through level cycles", run.kind.value)
    resolution = mesh.max_edge / (settings.steiner_per_edge + 1)
    r_hi = field_c.at(SurfacePoint.at(mesh, int(start.faces[0]), start.points[0]))
    curves = [start] + _level_contraction(mesh, field_c, 0.95 * r_hi, resolution) + [point_curve(mesh, center)]
    return Collapse(curves, center, "level cycles", run)


# --- spine-connected curves ---------------------------------------------------------------

@dataclass
class _Anchor:
    s: float
    loop: Optional[Path]
    connector: Optional[Path]

    @property
    def length(self) -> float:
        loop = self.loop.length if self.loop is not None else 0.0
        conn = self.connector.length if self.connector is not None else 0.0
        return loop + 2.0 * conn


def _spine_point(mesh: TriMesh, spine: Path, s: float) -> SurfacePoint:
    i, _, xyz = point_at(spine, s)
    return SurfacePoint.at(mesh, int(spine.faces[i]), xyz)


def _anchor(mesh: TriMesh, loop: ClosedCurve, spine: Path, steiner: int) -> _Anchor:
    """Attach a loop to the spine where they cross, or by a short connector."""
    if loop.n < 3 or loop.length <= mesh.eps:
        x = loop.points[0]
        s, d = project_to_curve(spine, x)
        if d <= mesh.eps:
            return _Anchor(s, None, None)
        conn = shortest_path(mesh, _spine_point(mesh, spine, s), SurfacePoint.at(mesh, int(loop.faces[0]), x),
                             steiner=steiner)
        return _Anchor(s, None, conn)
    try:
        events = crossing_events(mesh, loop, spine)
    except NonGenericCrossing:
        events = []
    if events:
        spots = [(project_to_curve(spine, e.point)[0], e.point) for e in events]
        s, x = min(spots, key=lambda item: item[0])
        s_loop, _ = project_to_curve(loop, x)
        marked = insert_at_arclengths(mesh, loop, [s_loop])
        return _Anchor(s, open_at(marked, int(marked.breaks[0])), None)
    dense = densify(spine, mesh.max_edge / 4.0)
    dist, idx = cKDTree(dense).query(loop.points)
    k = int(np.argmin(dist))
    s, _ = project_to_curve(spine, dense[idx[k]])
    conn = shortest_path(mesh, _spine_point(mesh, spine, s),
                         SurfacePoint.at(mesh, int(loop.faces[k]), loop.points[k]), steiner=steiner)
    return _Anchor(s, open_at(loop, k), conn)


def _spine_span(anchors: Sequence[_Anchor], reach: Optional[float]) -> Tuple[float, float]:
    lo = min(a.s for a in anchors)
    hi = max(a.s for a in anchors)
    if reach is not None:
        hi = max(hi, reach)
    return lo, hi


def _spine_length(anchors: Sequence[_Anchor], reach: Optional[float] = None) -> float:
    lo, hi = _spine_span(anchors, reach)
    return sum(a.length for a in anchors) + 2.0 * (hi - lo)


def _spine_curve(mesh: TriMesh, spine: Path, anchors: Sequence[_Anchor],
                 reach: Optional[float] = None) -> ClosedCurve:
    """One closed curve visiting every anchored loop along the spine and back."""
    lo, hi = _spine_span(anchors, reach)
    pieces: List[Path] = []
    cur = lo
    for a in sorted(anchors, key=lambda a: a.s):
        if a.s - cur > mesh.eps:
            pieces.append(sub_path(mesh, spine, cur, a.s))
            cur = a.s
        if a.connector is not None:
            pieces.append(a.connector)
        if a.loop is not None:
            pieces.append(a.loop)
        if a.connector is not None:
            pieces.append(reverse(a.connector))
    if hi - lo > mesh.eps:
        if hi - cur > mesh.eps:
            pieces.append(sub_path(mesh, spine, cur, hi))
        pieces.append(reverse(sub_path(mesh, spine, lo, hi)))
    if not pieces:
        return point_curve(mesh, _spine_point(mesh, spine, lo))
    return concatenate(mesh, [(p, False) for p in pieces], tol=1e-4 * mesh.max_edge)


# --- shared helpers -------------------------------------------------------------------------

def _level_component(field_p: DistanceField, r: float, pin: np.ndarray, tol: float) -> LevelCycle:
    cycles = level_set(field_p, r)
    if not cycles:
        raise ConstructionDegenerate("empty level", {"level": r})
    try:
        return component_through(cycles, pin, tol)
    except NoComponentNear:
        logger.debug("no level component within %.3g of the spine; using the nearest", tol)
        return component_through(cycles, pin, np.inf)


def _inside_mask(mesh: TriMesh, curve: ClosedCurve, p: SurfacePoint) -> np.ndarray:
    """Faces of the complementary region of curve that holds p."""
    regions = complement_regions(mesh, curve)
    k = region_containing(regions, p.face)
    if k is None:
        if len(regions) < 2:
            raise ConstructionDegenerate("curve does not separate the surface", {"regions": len(regions)})
        k = len(regions) - 1 if len(regions) == 2 else 1
    return regions[k].mask


def _side_of(mesh: TriMesh, gamma1: ClosedCurve, p: SurfacePoint) -> np.ndarray:
    regions = complement_regions(mesh, gamma1)
    k = region_containing(regions, p.face)
    if k is None:
        raise ConstructionDegenerate("point is not inside a complementary region", {"face": p.face})
    return regions[k].mask


# --- long sphere ------------------------------------------------------------------------------

def long_sphere_candidate(mesh: TriMesh, gamma1: ClosedCurve, x: SurfacePoint, y: SurfacePoint,
                          settings: Optional[Settings] = None) -> ShorteningOutcome:
    settings = settings or Settings()
    steiner = settings.steiner_per_edge
    slack = settings.mesh_slack
    A, L1 = mesh.area, gamma1.length
    n = bracket_n(A, L1)
    N = covering_N(n)
    details: Dict[str, Any] = {"n": n, "N": N, "construction": "long sphere"}

    tau = shortest_path(mesh, x, y, steiner=steiner)
    D = tau.length
    field_g = DistanceField(mesh, gamma1, steiner)
    dx, dy = field_g.at(x), field_g.at(y)
    details.update({"d_x": dx, "d_y": dy, "D": D, "depth_threshold": LONG_SPHERE_DEPTH * A / L1,
                    "hypothesis_held": min(dx, dy) > LONG_SPHERE_DEPTH * A / L1})
    if not details["hypothesis_held"]:
        logger.warning("depth hypothesis not met (d_x=%.4g, d_y=%.4g, need > %.4g); running anyway",
                       dx, dy, LONG_SPHERE_DEPTH * A / L1)

    field_x = distance_field(mesh, x, steiner)
    field_y = distance_field(mesh, y, steiner)
    search = coarea_slice_search(field_x, field_y, 2.0 * A / L1, L1 / 2.0, radius_a=dx, radius_b=dy)
    u = search.u
    details["slice"] = {"u": u, "total": search.total, "budget": search.budget,
                        "meets_budget": search.meets_budget, "clamped": search.clamped}
    tol = 3.0 * mesh.max_edge
    alpha0 = _level_component(field_x, dx - u, point_at(tau, dx - u)[2], tol).curve
    alpha1 = _level_component(field_y, dy - u, point_at(tau, D - dy + u)[2], tol).curve
    details["alpha_lengths"] = [alpha0.length, alpha1.length]

    eps = OFFSET_RESOLUTIONS * mesh.max_edge / (steiner + 1)
    mask_x, mask_y = _side_of(mesh, gamma1, x), _side_of(mesh, gamma1, y)
    offsets = (perturb_offside(mesh, gamma1, mask_x, eps, steiner),
               perturb_offside(mesh, gamma1, mask_y, eps, steiner))

    halves: List[List[ClosedCurve]] = []
    for side, start, alpha, field_p, p, d_p in (("x", offsets[0], alpha0, field_x, x, dx),
                                                ("y", offsets[1], alpha1, field_y, y, dy)):
        run = birkhoff_run(mesh, start, settings, record_trace=True)
        if run.is_geodesic and is_distinct(gamma1, run.curve)[0]:
            logger.info("offset on the %s side shortened to a new geodesic (length %.6g)", side, run.length)
            run.details.update(details, early_exit=side)
            return run
        if run.kind is OutcomeKind.POINT_COLLAPSE:
            try:
                sigma = track_last_intersection(mesh, run.trace, alpha)
                k = max(i for i, c in enumerate(run.trace.curves) if c is sigma)
                half = list(reversed(_thin(run.trace.curves[:k + 1])))
                details[f"sigma_{side}"] = {"via": "shortening", "index": k, "length": sigma.length}
                halves.append(half)
                continue
            except (NeverIntersects, NeverSeparates, PreconditionError) as exc:
                logger.info("tracking on the %s side failed (%s); using the level slice", side, exc)
        level_part = _level_contraction(mesh, field_p, d_p - eps, d_p - u, steps=24)[::-1]
        half = [alpha] + level_part + [start]
        details[f"sigma_{side}"] = {"via": "level slice", "length": alpha.length}
        halves.append(half)

    homotopy = halves[0] + list(reversed(halves[1]))
    sigma0, sigma1 = homotopy[0], homotopy[-1]
    for name, sigma, alpha in (("sigma0", sigma0, alpha0), ("sigma1", sigma1, alpha1)):
        if sigma.length >= alpha.length * (1.0 + slack):
            logger.warning("%s (%.6g) is not shorter than its slice (%.6g)", name, sigma.length, alpha.length)
    K = len(homotopy) - 1
    if K < 1:
        raise ConstructionDegenerate("homotopy between the end loops is empty")

    anchors = [_anchor(mesh, c, tau, steiner) for c in homotopy]
    budget = 2.0 * N * L1 * (1.0 + slack)
    total = N * K

    def loops_at(j: int) -> List[_Anchor]:
        i, s = divmod(j, K)
        if i >= N:
            return [anchors[K]] * N
        return [anchors[K]] * i + [anchors[s]] + [anchors[0]] * (N - i - 1)

    slice_lengths = np.array([_spine_length(loops_at(j)) for j in range(total + 1)])
    worst = int(np.argmax(slice_lengths))
    details["covering"] = {"slices": total + 1, "max_length": float(slice_lengths[worst]), "budget": budget}
    if slice_lengths[worst] >= budget:
        raise BudgetExceeded("a covering slice exceeds 2 N L1",
                             {"t": worst / total, "length": float(slice_lengths[worst]), "budget": budget})
    details["spine_span"] = {"value": abs(anchors[K].s - anchors[0].s), "bound": 4.0 * A / L1 + L1 / 2.0}

    inside0 = _inside_mask(mesh, sigma0, x)
    inside1 = _inside_mask(mesh, sigma1, y)

    def region_of(c: ClosedCurve) -> Optional[str]:
        if inside0[c.faces].all():
            return "C0"
        if inside1[c.faces].all():
            return "C1"
        return None

    fates: List[Dict[str, Any]] = []

    def fate(j: int) -> Tuple[str, ShorteningOutcome]:
        curve = _spine_curve(mesh, tau, loops_at(j))
        out = birkhoff_run(mesh, curve, settings, max_iter=settings.fate_iters,
                           stop_when=lambda c, it: region_of(c) is not None)
        where = region_of(out.curve)
        if where is None and out.kind is OutcomeKind.POINT_COLLAPSE:
            where = "C0" if inside0[out.point.face] else "C1" if inside1[out.point.face] else None
        label = where or "neither"
        fates.append({"t": j / total, "fate": label, "kind": out.kind.value})
        logger.debug("fate at t=%.6f: %s", j / total, label)
        return label, out

    lo, hi = 0, total
    f_lo, _ = fate(lo)
    f_hi, _ = fate(hi)
    chosen: Optional[int] = None
    if f_lo == "neither":
        chosen = lo
    elif f_hi == "neither":
        chosen = hi
    elif f_lo == f_hi:
        raise FateUndecided("both ends of the covering homotopy share a fate",
                            {"fate": f_lo, "fates": fates})
    else:
        for _ in range(settings.fate_depth):
            if hi - lo <= 1:
                break
            mid = (lo + hi) // 2
            f_mid, _ = fate(mid)
            if f_mid == "neither":
                chosen = mid
                break
            if f_mid == f_lo:
                lo = mid
            else:
                hi = mid
    details["fates"] = fates

    candidates = [chosen] if chosen is not None else [hi, lo]
    last_kind = None
    for j in candidates:
        sigma = _spine_curve(mesh, tau, loops_at(j))
        outcome = birkhoff_run(mesh, sigma, settings)
        last_kind = outcome.kind
        details.update(t=j / total, sigma_length=sigma.length)
        if outcome.kind is OutcomeKind.POINT_COLLAPSE:
            details["winding_at_collapse"] = winding_mod2(mesh, sigma, x, y, steiner=steiner)
            continue
        if outcome.is_geodesic:
            distinct, evidence = is_distinct(gamma1, outcome.curve)
            details["distinctness"] = evidence
            if not distinct:
                continue
        details["checks"] = {
            "length_vs_320A/L1": {"value": outcome.length, "bound": LONG_SPHERE_CONSTANT * A / L1,
                                  "passed": outcome.length <= LONG_SPHERE_CONSTANT * A / L1},
            "d_x_vs_160A/L1": {"value": dx, "bound": 160.0 * A / L1, "passed": dx > 160.0 * A / L1,
                               "informational": True},
        }
        outcome.details.update(details)
        return outcome
    if chosen is None:
        raise FateUndecided("no intermediate fate found and the neighbours do not give a new geodesic",
                            {"lo": lo / total, "hi": hi / total, "fates": fates})
    raise ConstructionDegenerate("the selected curve collapsed or covers the shortest geodesic",
                                 {"kind": last_kind.value if last_kind else None, "t": chosen / total})


# --- figure-eight constructions ----------------------------------------------------------------

def _require_figure_eight(mesh: TriMesh, gamma1: ClosedCurve) -> List[Any]:
    crossings = self_intersections(mesh, gamma1)
    if not crossings:
        raise PreconditionError("the construction needs a figure-eight curve", {"crossings": 0})
    if len(crossings) != 1:
        raise ConstructionDegenerate("expected exactly one self-crossing", {"crossings": len(crossings)})
    return crossings


def starfish_long_candidate(mesh: TriMesh, gamma1: ClosedCurve, x: SurfacePoint, y: SurfacePoint,
                            z: SurfacePoint, settings: Optional[Settings] = None) -> ShorteningOutcome:
    settings = settings or Settings()
    steiner = settings.steiner_per_edge
    _require_figure_eight(mesh, gamma1)
    A, L1 = mesh.area, gamma1.length
    budget = FIGURE_EIGHT_CONSTANT * A / L1

    tau = shortest_path(mesh, x, z, steiner=steiner)
    L = tau.length
    field_g = DistanceField(mesh, gamma1, steiner)
    dx, dz = field_g.at(x), field_g.at(z)
    field_x = distance_field(mesh, x, steiner)
    field_z = distance_field(mesh, z, steiner)
    search = coarea_slice_search(field_x, field_z, L1 / (8.0 * math.sqrt(2.0)),
                                 8.0 * math.sqrt(2.0) * A / L1, radius_a=dx, radius_b=dz)
    s = search.u
    tol = 3.0 * mesh.max_edge
    sigma1 = _level_component(field_x, dx - s, point_at(tau, dx - s)[2], tol).curve
    sigma2 = _level_component(field_z, dz - s, point_at(tau, L - dz + s)[2], tol).curve

    best = None
    for flip1 in (False, True):
        for flip2 in (False, True):
            c1 = reverse(sigma1) if flip1 else sigma1
            c2 = reverse(sigma2) if flip2 else sigma2
            try:
                total = (oriented_intersection_number(mesh, c1, tau)
                         + oriented_intersection_number(mesh, c2, tau))
            except NonGenericCrossing:
                continue
            if total == 2:
                best = (c1, c2)
                break
            if total == -2 and best is None:
                best = (reverse(c1), reverse(c2))
        if best is not None:
            break
    if best is None:
        raise ConstructionDegenerate("level loops meet the spine with intersection number 0")

    anchors = [_anchor(mesh, c, tau, steiner) for c in best]
    sigma = _spine_curve(mesh, tau, anchors)
    details: Dict[str, Any] = {
        "construction": "figure eight, all legs long",
        "slice": {"s": s, "total": search.total, "budget": search.budget, "meets_budget": search.meets_budget},
        "sigma_length": sigma.length,
        "budget": budget,
        "d_x": dx,
        "d_z": dz,
    }
    if sigma.length > budget * (1.0 + settings.mesh_slack):
        raise BudgetExceeded("spine-connected candidate is too long",
                             {"length": sigma.length, "budget": budget})

    obstruction: List[Tuple[int, Optional[int]]] = []

    def watch(c: ClosedCurve, it: int) -> bool:
        if it % settings.stall_window == 0:
            try:
                obstruction.append((it, oriented_intersection_number(mesh, c, tau)))
            except NonGenericCrossing:
                obstruction.append((it, None))
        return False

    outcome = birkhoff_run(mesh, sigma, settings, stop_when=watch)
    details["intersection_numbers"] = obstruction
    if outcome.kind is OutcomeKind.POINT_COLLAPSE:
        raise ConstructionDegenerate("spine-connected candidate collapsed", details)
    distinct, evidence = is_distinct(gamma1, outcome.curve)
    details["distinctness"] = evidence
    details["distinct"] = distinct
    outcome.details.update(details)
    return outcome


def _offsets_and_collapses(mesh: TriMesh, gamma1: ClosedCurve, points: Sequence[SurfacePoint],
                           settings: Settings) -> List[Collapse]:
    steiner = settings.steiner_per_edge
    eps = OFFSET_RESOLUTIONS * mesh.max_edge / (steiner + 1)
    out = []
    for p in points:
        start = perturb_offside(mesh, gamma1, _side_of(mesh, gamma1, p), eps, steiner)
        out.append(collapse_family(mesh, start, p, distance_field(mesh, p, steiner), settings))
    return out


def _interpolating_levels(mesh: TriMesh, a: ClosedCurve, b: ClosedCurve, region: np.ndarray,
                          steiner: int, steps: int = MIN_SLICES) -> List[ClosedCurve]:
    """Level cycles of d_a / (d_a + d_b) lying mostly in `region`, from a to b."""
    da = DistanceField(mesh, a, steiner).values
    db = DistanceField(mesh, b, steiner).values
    denom = da + db
    ratio = np.where(denom > 0, da / np.where(denom > 0, denom, 1.0), 0.5)
    blend = DistanceField(mesh, None, steiner, values=ratio)
    out = []
    for t in np.linspace(0.02, 0.98, steps):
        try:
            cycles = level_set(blend, float(t))
        except (DegenerateLevel, PreconditionError):
            continue
        scored = [(float(region[c.curve.faces].mean()), c.curve) for c in cycles]
        if scored:
            out.append(max(scored, key=lambda item: (item[0], item[1].length))[1])
    return out


def starfish_short_sweepout_z(mesh: TriMesh, gamma1: ClosedCurve, x: SurfacePoint, y: SurfacePoint,
                              z: SurfacePoint, settings: Optional[Settings] = None) -> Sweepout:
    """Sweep from x out to its lobe, across the outer region to the other
    lobe, and down to y."""
    settings = settings or Settings()
    _require_figure_eight(mesh, gamma1)
    A, L1 = mesh.area, gamma1.length
    cx, cy = _offsets_and_collapses(mesh, gamma1, (x, y), settings)
    mask_z = _side_of(mesh, gamma1, z)
    middle = _interpolating_levels(mesh, cx.curves[0], cy.curves[0], mask_z | carrier_mask(mesh, gamma1),
                                   settings.steiner_per_edge)
    slices = list(reversed(cx.curves)) + middle + cy.curves

    outer = ~mask_z
    area_c = float(mesh.face_areas[outer].sum())
    diam_lo, diam_hi = region_diameter(mesh, x, outer, settings.steiner_per_edge)
    sweep = assemble_sweepout(mesh, slices, "figure eight, short outer leg", {
        "collapse_x": cx.via,
        "collapse_y": cy.via,
        "middle_slices": len(middle),
        "budget": SHORT_Z_CONSTANT * A / L1,
        "diameter": {"lower": diam_lo, "upper": diam_hi},
        "disc_budget": L1 + 686.0 * math.sqrt(area_c) + 2.0 * diam_hi,
    }, settings=settings)
    sweep.details["within_budget"] = sweep.max_length <= sweep.details["budget"]
    logger.info("short outer leg sweepout: %d slices, max length %.6g (budget %.6g)",
                len(slices), sweep.max_length, sweep.details["budget"])
    return sweep


def starfish_short_sweepout_xy(mesh: TriMesh, gamma1: ClosedCurve, x: SurfacePoint, y: SurfacePoint,
                               z: SurfacePoint, settings: Optional[Settings] = None) -> Sweepout:
    """Sweep from x out to its lobe, grow the y lobe on a whisker from the
    crossing, then collapse the whole figure-eight to z. y is the short leg."""
    settings = settings or Settings()
    steiner = settings.steiner_per_edge
    crossings = _require_figure_eight(mesh, gamma1)
    A, L1 = mesh.area, gamma1.length
    v = SurfacePoint.locate(mesh, crossings[0].point)

    cx, cy, cz = _offsets_and_collapses(mesh, gamma1, (x, y, z), settings)
    spine = reverse(shortest_path(mesh, y, v, steiner=steiner))
    tau_bound = FIGURE_EIGHT_CONSTANT * A / L1
    if spine.length >= tau_bound:
        logger.warning("whisker length %.6g is not below %.6g", spine.length, tau_bound)

    gx_anchor = _anchor(mesh, cx.curves[0], spine, steiner)
    grown = [_anchor(mesh, c, spine, steiner) for c in reversed(cy.curves)]
    reach_end = grown[0].s
    whisker = [_spine_curve(mesh, spine, [gx_anchor], reach=float(r))
               for r in np.linspace(gx_anchor.s, reach_end, WHISKER_STEPS)]
    lobes = [_spine_curve(mesh, spine, [gx_anchor, a]) for a in grown]
    slices = list(reversed(cx.curves)) + whisker + lobes + cz.curves

    budget = SHORT_XY_CONSTANT * A / L1
    growth = abs(reach_end - gx_anchor.s) / (WHISKER_STEPS - 1)
    sweep = assemble_sweepout(mesh, slices, "figure eight, short lobe leg", {
        "collapse_x": cx.via,
        "collapse_y": cy.via,
        "collapse_z": cz.via,
        "whisker_length": spine.length,
        "whisker_bound": tau_bound,
        "budget": budget,
        "whisker_budget": L1 + 2.0 * FIGURE_EIGHT_CONSTANT * A / L1,
    }, bound=settings.continuity_bound_for(mesh) + growth, settings=settings)
    if sweep.max_length > budget * (1.0 + settings.mesh_slack):
        raise BudgetExceeded("short lobe sweepout exceeds 64 sqrt(2) A / L1",
                             {"max_length": sweep.max_length, "budget": budget})
    return sweep


# --- degree -------------------------------------------------------------------------------

def random_surface_points(mesh: TriMesh, rng: np.random.Generator, count: int) -> List[SurfacePoint]:
    """Area-weighted random points, kept off face boundaries."""
    p = mesh.face_areas / mesh.face_areas.sum()
    faces = rng.choice(mesh.n_faces, size=count, p=p)
    return [SurfacePoint(int(f), tuple(rng.dirichlet([2.0, 2.0, 2.0]))) for f in faces]


def _parity(mesh: TriMesh, c: ClosedCurve, path: Path) -> int:
    if c.n < 3 or c.length <= mesh.eps:
        return 0
    return crossing_count(mesh, c, path) % 2


def noncontractibility_check(mesh: TriMesh, s: Sweepout, settings: Optional[Settings] = None,
                             attempts: int = NONCONTRACTIBILITY_ATTEMPTS, seed: Optional[int] = None) -> bool:
    """Does the family sweep a generic point an odd number of times?"""
    settings = settings or Settings()
    rng = np.random.default_rng(settings.rng_seed if seed is None else seed)
    clouds = [c.points for c in s.slices]
    last: Optional[Exception] = None
    for attempt in range(attempts):
        p = random_surface_points(mesh, rng, 1)[0]
        refs = random_surface_points(mesh, rng, REFERENCE_POINTS)
        xp = p.position(mesh)
        if min(float(np.linalg.norm(pts - xp, axis=1).min()) for pts in clouds) <= 10 * mesh.eps:
            last = GenericityFailure("test point lies on a slice")
            continue
        try:
            field_p = distance_field(mesh, p, settings.steiner_per_edge)
            paths = [shortest_path(mesh, p, q, steiner=settings.steiner_per_edge, field=field_p)
                     for q in refs]
            ref_xyz = np.array([q.position(mesh) for q in refs])
            swept = 0
            for k in range(len(s.slices) - 1):
                near = [min(float(np.linalg.norm(clouds[k] - q, axis=1).min()),
                            float(np.linalg.norm(clouds[k + 1] - q, axis=1).min())) for q in ref_xyz]
                qi = int(np.argmax(near))
                swept ^= _parity(mesh, s.slices[k], paths[qi]) ^ _parity(mesh, s.slices[k + 1], paths[qi])
            logger.debug("degree mod 2 = %d (attempt %d)", swept, attempt)
            return swept == 1
        except (NonGenericCrossing, CurveError) as exc:
            last = exc
            logger.debug("degree count not generic (attempt %d): %s", attempt, exc)
    raise GenericityFailure("no generic test point found", {"attempts": attempts, "reason": str(last)})
