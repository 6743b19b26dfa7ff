"""
Points, paths and closed curves on a TriMesh.

A curve is a polyline whose i-th segment is a straight segment inside the
flat chart of ``faces[i]``; its length is therefore exact for the
piecewise-flat metric. Paths and closed curves are immutable values.
"""

from __future__ import annotations

import bisect
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import trimesh
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import directed_hausdorff

from errors import CorridorMiss, GapTooLarge, NonGenericCrossing, PathThroughCurve, PreconditionError
from mesh import Location, TriMesh

logger = logging.getLogger(__name__)

ANGLE_TIE = 1e-9
REGION_MIN_FRACTION = 0.005
MAX_REROUTES = 64
DISTINCT_HAUSDORFF = 0.05
DISTINCT_LENGTH_GAP = 0.02
MAX_COVER_MULTIPLE = 20


# --- values -----------------------------------------------------------------

@dataclass(frozen=True)
class SurfacePoint:
    face: int
    bary: Tuple[float, float, float]

    def __post_init__(self):
        b = np.clip(np.asarray(self.bary, dtype=np.float64), 0.0, None)
        total = b.sum()
        if b.shape != (3,) or total <= 0:
            raise ValueError(f"invalid barycentric coordinates {self.bary!r}")
        object.__setattr__(self, "face", int(self.face))
        object.__setattr__(self, "bary", tuple(float(x) for x in b / total))

    def position(self, mesh: TriMesh) -> np.ndarray:
        return mesh.point(self.face, self.bary)

    @classmethod
    def at(cls, mesh: TriMesh, face: int, xyz) -> "SurfacePoint":
        return cls(int(face), tuple(mesh.barycentric(face, xyz)))

    @classmethod
    def locate(cls, mesh: TriMesh, xyz) -> "SurfacePoint":
        """Closest surface point to an arbitrary 3D position."""
        closest, _, tri = trimesh.proximity.closest_point(mesh.trimesh, np.asarray([xyz], dtype=np.float64))
        return cls.at(mesh, int(tri[0]), closest[0])

    @classmethod
    def from_vertex(cls, mesh: TriMesh, v: int) -> "SurfacePoint":
        f = int(mesh.vertex_faces(v)[0])
        bary = [0.0, 0.0, 0.0]
        bary[mesh.corner_of(f, v)] = 1.0
        return cls(f, tuple(bary))


class _Polyline:
    closed: bool = False
    points: np.ndarray
    faces: np.ndarray

    @property
    def n(self) -> int:
        return len(self.points)

    @cached_property
    def segment_lengths(self) -> np.ndarray:
        ends = np.roll(self.points, -1, axis=0) if self.closed else self.points[1:]
        starts = self.points if self.closed else self.points[:-1]
        return np.linalg.norm(ends - starts, axis=1)

    @cached_property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @cached_property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    def segment_ends(self) -> Tuple[np.ndarray, np.ndarray]:
        if self.closed:
            return self.points, np.roll(self.points, -1, axis=0)
        return self.points[:-1], self.points[1:]


@dataclass(frozen=True, eq=False)
class ClosedCurve(_Polyline):
    """Closed polyline; segment i joins points[i] and points[(i+1) % n] in faces[i].

    ``breaks`` optionally marks vertex indices that act as break points
    (set by resampling).
    """

    points: np.ndarray
    faces: np.ndarray
    breaks: Optional[np.ndarray] = None
    closed = True

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        fcs = np.asarray(self.faces, dtype=np.int64).reshape(-1)
        if len(fcs) != len(pts):
            raise ValueError("closed curve needs one face per point")
        pts.setflags(write=False)
        fcs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "faces", fcs)
        if self.breaks is not None:
            object.__setattr__(self, "breaks", np.asarray(self.breaks, dtype=np.int64))

    def is_point(self, tol: float) -> bool:
        return self.n < 3 or self.length < tol

    def __repr__(self) -> str:
        return f"ClosedCurve(n={self.n}, length={self.length:.6g})"


@dataclass(frozen=True, eq=False)
class Path(_Polyline):
    """Open polyline; segment i joins points[i] and points[i+1] in faces[i]."""

    points: np.ndarray
    faces: np.ndarray
    closed = False

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        fcs = np.asarray(self.faces, dtype=np.int64).reshape(-1)
        if len(pts) < 2 or len(fcs) != len(pts) - 1:
            raise ValueError("path needs at least two points and one face per segment")
        pts.setflags(write=False)
        fcs.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "faces", fcs)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def start_point(self, mesh: TriMesh) -> SurfacePoint:
        return SurfacePoint.at(mesh, int(self.faces[0]), self.points[0])

    def end_point(self, mesh: TriMesh) -> SurfacePoint:
        return SurfacePoint.at(mesh, int(self.faces[-1]), self.points[-1])

    def __repr__(self) -> str:
        return f"Path(n={self.n}, length={self.length:.6g})"


Curve = Union[ClosedCurve, Path]


@dataclass(frozen=True)
class Crossing:
    point: np.ndarray
    sign: int          # +1 / -1 transverse, 0 touching
    index_a: int
    index_b: int
    kind: str          # "interior" or "vertex"


@dataclass(frozen=True, eq=False)
class Region:
    mask: np.ndarray
    area: float

    @property
    def faces(self) -> np.ndarray:
        return np.nonzero(self.mask)[0]


# --- basic operations -------------------------------------------------------

def curve_length(c: Curve) -> float:
    return c.length


def _normalize(points: np.ndarray, faces: np.ndarray, closed: bool, eps: float,
               breaks: Optional[np.ndarray] = None):
    """Drop zero-length segments; segment i with points[i] == points[i+1]
    loses point i and face i."""
    points = np.asarray(points, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    n = len(points)
    keep = np.ones(n, dtype=bool)
    if closed:
        seg = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1)
        drop = seg <= eps
        if drop.all():
            drop[0] = False
        keep &= ~drop
    else:
        seg = np.linalg.norm(points[1:] - points[:-1], axis=1)
        drop = np.concatenate([seg <= eps, [False]])
        if drop[:-1].all():
            drop[:] = False
            drop[1:-1] = True
        keep &= ~drop
    if keep.all():
        return points, faces, breaks
    if breaks is not None and len(breaks):
        kept_idx = np.nonzero(keep)[0]
        # a dropped point maps to the next kept one
        pos = np.searchsorted(kept_idx, breaks)
        pos = pos % len(kept_idx) if closed else np.minimum(pos, len(kept_idx) - 1)
        breaks = np.unique(pos)
    if closed:
        return points[keep], faces[keep], breaks
    return points[keep], faces[keep[:-1]], breaks


def make_closed(mesh: TriMesh, points, faces, breaks=None) -> ClosedCurve:
    pts, fcs, brk = _normalize(points, faces, True, mesh.eps, breaks)
    return ClosedCurve(pts, fcs, brk)


def make_path(mesh: TriMesh, points, faces) -> Path:
    pts, fcs, _ = _normalize(points, faces, False, mesh.eps)
    return Path(pts, fcs)


def reverse(c: Curve) -> Curve:
    if isinstance(c, ClosedCurve):
        return ClosedCurve(np.roll(c.points[::-1], 1, axis=0), c.faces[::-1].copy())
    return Path(c.points[::-1].copy(), c.faces[::-1].copy())


def point_at(c: Curve, s: float) -> Tuple[int, float, np.ndarray]:
    """Segment index, segment parameter and position at arclength s."""
    cum = c.cumulative
    total = cum[-1]
    s = (s % total) if c.closed and total > 0 else min(max(s, 0.0), total)
    i = int(np.searchsorted(cum, s, side="right") - 1)
    i = min(max(i, 0), len(c.segment_lengths) - 1)
    seg = c.segment_lengths[i]
    t = 0.0 if seg == 0 else (s - cum[i]) / seg
    a, b = c.segment_ends()
    return i, t, a[i] + t * (b[i] - a[i])


def insert_at_arclengths(mesh: TriMesh, c: ClosedCurve, values: Sequence[float]) -> ClosedCurve:
    """Insert vertices at the given arclengths without changing the geometry;
    the returned curve marks them as breaks (existing vertices are reused)."""
    cum = c.cumulative
    total = cum[-1]
    a, b = c.segment_ends()
    per_seg: Dict[int, List[float]] = {}
    targets: List[Tuple[int, float]] = []
    for s in values:
        s = float(s) % total
        i = int(np.searchsorted(cum, s, side="right") - 1)
        i = min(max(i, 0), c.n - 1)
        seg = c.segment_lengths[i]
        off = s - cum[i]
        if off <= mesh.eps:
            targets.append((i, 0.0))
        elif seg - off <= mesh.eps:
            targets.append(((i + 1) % c.n, 0.0))
        else:
            t = off / seg
            per_seg.setdefault(i, []).append(t)
            targets.append((i, t))

    new_pts, new_faces, index_of = [], [], {}
    for i in range(c.n):
        index_of[(i, 0.0)] = len(new_pts)
        new_pts.append(c.points[i])
        new_faces.append(c.faces[i])
        for t in sorted(set(per_seg.get(i, []))):
            index_of[(i, t)] = len(new_pts)
            new_pts.append(a[i] + t * (b[i] - a[i]))
            new_faces.append(c.faces[i])
    breaks = np.array([index_of[key] for key in targets], dtype=np.int64)
    return ClosedCurve(np.array(new_pts), np.array(new_faces), breaks)


def resample(mesh: TriMesh, c: ClosedCurve, n: int) -> ClosedCurve:
    """Mark n break points at equal arclength spacing, starting at vertex 0."""
    if n < 3:
        raise PreconditionError("resample needs n >= 3", {"n": n})
    return insert_at_arclengths(mesh, c, np.arange(n) * (c.length / n))


def break_points(c: ClosedCurve) -> np.ndarray:
    return c.points[c.breaks] if c.breaks is not None else np.empty((0, 3))


def arc(c: ClosedCurve, i: int, j: int) -> Path:
    """Sub-path from vertex i forward to vertex j (wrapping)."""
    n = c.n
    j = j % n
    steps = (j - i) % n or n
    idx = (i + np.arange(steps + 1)) % n
    return Path(c.points[idx], c.faces[idx[:-1]])


def open_at(c: ClosedCurve, i: int = 0) -> Path:
    return arc(c, i, i)


def join_paths(mesh: TriMesh, paths: Sequence[Path]) -> ClosedCurve:
    """Close consecutive paths that share endpoints into one curve."""
    pts, fcs = [], []
    for p in paths:
        pts.append(p.points[:-1])
        fcs.append(p.faces)
    return make_closed(mesh, np.vstack(pts), np.concatenate(fcs))


def sub_path(mesh: TriMesh, p: Path, s0: float, s1: float) -> Path:
    """Restriction of p to the arclength interval [s0, s1]."""
    if s1 < s0:
        raise PreconditionError("sub_path needs s0 <= s1", {"s0": s0, "s1": s1})
    i0, _, x0 = point_at(p, s0)
    i1, _, x1 = point_at(p, s1)
    pts = [x0] + [p.points[k] for k in range(i0 + 1, i1 + 1)] + [x1]
    fcs = [p.faces[k] for k in range(i0, i1 + 1)]
    if len(pts) == 2 and np.linalg.norm(x1 - x0) <= mesh.eps:
        return Path(np.array([x0, x1]), np.array([p.faces[i0]]))
    return make_path(mesh, np.array(pts), np.array(fcs))


def _common_face(mesh: TriMesh, face_a: int, xa, face_b: int, xb) -> Optional[int]:
    fa = set(mesh.faces_containing(face_a, xa).tolist())
    fb = set(mesh.faces_containing(face_b, xb).tolist())
    both = sorted(fa & fb)
    return both[0] if both else None


def concatenate(mesh: TriMesh, pieces: Sequence[Tuple[Curve, bool]], tol: Optional[float] = None) -> ClosedCurve:
    """Join fragments, each optionally reversed, into one closed curve.

    Closed fragments are opened at their first vertex. Gaps up to `tol` are
    bridged inside a common face when one exists and snapped otherwise.
    """
    if not pieces:
        raise PreconditionError("nothing to concatenate")
    tol = mesh.max_edge * 1e-6 if tol is None else tol
    opened: List[Path] = []
    for piece, flip in pieces:
        path = open_at(piece) if isinstance(piece, ClosedCurve) else piece
        opened.append(reverse(path) if flip else path)

    pts: List[np.ndarray] = []
    fcs: List[int] = []
    for k, path in enumerate(opened):
        nxt = opened[(k + 1) % len(opened)]
        gap = float(np.linalg.norm(path.end - nxt.start))
        if gap > tol:
            raise GapTooLarge(
                f"fragments {k} and {(k + 1) % len(opened)} are {gap:.3g} apart (tol {tol:.3g})",
                {"gap": gap, "tol": tol, "fragment": k},
            )
        pts.extend(path.points[:-1])
        fcs.extend(path.faces.tolist())
        if gap > mesh.eps:
            bridge = _common_face(mesh, int(path.faces[-1]), path.end, int(nxt.faces[0]), nxt.start)
            if bridge is not None:
                pts.append(path.end)
                fcs.append(bridge)
    return make_closed(mesh, np.array(pts), np.array(fcs))


# --- crossings ----------------------------------------------------------------

def point_location(mesh: TriMesh, xyz, faces: Iterable[int]) -> Location:
    """Where xyz sits (face interior, edge or vertex) given the faces that hold it."""
    faces = sorted(set(int(f) for f in faces))
    locs = [mesh.locate(f, xyz) for f in faces]
    verts = [idx for kind, idx in locs if kind == "vertex"]
    if verts:
        return ("vertex", verts[0])
    edges = sorted({idx for kind, idx in locs if kind == "edge"})

    def nearest_vertex(e):
        ends = mesh.edges[e]
        d = np.linalg.norm(mesh.vertices[ends] - np.asarray(xyz), axis=1)
        return ("vertex", int(ends[np.argmin(d)]))

    if len(edges) > 1:
        return nearest_vertex(edges[0])
    if edges:
        e = edges[0]
        if not set(faces) <= set(mesh.edge_faces[e].tolist()):
            return nearest_vertex(e)
        return ("edge", e)
    if len(faces) > 1:
        raise NonGenericCrossing("point is interior to two different faces", {"faces": faces})
    return ("face", faces[0])


def _segment_point_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.where(dd > 0, np.einsum("ij,ij->i", p - a, d) / np.where(dd > 0, dd, 1.0), 0.0)
    t = np.clip(t, 0.0, 1.0)
    return np.linalg.norm(a + t[:, None] * d - p, axis=1), t


def project_to_curve(c: Curve, xyz) -> Tuple[float, float]:
    """Arclength of the point of c nearest to xyz, and the distance to it."""
    a, b = c.segment_ends()
    dist, t = _segment_point_distance(np.asarray(xyz, dtype=np.float64), a, b)
    i = int(np.argmin(dist))
    return float(c.cumulative[i] + t[i] * c.segment_lengths[i]), float(dist[i])


def _insert_touches(mesh: TriMesh, c: Curve, marks: np.ndarray, same_curve: bool):
    """Split segments of c at mark points lying on their interiors."""
    a, b = c.segment_ends()
    if len(marks) == 0 or len(a) == 0:
        return c.points, c.faces
    eps = mesh.eps
    seg = c.segment_lengths
    tree = cKDTree(marks)
    mids = 0.5 * (a + b)
    hits = tree.query_ball_point(mids, r=seg / 2 + 2 * eps)
    inserts: Dict[int, List[Tuple[float, np.ndarray]]] = {}
    n = c.n
    for i, cand in enumerate(hits):
        if not cand:
            continue
        if same_curve:
            cand = [j for j in cand if j != i and j != (i + 1) % n]
            if not cand:
                continue
        cand = np.asarray(cand)
        dist, t = _segment_point_distance(marks[cand], np.repeat(a[i:i + 1], len(cand), 0),
                                          np.repeat(b[i:i + 1], len(cand), 0))
        ok = (dist <= eps) & (t * seg[i] > eps) & ((1 - t) * seg[i] > eps)
        for j, tj in zip(cand[ok], t[ok]):
            inserts.setdefault(i, []).append((float(tj), marks[j]))
    if not inserts:
        return c.points, c.faces
    pts, fcs = [], []
    for i in range(n):
        pts.append(c.points[i])
        if i < len(c.faces):
            fcs.append(c.faces[i])
        last_t = -1.0
        for t, p in sorted(inserts.get(i, []), key=lambda item: item[0]):
            if (t - last_t) * seg[i] <= eps:
                continue
            pts.append(p)
            fcs.append(c.faces[i])
            last_t = t
    return np.array(pts), np.array(fcs)


def _with_touches(mesh: TriMesh, c: Curve, marks: np.ndarray, same_curve: bool) -> Curve:
    pts, fcs = _insert_touches(mesh, c, marks, same_curve)
    return make_closed(mesh, pts, fcs) if c.closed else make_path(mesh, pts, fcs)


def _interior_crossings(mesh: TriMesh, a: Curve, b: Curve, same: bool) -> List[Crossing]:
    eps = mesh.eps
    sa, ea = a.segment_ends()
    sb, eb = b.segment_ends()
    fa = a.faces
    fb = b.faces
    events: List[Crossing] = []
    shared = np.intersect1d(fa, fb)
    n_a = len(fa)
    for f in shared:
        ia = np.nonzero(fa == f)[0]
        ib = np.nonzero(fb == f)[0]
        normal = mesh.face_normals[f]
        for i in ia:
            p, r = sa[i], ea[i] - sa[i]
            lr = np.linalg.norm(r)
            for j in ib:
                if same:
                    if j <= i:
                        continue
                    if j == i + 1 or (a.closed and i == 0 and j == n_a - 1):
                        continue
                q, u = sb[j], eb[j] - sb[j]
                lu = np.linalg.norm(u)
                w = q - p
                denom = float(normal @ np.cross(r, u))
                if abs(denom) <= 1e-12 * lr * lu:
                    off_line = abs(float(normal @ np.cross(r, w))) / lr
                    if off_line <= eps:
                        s0 = float(w @ r) / lr ** 2
                        s1 = float((w + u) @ r) / lr ** 2
                        lo, hi = max(0.0, min(s0, s1)), min(1.0, max(s0, s1))
                        if (hi - lo) * lr > eps:
                            raise NonGenericCrossing(
                                "curves overlap along a segment", {"face": int(f)}
                            )
                    continue
                s = float(normal @ np.cross(w, u)) / denom
                t = float(normal @ np.cross(w, r)) / denom
                if eps / lr < s < 1 - eps / lr and eps / lu < t < 1 - eps / lu:
                    events.append(Crossing(p + s * r, int(np.sign(denom)), int(i), int(j), "interior"))
    return events


def _arc_contains(x: float, start: float, end: float, total: float) -> bool:
    return (x - start) % total < (end - start) % total


def _near(x: float, y: float, total: float) -> bool:
    d = abs(x - y) % total
    return min(d, total - d) <= ANGLE_TIE


def _vertex_crossing(mesh: TriMesh, a: Curve, i: int, b: Curve, j: int) -> int:
    """Sign of the crossing of b with a at a shared vertex (0 for a touch)."""
    for c, k in ((a, i), (b, j)):
        if not c.closed and (k == 0 or k == c.n - 1):
            raise NonGenericCrossing("path endpoint lies on the curve", {"index": int(k)})
    na, nb = a.n, b.n
    x = a.points[i]
    fa_in, fa_out = int(a.faces[(i - 1) % len(a.faces)] if a.closed else a.faces[i - 1]), int(a.faces[i])
    fb_in, fb_out = int(b.faces[(j - 1) % len(b.faces)] if b.closed else b.faces[j - 1]), int(b.faces[j])
    loc = point_location(mesh, x, (fa_in, fa_out, fb_in, fb_out))
    if loc[0] == "face" and len({fa_in, fa_out, fb_in, fb_out}) > 1:
        raise NonGenericCrossing("crossing point is not shared by the carrier faces")
    total = mesh.cone_total(loc)
    a_in = mesh.cone_angle(loc, fa_in, x, a.points[(i - 1) % na])
    a_out = mesh.cone_angle(loc, fa_out, x, a.points[(i + 1) % na])
    b_in = mesh.cone_angle(loc, fb_in, x, b.points[(j - 1) % nb])
    b_out = mesh.cone_angle(loc, fb_out, x, b.points[(j + 1) % nb])
    for u in (b_in, b_out):
        for v in (a_in, a_out):
            if _near(u, v, total):
                raise NonGenericCrossing("curves are tangent at a shared point",
                                         {"point": np.asarray(x).tolist()})
    out_left = _arc_contains(b_out, a_out, a_in, total)
    in_left = _arc_contains(b_in, a_out, a_in, total)
    if out_left and not in_left:
        return 1
    if in_left and not out_left:
        return -1
    return 0


def crossing_events(mesh: TriMesh, a: Curve, b: Optional[Curve] = None) -> List[Crossing]:
    """All crossing and touching events between a and b, or of a with itself."""
    same = b is None
    if same:
        a = _with_touches(mesh, a, a.points, same_curve=True)
        b = a
    else:
        a_pts = a.points
        a = _with_touches(mesh, a, b.points, same_curve=False)
        b = _with_touches(mesh, b, a_pts, same_curve=False)

    events = _interior_crossings(mesh, a, b, same)
    eps = mesh.eps
    tree_a = cKDTree(a.points)
    if same:
        pairs = sorted(tree_a.query_pairs(eps))
    else:
        hits = tree_a.query_ball_tree(cKDTree(b.points), eps)
        pairs = [(i, j) for i, js in enumerate(hits) for j in js]
    for i, j in pairs:
        sign = _vertex_crossing(mesh, a, i, b, j)
        events.append(Crossing(a.points[i].copy(), sign, int(i), int(j), "vertex"))
    return events


def self_intersections(mesh: TriMesh, c: ClosedCurve) -> List[Crossing]:
    """Transverse self-crossings of c."""
    return [e for e in crossing_events(mesh, c) if e.sign != 0]


def crossing_count(mesh: TriMesh, a: Curve, b: Curve) -> int:
    return sum(1 for e in crossing_events(mesh, a, b) if e.sign != 0)


def curves_meet(mesh: TriMesh, a: Curve, b: Curve) -> bool:
    try:
        return bool(crossing_events(mesh, a, b))
    except NonGenericCrossing:
        return True


def oriented_intersection_number(mesh: TriMesh, c: ClosedCurve, p: Curve) -> int:
    """Signed crossing count; +1 where p passes from the right of c to its left."""
    return int(sum(e.sign for e in crossing_events(mesh, c, p)))


def _nudge(mesh: TriMesh, pt: SurfacePoint, rng: np.random.Generator) -> SurfacePoint:
    centroid = np.full(3, 1.0 / 3.0)
    w = rng.uniform(1e-4, 1e-3)
    return SurfacePoint(pt.face, tuple((1 - w) * np.asarray(pt.bary) + w * centroid))


def winding_mod2(mesh: TriMesh, c: ClosedCurve, p: SurfacePoint, far: SurfacePoint,
                 steiner: int = 3, attempts: int = 3) -> int:
    """Parity of crossings of c with a shortest path from p to far."""
    from metric import shortest_path

    rng = np.random.default_rng(0)
    last: Optional[Exception] = None
    for attempt in range(attempts + 1):
        try:
            path = shortest_path(mesh, p, far, steiner=steiner)
            return crossing_count(mesh, c, path) % 2
        except NonGenericCrossing as exc:
            last = exc
            logger.debug("winding path not transverse (attempt %d): %s", attempt, exc)
            p, far = _nudge(mesh, p, rng), _nudge(mesh, far, rng)
    raise PathThroughCurve("no transverse path from the point to the reference point",
                           {"reason": str(last)})


# --- comparisons ----------------------------------------------------------------

def densify(c: Curve, spacing: float) -> np.ndarray:
    a, b = c.segment_ends()
    out = []
    for s, e, ln in zip(a, b, c.segment_lengths):
        k = max(1, int(math.ceil(ln / spacing)))
        t = np.arange(k)[:, None] / k
        out.append(s + t * (e - s))
    if not c.closed:
        out.append(c.points[-1:])
    return np.vstack(out)


def hausdorff_distance(c1: Curve, c2: Curve, spacing: Optional[float] = None) -> float:
    """Symmetric Hausdorff distance of the two traces (extrinsic within faces)."""
    spacing = spacing or (max(c1.length, c2.length) / 2000.0 or 1.0)
    x, y = densify(c1, spacing), densify(c2, spacing)
    return float(max(directed_hausdorff(x, y)[0], directed_hausdorff(y, x)[0]))


def is_distinct(c1: Curve, c2: Curve) -> Tuple[bool, Dict[str, float]]:
    """Is c2 neither c1 nor a multiple cover of it?"""
    l1, l2 = c1.length, c2.length
    h = hausdorff_distance(c1, c2)
    k = int(min(max(round(l2 / l1), 1), MAX_COVER_MULTIPLE))
    gap = abs(l2 - k * l1) / l1
    far_apart = h > DISTINCT_HAUSDORFF * min(l1, l2)
    not_cover = gap > DISTINCT_LENGTH_GAP
    evidence = {
        "hausdorff": h,
        "hausdorff_threshold": DISTINCT_HAUSDORFF * min(l1, l2),
        "nearest_multiple": k,
        "length_gap": gap,
        "length_gap_threshold": DISTINCT_LENGTH_GAP,
    }
    return bool(far_apart or not_cover), evidence


# --- regions ----------------------------------------------------------------------

def carrier_mask(mesh: TriMesh, c: Curve) -> np.ndarray:
    mask = np.zeros(mesh.n_faces, dtype=bool)
    mask[c.faces] = True
    return mask


def complement_regions(mesh: TriMesh, c: Curve) -> List[Region]:
    """Face regions of the complement of c, largest first.

    Faces touched by c are removed and the rest is split along the dual graph;
    slivers below half a percent of the area are discarded.
    """
    blocked = carrier_mask(mesh, c)
    keep = ~blocked
    e0, e1 = mesh.edge_faces[:, 0], mesh.edge_faces[:, 1]
    ok = keep[e0] & keep[e1]
    graph = sparse.coo_matrix(
        (np.ones(int(ok.sum())), (e0[ok], e1[ok])), shape=(mesh.n_faces, mesh.n_faces)
    ).tocsr()
    _, labels = connected_components(graph, directed=False)
    regions = []
    for lab in np.unique(labels[keep]):
        mask = keep & (labels == lab)
        area = float(mesh.face_areas[mask].sum())
        if area >= REGION_MIN_FRACTION * mesh.area:
            regions.append(Region(mask, area))
    regions.sort(key=lambda r: -r.area)
    return regions


def region_containing(regions: Sequence[Region], face: int) -> Optional[int]:
    for k, r in enumerate(regions):
        if r.mask[face]:
            return k
    return None


# --- export -----------------------------------------------------------------------

def polyline_records(mesh: TriMesh, c: Curve) -> List[Dict[str, object]]:
    """One record per point: carrier face and barycentric coordinates."""
    out = []
    for i, x in enumerate(c.points):
        f = int(c.faces[min(i, len(c.faces) - 1)])
        out.append({"face": f, "bary": [float(v) for v in np.clip(mesh.barycentric(f, x), 0, 1)]})
    return out


def obj_polyline(curves: Sequence[Curve], names: Optional[Sequence[str]] = None) -> str:
    lines: List[str] = []
    base = 1
    for k, c in enumerate(curves):
        lines.append(f"o {names[k] if names else f'curve_{k}'}")
        lines += ["v " + " ".join(f"{x:.12g}" for x in p) for p in c.points]
        idx = list(range(base, base + c.n))
        if c.closed:
            idx.append(base)
        lines.append("l " + " ".join(map(str, idx)))
        base += c.n
    return "\n".join(lines) + "\n"


# --- straightening inside a face corridor --------------------------------------------

def _cross2(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _fan_between(mesh: TriMesh, v: int, f: int, g: int, ccw: bool) -> List[int]:
    """Faces strictly between f and g walking around v."""
    fan = list(mesh.vertex_fan(v).faces)
    d = len(fan)
    i, j = fan.index(f), fan.index(g)
    step = 1 if ccw else -1
    out = []
    k = (i + step) % d
    while k != j:
        out.append(int(fan[k]))
        k = (k + step) % d
    return out


def _fan_angle(mesh: TriMesh, v: int, faces: Sequence[int]) -> float:
    return float(sum(mesh.corner_angles[f, mesh.corner_of(f, v)] for f in faces))


def build_corridor(mesh: TriMesh, faces: Sequence[int]) -> List[int]:
    """Edge-connected face sequence through `faces`, backtracks removed."""
    seq = [int(faces[0])]
    for g in faces[1:]:
        g = int(g)
        f = seq[-1]
        if g == f:
            continue
        if mesh.edge_between(f, g) < 0:
            shared = mesh.shared_vertices(f, g)
            if len(shared) == 0:
                raise CorridorMiss("consecutive corridor faces do not touch", {"faces": [f, g]})
            v = int(shared[0])
            left = _fan_between(mesh, v, f, g, True)
            right = _fan_between(mesh, v, f, g, False)
            fill = left if _fan_angle(mesh, v, left) <= _fan_angle(mesh, v, right) else right
            steps = fill + [g]
        else:
            steps = [g]
        for h in steps:
            if len(seq) >= 2 and seq[-2] == h:
                seq.pop()
            elif seq[-1] != h:
                seq.append(h)
    return seq


@dataclass
class _Unfolding:
    corridor: List[int]
    coords: List[Dict[int, np.ndarray]] = field(default_factory=list)
    portals: List[Tuple[int, int]] = field(default_factory=list)   # (left id, right id)


def _unfold(mesh: TriMesh, corridor: List[int]) -> _Unfolding:
    V = mesh.vertices
    f0 = corridor[0]
    a, b, c = (int(x) for x in mesh.faces[f0])
    lab = np.linalg.norm(V[b] - V[a])
    lac = np.linalg.norm(V[c] - V[a])
    lbc = np.linalg.norm(V[c] - V[b])
    x = (lac ** 2 - lbc ** 2 + lab ** 2) / (2 * lab)
    y = math.sqrt(max(lac ** 2 - x ** 2, 0.0))
    un = _Unfolding(corridor)
    un.coords.append({a: np.array([0.0, 0.0]), b: np.array([lab, 0.0]), c: np.array([x, y])})
    for k in range(1, len(corridor)):
        prev, cur = un.coords[-1], corridor[k]
        fv = [int(v) for v in mesh.faces[cur]]
        shared = [v for v in fv if v in prev]
        if len(shared) != 2:
            raise CorridorMiss("corridor faces are not edge-adjacent",
                               {"faces": [corridor[k - 1], cur]})
        u, w = shared
        z = next(v for v in fv if v not in shared)
        o = next(v for v in prev if v not in shared)
        pu, pw, po = prev[u], prev[w], prev[o]
        d = np.linalg.norm(pw - pu)
        e = (pw - pu) / d
        perp = np.array([-e[1], e[0]])
        luz = np.linalg.norm(V[z] - V[u])
        lwz = np.linalg.norm(V[z] - V[w])
        x = (luz ** 2 - lwz ** 2 + d ** 2) / (2 * d)
        y = math.sqrt(max(luz ** 2 - x ** 2, 0.0))
        side = -1.0 if float((po - pu) @ perp) > 0 else 1.0
        un.coords.append({u: pu, w: pw, z: pu + x * e + side * y * perp})
        centre = (pu + pw + po) / 3.0
        if _cross2(pu - centre, pw - centre) < 0:
            un.portals.append((u, w))
        else:
            un.portals.append((w, u))
    return un


def _to_chart(mesh: TriMesh, coords: Dict[int, np.ndarray], face: int, xyz) -> np.ndarray:
    bary = mesh.barycentric(face, xyz)
    return sum(bary[k] * coords[int(mesh.faces[face, k])] for k in range(3))


def _funnel(points: List[Tuple[np.ndarray, np.ndarray]]) -> List[Tuple[np.ndarray, int]]:
    """String-pulling over portals given as (left, right) pairs; the first and
    last portals are the degenerate start and end. Returns apex points with
    the portal index at which each was fixed."""
    apex = points[0][0]
    left, right = apex, apex
    apex_i = left_i = right_i = 0
    out = [(apex, 0)]
    i = 1
    n = len(points)
    while i < n:
        pl, pr = points[i]
        if _cross2(right - apex, pr - apex) >= 0:
            if np.allclose(apex, right) or np.allclose(apex, left) or _cross2(left - apex, pr - apex) < 0:
                right, right_i = pr, i
            else:
                apex, apex_i = left, left_i
                out.append((apex, apex_i))
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        if _cross2(left - apex, pl - apex) <= 0:
            if np.allclose(apex, left) or np.allclose(apex, right) or _cross2(right - apex, pl - apex) > 0:
                left, left_i = pl, i
            else:
                apex, apex_i = right, right_i
                out.append((apex, apex_i))
                left = right = apex
                left_i = right_i = apex_i
                i = apex_i + 1
                continue
        i += 1
    end = points[-1][0]
    if not np.allclose(out[-1][0], end) or len(out) == 1:
        out.append((end, n - 1))
    return out


def _funnel_once(mesh: TriMesh, corridor: List[int], start, end) -> Tuple[np.ndarray, np.ndarray]:
    un = _unfold(mesh, corridor)
    s2 = _to_chart(mesh, un.coords[0], corridor[0], start)
    e2 = _to_chart(mesh, un.coords[-1], corridor[-1], end)
    portal_pts = [(s2, s2)]
    for k, (lid, rid) in enumerate(un.portals):
        portal_pts.append((un.coords[k][lid], un.coords[k][rid]))
    portal_pts.append((e2, e2))
    apexes = _funnel(portal_pts)
    idx = [ai for _, ai in apexes]

    V = mesh.vertices
    pts = [np.asarray(start, dtype=np.float64)]
    for k, (lid, rid) in enumerate(un.portals):
        i = k + 1
        j = bisect.bisect_right(idx, i) - 1
        j = min(max(j, 0), len(apexes) - 2)
        a2, b2 = apexes[j][0], apexes[j + 1][0]
        u2, w2 = portal_pts[i]
        d = w2 - u2
        e = b2 - a2
        den = _cross2(d, e)
        if abs(den) <= 1e-14 * (np.linalg.norm(d) * np.linalg.norm(e) + 1e-300):
            t = 0.0 if np.linalg.norm(a2 - u2) <= np.linalg.norm(a2 - w2) else 1.0
        else:
            t = _cross2(a2 - u2, e) / den
        t = min(max(t, 0.0), 1.0)
        if t < 1e-12:
            pts.append(V[lid].copy())
        elif t > 1 - 1e-12:
            pts.append(V[rid].copy())
        else:
            pts.append(V[lid] + t * (V[rid] - V[lid]))
    pts.append(np.asarray(end, dtype=np.float64))
    return np.array(pts), np.array(corridor, dtype=np.int64)


def _reroute(mesh: TriMesh, corridor: List[int], pts: np.ndarray) -> Optional[List[int]]:
    """Send the corridor around the other side of a vertex the path bends at,
    when that side is flatter than a straight angle."""
    n_portals = len(corridor) - 1
    k = 0
    while k < n_portals:
        x = pts[k + 1]
        v_hits = np.nonzero(np.linalg.norm(mesh.vertices[mesh.faces[corridor[k]]] - x, axis=1) <= mesh.eps)[0]
        if len(v_hits) == 0:
            k += 1
            continue
        v = int(mesh.faces[corridor[k], v_hits[0]])
        j = k
        while j + 1 < n_portals and np.linalg.norm(pts[j + 2] - x) <= mesh.eps:
            j += 1
        f_in, f_out = corridor[k], corridor[j + 1]
        prev, nxt = pts[k], pts[j + 2]
        if f_in == f_out or np.linalg.norm(prev - x) <= mesh.eps or np.linalg.norm(nxt - x) <= mesh.eps:
            k = j + 1
            continue
        loc = ("vertex", v)
        total = mesh.cone_total(loc)
        a_in = mesh.cone_angle(loc, f_in, x, prev)
        a_out = mesh.cone_angle(loc, f_out, x, nxt)
        ccw_angle = (a_out - a_in) % total
        fan = list(mesh.vertex_fan(v).faces)
        went_ccw = corridor[k + 1] == fan[(fan.index(f_in) + 1) % len(fan)]
        other = total - ccw_angle if went_ccw else ccw_angle
        if other < math.pi - 1e-7:
            around = _fan_between(mesh, v, f_in, f_out, ccw=not went_ccw)
            return corridor[:k + 1] + around + corridor[j + 1:]
        k = j + 1
    return None


def shortest_in_corridor(mesh: TriMesh, corridor: Sequence[int], start, end) -> Path:
    """Locally shortest path from start (in corridor[0]) to end (in
    corridor[-1]) through the face corridor."""
    corridor = build_corridor(mesh, corridor)
    best: Optional[Path] = None
    for _ in range(MAX_REROUTES):
        pts, fcs = _funnel_once(mesh, corridor, start, end)
        path = make_path(mesh, pts, fcs)
        if best is None or path.length < best.length:
            best = path
        new = _reroute(mesh, corridor, pts)
        if new is None:
            break
        corridor = build_corridor(mesh, new)
    return best


def straighten_path(mesh: TriMesh, path: Path) -> Path:
    """Pull `path` tight inside the faces it visits; never lengthens it."""
    if len(path.faces) == 1 or len(set(path.faces.tolist())) == 1:
        straight = make_path(mesh, np.array([path.start, path.end]), path.faces[:1])
        return straight if straight.length <= path.length else path
    try:
        new = shortest_in_corridor(mesh, list(path.faces), path.start, path.end)
    except CorridorMiss:
        logger.debug("corridor broken while straightening; keeping the input path")
        return path
    return new if new.length < path.length else path
