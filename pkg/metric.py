"""
Geodesic distance on a TriMesh by shortest paths on a Steiner-refined graph.

Every face carries a triangular lattice with ``steiner + 1`` subdivisions per
side. Lattice nodes on mesh edges and vertices are shared between faces and
every pair of nodes of one face is joined by a straight chord, so each graph
edge is an honest segment inside a face.
"""

from __future__ import annotations

import logging
import struct
import threading
import weakref
from collections import OrderedDict
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.integrate import trapezoid
from scipy.sparse.csgraph import dijkstra

from curves import (
    ClosedCurve,
    Path,
    SurfacePoint,
    make_closed,
    make_path,
    straighten_path,
)
from errors import (
    DegenerateLevel,
    EmptyRegion,
    NoComponentNear,
    ParseError,
    PreconditionError,
    WindowTooLarge,
)
from mesh import TriMesh

logger = logging.getLogger(__name__)

DEFAULT_STEINER = 3
LEVEL_JITTER = 1e-7
LEVEL_RETRIES = 3
WINDOW_CLAMP = 0.95
FIELD_MAGIC = b"GDF1"
FIELD_CACHE_SIZE = 16

Source = Union[SurfacePoint, ClosedCurve]


class Lattice:
    """Refined node set and chord graph of a mesh."""

    def __init__(self, mesh: TriMesh, steiner: int):
        if steiner < 0:
            raise PreconditionError("steiner_per_edge must be >= 0", {"steiner": steiner})
        self.mesh = mesh
        self.steiner = int(steiner)
        m = self.m = self.steiner + 1
        V, E, F = mesh.n_vertices, mesh.n_edges, mesh.n_faces
        s = self.steiner
        n_int = (m - 1) * (m - 2) // 2

        ab = [(a, b) for b in range(m + 1) for a in range(m + 1 - b)]
        self.local = np.array(ab, dtype=np.int64)
        P = len(ab)
        w = np.column_stack([m - self.local.sum(axis=1), self.local[:, 0], self.local[:, 1]])
        self.weights = w  # integer corner weights, summing to m

        faces = mesh.faces
        ids = np.empty((F, P), dtype=np.int64)
        interior_count = 0
        for k, wk in enumerate(w):
            nz = np.nonzero(wk)[0]
            if len(nz) == 1:
                ids[:, k] = faces[:, nz[0]]
            elif len(nz) == 2:
                c1, c2 = nz
                local_edge = 3 - c1 - c2
                e = mesh.face_edges[:, local_edge]
                va, vb = faces[:, c1], faces[:, c2]
                q = np.where(va > vb, wk[c1], wk[c2])
                ids[:, k] = V + e * s + (q - 1)
            else:
                ids[:, k] = V + E * s + np.arange(F) * n_int + interior_count
                interior_count += 1
        self.face_nodes = ids
        self.n_nodes = V + E * s + F * n_int

        pos = np.einsum("pk,fkd->fpd", w / m, mesh.vertices[faces])
        self.positions = np.empty((self.n_nodes, 3))
        self.positions[ids.reshape(-1)] = pos.reshape(-1, 3)
        self.positions[:V] = mesh.vertices
        self.node_face = np.empty(self.n_nodes, dtype=np.int64)
        self.node_bary = np.empty((self.n_nodes, 3))
        self.node_face[ids.reshape(-1)] = np.repeat(np.arange(F), P)
        self.node_bary[ids.reshape(-1)] = np.tile(w / m, (F, 1))

        ii, jj = np.triu_indices(P, k=1)
        a = ids[:, ii].reshape(-1)
        b = ids[:, jj].reshape(-1)
        carrier = np.repeat(np.arange(F), len(ii))
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * self.n_nodes + hi
        keys, first = np.unique(keys, return_index=True)
        self.pair_keys = keys
        self.pair_carrier = carrier[first]
        lo, hi = lo[first], hi[first]
        self.edge_u, self.edge_v = lo, hi
        self.edge_w = np.linalg.norm(self.positions[hi] - self.positions[lo], axis=1)

        up = [(a_, b_) for a_, b_ in ab if a_ + b_ <= m - 1]
        down = [(a_, b_) for a_, b_ in ab if a_ + b_ <= m - 2]
        index = {p: k for k, p in enumerate(ab)}
        tri = [(index[(a_, b_)], index[(a_ + 1, b_)], index[(a_, b_ + 1)]) for a_, b_ in up]
        tri += [(index[(a_ + 1, b_)], index[(a_ + 1, b_ + 1)], index[(a_, b_ + 1)]) for a_, b_ in down]
        tri = np.array(tri, dtype=np.int64)
        self.sub_triangles = ids[:, tri].reshape(-1, 3)
        self.sub_face = np.repeat(np.arange(F), len(tri))
        self.sub_area = mesh.face_areas[self.sub_face] / (m * m)
        logger.debug("lattice for %r: %d nodes, %d chords", mesh, self.n_nodes, len(self.edge_w))

    @cached_property
    def graph(self) -> sparse.csr_matrix:
        n = self.n_nodes
        g = sparse.coo_matrix((self.edge_w, (self.edge_u, self.edge_v)), shape=(n, n))
        return (g + g.T).tocsr()

    def carrier(self, u: int, v: int) -> int:
        lo, hi = min(u, v), max(u, v)
        k = int(np.searchsorted(self.pair_keys, lo * self.n_nodes + hi))
        if k >= len(self.pair_keys) or self.pair_keys[k] != lo * self.n_nodes + hi:
            raise KeyError((u, v))
        return int(self.pair_carrier[k])

    def nodes_of(self, faces: Sequence[int]) -> np.ndarray:
        return np.unique(self.face_nodes[np.asarray(faces, dtype=np.int64)].reshape(-1))


_lattices: "weakref.WeakKeyDictionary[TriMesh, Dict[int, Lattice]]" = weakref.WeakKeyDictionary()


def lattice_for(mesh: TriMesh, steiner: int = DEFAULT_STEINER) -> Lattice:
    per_mesh = _lattices.setdefault(mesh, {})
    if steiner not in per_mesh:
        per_mesh[steiner] = Lattice(mesh, steiner)
    return per_mesh[steiner]


def _seed_edges(mesh: TriMesh, lat: Lattice, source: Source) -> Tuple[np.ndarray, np.ndarray]:
    """Lattice nodes adjacent to the source with their straight distances."""
    if isinstance(source, SurfacePoint):
        p = source.position(mesh)
        faces = mesh.faces_containing(source.face, p)
        nodes = lat.nodes_of(faces)
        return nodes, np.linalg.norm(lat.positions[nodes] - p, axis=1)

    best = np.full(lat.n_nodes, np.inf)
    a, b = source.segment_ends()
    for f, s, e in zip(source.faces, a, b):
        nodes = lat.face_nodes[f]
        d = e - s
        dd = float(d @ d)
        t = np.clip(((lat.positions[nodes] - s) @ d) / dd, 0, 1) if dd > 0 else np.zeros(len(nodes))
        dist = np.linalg.norm(s + t[:, None] * d - lat.positions[nodes], axis=1)
        np.minimum.at(best, nodes, dist)
    for f, x in zip(source.faces, source.points):
        nodes = lat.nodes_of(mesh.faces_containing(f, x))
        np.minimum.at(best, nodes, np.linalg.norm(lat.positions[nodes] - x, axis=1))
    nodes = np.nonzero(np.isfinite(best))[0]
    return nodes, best[nodes]


def _solve(lat: Lattice, nodes: np.ndarray, dist: np.ndarray, limit: float = np.inf):
    n = lat.n_nodes
    offset = 1.0 + float(dist.max(initial=0.0))
    extra = sparse.coo_matrix(
        (dist + offset, (np.full(len(nodes), n), nodes)), shape=(n + 1, n + 1)
    )
    base = sparse.bmat([[lat.graph, None], [None, sparse.csr_matrix((1, 1))]], format="csr")
    g = (base + extra + extra.T).tocsr()
    values, pred = dijkstra(g, directed=False, indices=n, return_predecessors=True,
                            limit=limit + offset)
    values = values[:n] - offset
    return values, pred[:n]


class DistanceField:
    """Distances from a point or curve source to every lattice node."""

    def __init__(self, mesh: TriMesh, source: Optional[Source], steiner: int = DEFAULT_STEINER,
                 values: Optional[np.ndarray] = None, limit: float = np.inf):
        self.mesh = mesh
        self.source = source
        self.steiner = int(steiner)
        self.lattice = lattice_for(mesh, self.steiner)
        self.predecessors: Optional[np.ndarray] = None
        if values is None:
            nodes, dist = _seed_edges(mesh, self.lattice, source)
            values, self.predecessors = _solve(self.lattice, nodes, dist, limit)
        values = np.asarray(values, dtype=np.float64)
        if len(values) != self.lattice.n_nodes:
            raise ParseError("field size does not match the refined mesh",
                             {"expected": self.lattice.n_nodes, "got": len(values)})
        self.values = values
        self.values.setflags(write=False)

    @cached_property
    def max(self) -> float:
        finite = self.values[np.isfinite(self.values)]
        return float(finite.max()) if len(finite) else 0.0

    def at(self, q: SurfacePoint) -> float:
        """Field value at an arbitrary surface point."""
        mesh, lat = self.mesh, self.lattice
        x = q.position(mesh)
        faces = mesh.faces_containing(q.face, x)
        nodes = lat.nodes_of(faces)
        best = float(np.min(self.values[nodes] + np.linalg.norm(lat.positions[nodes] - x, axis=1)))
        if isinstance(self.source, SurfacePoint):
            p = self.source.position(mesh)
            if set(faces.tolist()) & set(mesh.faces_containing(self.source.face, p).tolist()):
                best = min(best, float(np.linalg.norm(x - p)))
        elif isinstance(self.source, ClosedCurve):
            a, b = self.source.segment_ends()
            on = np.isin(self.source.faces, faces)
            if on.any():
                d = b[on] - a[on]
                dd = np.einsum("ij,ij->i", d, d)
                t = np.clip(np.einsum("ij,ij->i", x - a[on], d) / np.where(dd > 0, dd, 1), 0, 1)
                best = min(best, float(np.linalg.norm(a[on] + t[:, None] * d - x, axis=1).min()))
        return best

    def node_point(self, node: int) -> SurfacePoint:
        return SurfacePoint(int(self.lattice.node_face[node]), tuple(self.lattice.node_bary[node]))

    def dump(self) -> bytes:
        return dump_field(self)

    def __repr__(self) -> str:
        return f"DistanceField({self.mesh!r}, steiner={self.steiner}, max={self.max:.6g})"


# keyed by id(mesh); a cached field keeps its mesh alive, so ids stay unique
_fields: "OrderedDict[Tuple[int, SurfacePoint, int], DistanceField]" = OrderedDict()
_fields_lock = threading.Lock()


def distance_field(mesh: TriMesh, source: Source, steiner: int = DEFAULT_STEINER) -> DistanceField:
    """Distance field from `source`; the most recent point-source fields are cached."""
    if not isinstance(source, SurfacePoint):
        return DistanceField(mesh, source, steiner)
    key = (id(mesh), source, int(steiner))
    with _fields_lock:
        hit = _fields.get(key)
        if hit is not None:
            _fields.move_to_end(key)
            return hit
    field = DistanceField(mesh, source, steiner)
    with _fields_lock:
        _fields[key] = field
        while len(_fields) > FIELD_CACHE_SIZE:
            _fields.popitem(last=False)
    return field


def farthest_point(field: DistanceField, restrict: Optional[np.ndarray] = None) -> Tuple[SurfacePoint, float]:
    """Lattice sample of largest field value, optionally within a face mask."""
    lat = field.lattice
    if restrict is None:
        nodes = np.arange(lat.n_nodes)
    else:
        restrict = np.asarray(restrict)
        faces = np.nonzero(restrict)[0] if restrict.dtype == bool else restrict
        if len(faces) == 0:
            raise EmptyRegion("restriction region has no faces")
        nodes = lat.nodes_of(faces)
    vals = field.values[nodes]
    ok = np.isfinite(vals)
    if not ok.any():
        raise EmptyRegion("no reachable samples in the region")
    k = int(np.argmax(np.where(ok, vals, -np.inf)))
    node = int(nodes[k])
    if restrict is not None:
        face = int(faces[np.nonzero(np.any(lat.face_nodes[faces] == node, axis=1))[0][0]])
        w = lat.weights[np.nonzero(lat.face_nodes[face] == node)[0][0]] / lat.m
        return SurfacePoint(face, tuple(w)), float(vals[k])
    return field.node_point(node), float(vals[k])


def region_diameter(mesh: TriMesh, start: SurfacePoint, region: np.ndarray,
                    steiner: int = DEFAULT_STEINER) -> Tuple[float, float]:
    """Lower and upper bounds on the diameter of a face region by a double sweep.

    a is the region sample farthest from `start`; the eccentricity e of a
    within the region gives e <= diameter <= 2 e.
    """
    a, _ = farthest_point(distance_field(mesh, start, steiner), restrict=region)
    _, ecc = farthest_point(distance_field(mesh, a, steiner), restrict=region)
    return ecc, 2.0 * ecc


# --- paths ------------------------------------------------------------------------

def _face_with(mesh: TriMesh, lat: Lattice, faces: np.ndarray, node: int) -> int:
    for f in faces:
        if node in lat.face_nodes[f]:
            return int(f)
    raise KeyError(node)


def _trace(field: DistanceField, p: SurfacePoint, q: SurfacePoint) -> Path:
    mesh, lat = field.mesh, field.lattice
    xp, xq = p.position(mesh), q.position(mesh)
    fp = mesh.faces_containing(p.face, xp)
    fq = mesh.faces_containing(q.face, xq)
    common = np.intersect1d(fp, fq)
    nodes_q = lat.nodes_of(fq)
    via = field.values[nodes_q] + np.linalg.norm(lat.positions[nodes_q] - xq, axis=1)
    k = int(np.argmin(via))
    direct = float(np.linalg.norm(xq - xp)) if len(common) else np.inf
    if direct <= via[k] or not np.isfinite(via[k]):
        if not len(common):
            raise EmptyRegion("target is not reachable from the source")
        return Path(np.array([xp, xq]), np.array([int(common[0])]))

    chain = [int(nodes_q[k])]
    pred = field.predecessors
    n = lat.n_nodes
    while True:
        prev = int(pred[chain[-1]])
        if prev < 0 or prev >= n:
            break
        chain.append(prev)
    chain.reverse()
    pts = [xp] + [lat.positions[c] for c in chain] + [xq]
    fcs = [_face_with(mesh, lat, fp, chain[0])]
    fcs += [lat.carrier(u, v) for u, v in zip(chain[:-1], chain[1:])]
    fcs.append(_face_with(mesh, lat, fq, chain[-1]))
    return make_path(mesh, np.array(pts), np.array(fcs))


def shortest_path(mesh: TriMesh, p: SurfacePoint, q: SurfacePoint, steiner: int = DEFAULT_STEINER,
                  straighten: bool = True, field: Optional[DistanceField] = None) -> Path:
    """Graph shortest path from p to q, pulled tight inside its faces."""
    if field is None or field.source != p or field.predecessors is None:
        field = distance_field(mesh, p, steiner)
    path = _trace(field, p, q)
    return straighten_path(mesh, path) if straighten else path


def local_path(mesh: TriMesh, p: SurfacePoint, q: SurfacePoint, radius: float,
               steiner: int = DEFAULT_STEINER) -> Path:
    """Like shortest_path, but the search stops beyond `radius` from p."""
    field = DistanceField(mesh, p, steiner, limit=radius)
    return straighten_path(mesh, _trace(field, p, q))


# --- level sets -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LevelCycle:
    curve: ClosedCurve
    level: float
    field: DistanceField

    @property
    def length(self) -> float:
        return self.curve.length


def _level_segments(field: DistanceField, r: float):
    """Oriented level segments per sub-triangle, lower values on the left.

    Returns start keys, end keys, carrier faces and the crossing point of
    every lattice edge key involved.
    """
    lat = field.lattice
    tri = lat.sub_triangles
    vals = field.values[tri]
    above = vals > r
    count = above.sum(axis=1)
    mixed = (count == 1) | (count == 2)
    tri, vals, above, count = tri[mixed], vals[mixed], above[mixed], count[mixed]
    faces = lat.sub_face[mixed]
    odd = np.where(count == 1, np.argmax(above, axis=1), np.argmin(above, axis=1))
    rows = np.arange(len(tri))
    o = tri[rows, odd]
    n1 = tri[rows, (odd + 1) % 3]
    n2 = tri[rows, (odd + 2) % 3]
    key1 = np.minimum(o, n1) * lat.n_nodes + np.maximum(o, n1)
    key2 = np.minimum(o, n2) * lat.n_nodes + np.maximum(o, n2)
    odd_below = count == 2
    start = np.where(odd_below, key1, key2)
    end = np.where(odd_below, key2, key1)
    return start, end, faces


def _key_points(field: DistanceField, keys: np.ndarray, r: float) -> np.ndarray:
    lat = field.lattice
    lo, hi = keys // lat.n_nodes, keys % lat.n_nodes
    vl, vh = field.values[lo], field.values[hi]
    t = (r - vl) / (vh - vl)
    return lat.positions[lo] + t[:, None] * (lat.positions[hi] - lat.positions[lo])


def _generic_level(field: DistanceField, r: float) -> float:
    scale = field.mesh.diameter_estimate()
    for attempt in range(LEVEL_RETRIES + 1):
        if not np.any(np.abs(field.values - r) <= 1e-12 * max(scale, 1.0)):
            return r
        r = r + LEVEL_JITTER * scale * (attempt + 1)
    raise DegenerateLevel(f"level {r:.6g} stays on sample values after jitter", {"level": r})


def level_length(field: DistanceField, r: float) -> float:
    """Total length of the r-level of the interpolated field."""
    if r <= 0 or r >= field.max:
        return 0.0
    r = _generic_level(field, r)
    start, end, _ = _level_segments(field, r)
    if len(start) == 0:
        return 0.0
    return float(np.linalg.norm(_key_points(field, end, r) - _key_points(field, start, r), axis=1).sum())


def level_set(field: DistanceField, r: float) -> List[LevelCycle]:
    """All components of the r-level as closed curves, longest first."""
    if not 0 < r < field.max:
        raise PreconditionError("level must lie strictly between 0 and the field maximum",
                                {"level": r, "max": field.max})
    mesh = field.mesh
    level = r
    for attempt in range(LEVEL_RETRIES + 1):
        level = _generic_level(field, level)
        start, end, faces = _level_segments(field, level)
        starts_u, starts_c = np.unique(start, return_counts=True)
        ends_u, ends_c = np.unique(end, return_counts=True)
        if (len(starts_u) == len(start) and len(ends_u) == len(end)
                and np.array_equal(starts_u, ends_u)):
            break
        level += LEVEL_JITTER * mesh.diameter_estimate() * (attempt + 1)
    else:
        raise DegenerateLevel(f"level {r:.6g} does not split into closed cycles", {"level": r})

    order = np.argsort(start)
    start, end, faces = start[order], end[order], faces[order]
    used = np.zeros(len(start), dtype=bool)
    cycles: List[LevelCycle] = []
    for s0 in range(len(start)):
        if used[s0]:
            continue
        keys, fcs = [], []
        k = s0
        while not used[k]:
            used[k] = True
            keys.append(start[k])
            fcs.append(faces[k])
            k = int(np.searchsorted(start, end[k]))
        pts = _key_points(field, np.array(keys), level)
        curve = make_closed(mesh, pts, np.array(fcs))
        if curve.n >= 3 and curve.length > 0:
            cycles.append(LevelCycle(curve, level, field))
    cycles.sort(key=lambda c: -c.length)
    return cycles


def component_through(cycles: Sequence[LevelCycle], p: Union[SurfacePoint, np.ndarray], tol: float,
                      mesh: Optional[TriMesh] = None) -> LevelCycle:
    """The cycle passing nearest to p, if within tol."""
    if isinstance(p, SurfacePoint):
        mesh = mesh or (cycles[0].field.mesh if cycles else None)
        x = p.position(mesh)
    else:
        x = np.asarray(p, dtype=np.float64)
    best, best_d = None, np.inf
    for c in cycles:
        a, b = c.curve.segment_ends()
        d = b - a
        dd = np.einsum("ij,ij->i", d, d)
        t = np.clip(np.einsum("ij,ij->i", x - a, d) / np.where(dd > 0, dd, 1), 0, 1)
        dist = float(np.linalg.norm(a + t[:, None] * d - x, axis=1).min())
        if dist < best_d:
            best, best_d = c, dist
    if best is None or best_d > tol:
        raise NoComponentNear("no level component passes near the point",
                              {"distance": None if best is None else best_d, "tol": tol})
    return best


# --- coarea ------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SliceSearch:
    u: float
    length_a: float
    length_b: float
    budget: float
    meets_budget: bool
    clamped: bool
    window: float
    us: np.ndarray
    lengths_a: np.ndarray
    lengths_b: np.ndarray

    @property
    def total(self) -> float:
        return self.length_a + self.length_b


def coarea_slice_search(field_a: DistanceField, field_b: DistanceField, window: float, budget: float,
                        samples: int = 64, radius_a: Optional[float] = None,
                        radius_b: Optional[float] = None, strict: bool = False) -> SliceSearch:
    """Find u in [0, window] minimising the total length of the level
    radius_a - u of field_a plus the level radius_b - u of field_b."""
    if samples < 16:
        raise PreconditionError("coarea search needs at least 16 samples", {"samples": samples})
    ra = field_a.max if radius_a is None else float(radius_a)
    rb = field_b.max if radius_b is None else float(radius_b)
    w = float(window)
    clamped = False
    if w > min(ra, rb):
        if strict:
            raise WindowTooLarge("slice window exceeds a source radius",
                                 {"window": w, "radius_a": ra, "radius_b": rb})
        w = WINDOW_CLAMP * min(ra, rb)
        clamped = True
        logger.warning("coarea window clamped to %.6g (radii %.6g, %.6g)", w, ra, rb)
    us = np.linspace(0.0, w, samples + 1)
    la = np.array([level_length(field_a, ra - u) for u in us])
    lb = np.array([level_length(field_b, rb - u) for u in us])
    k = int(np.argmin(la + lb))
    total = float(la[k] + lb[k])
    return SliceSearch(float(us[k]), float(la[k]), float(lb[k]), float(budget), total <= budget,
                       clamped, w, us, la, lb)


def ball_area(field: DistanceField, R: float) -> float:
    """Area where the interpolated field is below R."""
    lat = field.lattice
    v = np.sort(field.values[lat.sub_triangles], axis=1)
    v0, v1, v2 = v[:, 0], v[:, 1], v[:, 2]
    frac = np.zeros(len(v))
    frac[R >= v2] = 1.0
    lowmid = (R > v0) & (R <= v1) & (R < v2)
    with np.errstate(divide="ignore", invalid="ignore"):
        f1 = (R - v0) ** 2 / ((v1 - v0) * (v2 - v0))
        f2 = 1.0 - (v2 - R) ** 2 / ((v2 - v1) * (v2 - v0))
    frac[lowmid] = np.nan_to_num(f1[lowmid], nan=1.0, posinf=1.0)
    highmid = (R > v1) & (R < v2)
    frac[highmid] = np.nan_to_num(f2[highmid], nan=0.0, neginf=0.0)
    return float((np.clip(frac, 0, 1) * lat.sub_area).sum())


def coarea_integral(field: DistanceField, R: float, samples: int = 64) -> Tuple[float, float]:
    """Trapezoid integral of level lengths over [0, R] and the area of the R-ball."""
    if samples < 64:
        raise PreconditionError("coarea integral needs at least 64 samples", {"samples": samples})
    rs = np.linspace(0.0, R, samples + 1)
    lengths = np.array([level_length(field, r) for r in rs])
    return float(trapezoid(lengths, rs)), ball_area(field, R)


# --- dump / load ---------------------------------------------------------------------

def dump_field(field: DistanceField) -> bytes:
    """Flat binary: magic, uint64 sample count, float64 samples (little endian)."""
    vals = np.ascontiguousarray(field.values, dtype="<f8")
    return FIELD_MAGIC + struct.pack("<Q", len(vals)) + vals.tobytes()


def load_field(mesh: TriMesh, data: bytes, steiner: int = DEFAULT_STEINER) -> DistanceField:
    if len(data) < 12 or data[:4] != FIELD_MAGIC:
        raise ParseError("not a distance field dump")
    (count,) = struct.unpack("<Q", data[4:12])
    if len(data) != 12 + 8 * count:
        raise ParseError("truncated distance field dump", {"count": count, "bytes": len(data)})
    values = np.frombuffer(data[12:], dtype="<f8").astype(np.float64)
    return DistanceField(mesh, None, steiner, values=values)
