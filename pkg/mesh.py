"""
Triangulated 2-spheres: loading, validation, measurement and generators.

The metric is the piecewise-flat one induced by the vertex coordinates. Code
outside this module only relies on edge lengths and on positions inside a
face, so every face is its own flat chart.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import trimesh
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order, connected_components, dijkstra

from errors import (
    DegenerateFace,
    MeshError,
    NonPositiveAxis,
    ParseError,
    SelfIntersectionError,
    SizeError,
    TopologyError,
)
from models import MeshDiagnostics

logger = logging.getLogger(__name__)

try:
    from skimage import measure
    SKIMAGE_AVAILABLE = True
except ImportError:
    measure = None
    SKIMAGE_AVAILABLE = False

DEGENERATE_AREA_FACTOR = 1e-12
MAX_ICOSPHERE_SUBDIV = 8
BARY_TOL = 1e-9

# (kind, index): kind is "face", "edge" or "vertex"
Location = Tuple[str, int]


@dataclass(frozen=True)
class VertexFan:
    faces: np.ndarray      # incident faces in counterclockwise order
    starts: np.ndarray     # cone angle at which each face begins
    total: float           # cone angle (angle sum) at the vertex


def _edge_topology(faces: np.ndarray):
    """Unique edges plus face/edge incidence; local edge j is opposite corner j."""
    n_faces = len(faces)
    a = faces[:, [1, 2, 0]].reshape(-1)
    b = faces[:, [2, 0, 1]].reshape(-1)
    pairs = np.sort(np.column_stack([a, b]), axis=1)
    edges, inverse, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
    inverse = np.asarray(inverse).reshape(-1)
    if np.any(counts == 1):
        raise TopologyError(
            "mesh is not closed: some edges border a single face",
            {"boundary_edges": int(np.sum(counts == 1))},
        )
    if np.any(counts > 2):
        raise TopologyError(
            "mesh is not a manifold: some edges border more than two faces",
            {"nonmanifold_edges": int(np.sum(counts > 2))},
        )
    face_edges = inverse.reshape(n_faces, 3)
    order = np.argsort(inverse, kind="stable")
    edge_faces = (order // 3).reshape(-1, 2)
    edge_local = (order % 3).reshape(-1, 2)
    return edges, face_edges, edge_faces, edge_local


def _same_direction(faces, edge_faces, edge_local) -> np.ndarray:
    """True where both faces of an edge traverse it the same way."""
    s0 = faces[edge_faces[:, 0], (edge_local[:, 0] + 1) % 3]
    s1 = faces[edge_faces[:, 1], (edge_local[:, 1] + 1) % 3]
    return s0 == s1


def _orient_faces(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Make face orientation consistent and outward; raise for disconnected or
    non-orientable input."""
    n_faces = len(faces)
    _, _, edge_faces, edge_local = _edge_topology(faces)
    dual = sparse.coo_matrix(
        (np.ones(len(edge_faces)), (edge_faces[:, 0], edge_faces[:, 1])),
        shape=(n_faces, n_faces),
    ).tocsr()
    n_components, _ = connected_components(dual, directed=False)
    if n_components != 1:
        raise TopologyError(
            f"surface has {n_components} connected components, expected 1",
            {"components": int(n_components)},
        )

    same = _same_direction(faces, edge_faces, edge_local)
    if same.any():
        logger.info("Reorienting %d inconsistent face pairs", int(same.sum()))
        edge_id = sparse.coo_matrix(
            (np.arange(len(edge_faces)) + 1, (edge_faces[:, 0], edge_faces[:, 1])),
            shape=(n_faces, n_faces),
        )
        edge_id = (edge_id + edge_id.T).tocsr()
        order, pred = breadth_first_order(dual, 0, directed=False, return_predecessors=True)
        flip = np.zeros(n_faces, dtype=bool)
        for f in order[1:]:
            p = pred[f]
            e = int(edge_id[p, f]) - 1
            flip[f] = flip[p] ^ bool(same[e])
        faces = faces.copy()
        faces[flip] = faces[flip][:, [0, 2, 1]]
        _, _, edge_faces, edge_local = _edge_topology(faces)
        if _same_direction(faces, edge_faces, edge_local).any():
            raise TopologyError("surface is not orientable")

    v = vertices[faces]
    volume = np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum() / 6.0
    if volume < 0:
        faces = faces[:, [0, 2, 1]]
    return faces


def _stable_heron(sides: np.ndarray) -> np.ndarray:
    s = np.sort(sides, axis=1)[:, ::-1]
    a, b, c = s[:, 0], s[:, 1], s[:, 2]
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


class TriMesh:
    """Closed, consistently oriented triangulated sphere.

    Construction validates the invariants (closed, connected, orientable,
    Euler characteristic 2, strict triangle inequality, no degenerate faces)
    and reorients faces counterclockwise seen from outside. Arrays are
    read-only afterwards.
    """

    def __init__(self, vertices, faces, name: str = "mesh"):
        vertices = np.array(vertices, dtype=np.float64)
        faces = np.array(faces, dtype=np.int64)
        if vertices.ndim != 2 or vertices.shape[1] != 3 or len(vertices) == 0:
            raise ParseError("vertices must be a non-empty (V, 3) array")
        if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
            raise ParseError("faces must be a non-empty (F, 3) array of triangles")
        if not np.all(np.isfinite(vertices)):
            raise ParseError("vertex coordinates must be finite")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise ParseError("face references a vertex index out of range")
        if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])):
            raise DegenerateFace("face repeats a vertex")
        used = np.zeros(len(vertices), dtype=bool)
        used[faces.reshape(-1)] = True
        if not used.all():
            raise TopologyError(
                "mesh has vertices not used by any face",
                {"unreferenced": int((~used).sum())},
            )

        faces = _orient_faces(vertices, faces)
        self.name = name
        self.vertices = vertices
        self.faces = faces
        self.edges, self.face_edges, self.edge_faces, self.edge_local = _edge_topology(faces)

        chi = self.n_vertices - self.n_edges + self.n_faces
        if chi != 2:
            raise TopologyError(
                f"Euler characteristic is {chi}, a sphere needs 2",
                {"euler_characteristic": int(chi)},
            )

        self.edge_lengths = np.linalg.norm(vertices[self.edges[:, 1]] - vertices[self.edges[:, 0]], axis=1)
        if not np.all(self.edge_lengths > 0):
            raise DegenerateFace("zero-length edge")
        self.face_sides = self.edge_lengths[self.face_edges]
        s = self.face_sides
        if np.any((s[:, 0] >= s[:, 1] + s[:, 2]) | (s[:, 1] >= s[:, 0] + s[:, 2]) | (s[:, 2] >= s[:, 0] + s[:, 1])):
            raise DegenerateFace("face violates the strict triangle inequality")
        self.face_areas = _stable_heron(s)
        max_edge = float(self.edge_lengths.max())
        tiny = self.face_areas < DEGENERATE_AREA_FACTOR * max_edge ** 2
        if tiny.any():
            raise DegenerateFace(
                "degenerate (near zero-area) faces",
                {"faces": np.nonzero(tiny)[0][:10].tolist()},
            )

        self.face_neighbors = self._face_neighbors()
        self.corner_angles = self._corner_angles()
        self.angle_sums = np.bincount(
            faces.reshape(-1), weights=self.corner_angles.reshape(-1), minlength=self.n_vertices
        )
        self._fans: Dict[int, VertexFan] = {}

        for arr in (self.vertices, self.faces, self.edges, self.face_edges, self.edge_faces,
                    self.edge_local, self.edge_lengths, self.face_sides, self.face_areas,
                    self.face_neighbors, self.corner_angles, self.angle_sums):
            arr.setflags(write=False)

    # sizes and scalar measures

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @cached_property
    def area(self) -> float:
        return float(self.face_areas.sum())

    @cached_property
    def min_edge(self) -> float:
        return float(self.edge_lengths.min())

    @cached_property
    def max_edge(self) -> float:
        return float(self.edge_lengths.max())

    @property
    def eps(self) -> float:
        """Length below which two points on the surface are treated as equal."""
        return 1e-9 * self.max_edge

    # derived incidence

    def _face_neighbors(self) -> np.ndarray:
        owner = np.repeat(np.arange(self.n_faces), 3)
        ef = self.edge_faces[self.face_edges.reshape(-1)]
        return np.where(ef[:, 0] == owner, ef[:, 1], ef[:, 0]).reshape(self.n_faces, 3)

    def _corner_angles(self) -> np.ndarray:
        s = self.face_sides
        l0, l1, l2 = s[:, 0], s[:, 1], s[:, 2]
        c0 = (l1 ** 2 + l2 ** 2 - l0 ** 2) / (2 * l1 * l2)
        c1 = (l0 ** 2 + l2 ** 2 - l1 ** 2) / (2 * l0 * l2)
        c2 = (l0 ** 2 + l1 ** 2 - l2 ** 2) / (2 * l0 * l1)
        return np.arccos(np.clip(np.column_stack([c0, c1, c2]), -1.0, 1.0))

    @cached_property
    def face_normals(self) -> np.ndarray:
        v = self.vertices[self.faces]
        n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        return n / np.linalg.norm(n, axis=1)[:, None]

    @cached_property
    def face_centroids(self) -> np.ndarray:
        return self.vertices[self.faces].mean(axis=1)

    @cached_property
    def vertex_face_matrix(self) -> sparse.csr_matrix:
        rows = self.faces.reshape(-1)
        cols = np.repeat(np.arange(self.n_faces), 3)
        return sparse.csr_matrix(
            (np.ones(len(rows)), (rows, cols)), shape=(self.n_vertices, self.n_faces)
        )

    @cached_property
    def face_dual(self) -> sparse.csr_matrix:
        """Face adjacency across edges, weighted by centroid distance."""
        f0, f1 = self.edge_faces[:, 0], self.edge_faces[:, 1]
        w = np.linalg.norm(self.face_centroids[f0] - self.face_centroids[f1], axis=1)
        m = sparse.coo_matrix((w, (f0, f1)), shape=(self.n_faces, self.n_faces))
        return (m + m.T).tocsr()

    @cached_property
    def edge_graph(self) -> sparse.csr_matrix:
        e0, e1 = self.edges[:, 0], self.edges[:, 1]
        m = sparse.coo_matrix((self.edge_lengths, (e0, e1)), shape=(self.n_vertices,) * 2)
        return (m + m.T).tocsr()

    def vertex_faces(self, v: int) -> np.ndarray:
        m = self.vertex_face_matrix
        return m.indices[m.indptr[v]:m.indptr[v + 1]]

    def corner_of(self, face: int, v: int) -> int:
        return int(np.nonzero(self.faces[face] == v)[0][0])

    def vertex_fan(self, v: int) -> VertexFan:
        fan = self._fans.get(v)
        if fan is not None:
            return fan
        incident = self.vertex_faces(v)
        first = int(incident[0])
        order = [first]
        f = first
        for _ in range(len(incident)):
            k = self.corner_of(f, v)
            nxt = int(self.face_neighbors[f, (k + 1) % 3])
            if nxt == first:
                break
            order.append(nxt)
            f = nxt
        if len(order) != len(incident):
            raise TopologyError(f"vertex {v} is not a manifold vertex")
        angles = np.array([self.corner_angles[g, self.corner_of(g, v)] for g in order])
        starts = np.concatenate([[0.0], np.cumsum(angles)[:-1]])
        fan = VertexFan(faces=np.array(order, dtype=np.int64), starts=starts, total=float(angles.sum()))
        self._fans[v] = fan
        return fan

    def shared_vertices(self, f: int, g: int) -> np.ndarray:
        return np.intersect1d(self.faces[f], self.faces[g])

    def edge_between(self, f: int, g: int) -> int:
        """Edge shared by adjacent faces f and g, or -1."""
        hits = np.nonzero(self.face_neighbors[f] == g)[0]
        if len(hits) == 0:
            return -1
        return int(self.face_edges[f, hits[0]])

    # points inside faces

    def point(self, face: int, bary) -> np.ndarray:
        return np.asarray(bary, dtype=np.float64) @ self.vertices[self.faces[face]]

    def barycentric(self, face: int, xyz) -> np.ndarray:
        a, b, c = self.vertices[self.faces[face]]
        v0, v1, v2 = b - a, c - a, np.asarray(xyz, dtype=np.float64) - a
        d00, d01, d11 = v0 @ v0, v0 @ v1, v1 @ v1
        d20, d21 = v2 @ v0, v2 @ v1
        den = d00 * d11 - d01 * d01
        w1 = (d11 * d20 - d01 * d21) / den
        w2 = (d00 * d21 - d01 * d20) / den
        return np.array([1.0 - w1 - w2, w1, w2])

    def locate(self, face: int, xyz) -> Location:
        """Classify a point of a face as interior, on an edge, or at a vertex."""
        bary = self.barycentric(face, xyz)
        small = bary < BARY_TOL
        n_small = int(small.sum())
        if n_small == 0:
            return ("face", int(face))
        if n_small == 1:
            j = int(np.nonzero(small)[0][0])
            return ("edge", int(self.face_edges[face, j]))
        j = int(np.argmax(bary))
        return ("vertex", int(self.faces[face, j]))

    def faces_at(self, loc: Location) -> np.ndarray:
        kind, idx = loc
        if kind == "face":
            return np.array([idx], dtype=np.int64)
        if kind == "edge":
            return self.edge_faces[idx]
        return self.vertex_faces(idx)

    def faces_containing(self, face: int, xyz) -> np.ndarray:
        return self.faces_at(self.locate(face, xyz))

    def cone_total(self, loc: Location) -> float:
        return self.vertex_fan(loc[1]).total if loc[0] == "vertex" else 2.0 * math.pi

    def cone_angle(self, loc: Location, face: int, xyz, target) -> float:
        """Angular coordinate of the direction xyz -> target (target in `face`)
        in the flat cone chart around the location of xyz."""
        d = np.asarray(target, dtype=np.float64) - np.asarray(xyz, dtype=np.float64)
        n = self.face_normals[face]
        kind, idx = loc
        if kind == "vertex":
            fan = self.vertex_fan(idx)
            pos = np.nonzero(fan.faces == face)[0]
            if len(pos) == 0:
                raise TopologyError(f"face {face} is not incident to vertex {idx}")
            k = self.corner_of(face, idx)
            first = self.vertices[self.faces[face, (k + 1) % 3]] - self.vertices[idx]
            u = first / np.linalg.norm(first)
            phi = math.atan2(float(n @ np.cross(u, d)), float(u @ d))
            phi = min(max(phi, 0.0), float(self.corner_angles[face, k]))
            return float(fan.starts[pos[0]] + phi)
        if kind == "edge":
            a, b = self.edges[idx]
            u = self.vertices[b] - self.vertices[a]
        else:
            u = self.vertices[self.faces[face, 1]] - self.vertices[self.faces[face, 0]]
        u = u / np.linalg.norm(u)
        return math.atan2(float(n @ np.cross(u, d)), float(u @ d)) % (2.0 * math.pi)

    # conversions

    @cached_property
    def trimesh(self) -> trimesh.Trimesh:
        return trimesh.Trimesh(vertices=np.array(self.vertices), faces=np.array(self.faces), process=False)

    def diameter_estimate(self) -> float:
        return self.diameter

    @cached_property
    def diameter(self) -> float:
        d0 = dijkstra(self.edge_graph, directed=False, indices=0)
        far = int(np.argmax(d0))
        d1 = dijkstra(self.edge_graph, directed=False, indices=far)
        return max(float(d1.max()), self.max_edge)

    def diagnostics(self) -> MeshDiagnostics:
        return validate_mesh(self)

    def __repr__(self) -> str:
        return f"TriMesh({self.name!r}, V={self.n_vertices}, F={self.n_faces})"


def validate_mesh(mesh: TriMesh) -> MeshDiagnostics:
    """Report the invariants a constructed mesh satisfies."""
    same = _same_direction(mesh.faces, mesh.edge_faces, mesh.edge_local)
    return MeshDiagnostics(
        eulerCharacteristic=mesh.n_vertices - mesh.n_edges + mesh.n_faces,
        isClosed=True,
        isOriented=not bool(same.any()),
        minAngle=float(mesh.corner_angles.min()),
        minEdge=mesh.min_edge,
        maxEdge=mesh.max_edge,
        area=mesh.area,
        diameterEstimate=mesh.diameter_estimate(),
        vertices=mesh.n_vertices,
        edges=mesh.n_edges,
        faces=mesh.n_faces,
    )


def mesh_area(mesh: TriMesh) -> float:
    """Sum of Heron areas over the intrinsic edge lengths."""
    return mesh.area


# --- input / output ---------------------------------------------------------

def load_mesh(stream: Union[bytes, str, io.IOBase], fmt: str, name: Optional[str] = None) -> TriMesh:
    """Parse ASCII OFF or OBJ triangle data into a validated TriMesh."""
    fmt = fmt.lower().lstrip(".")
    if fmt not in ("off", "obj"):
        raise ParseError(f"unsupported mesh format {fmt!r}; use OFF or OBJ")
    data = stream.read() if hasattr(stream, "read") else stream
    if isinstance(data, str):
        data = data.encode("utf-8")
    if not data or not data.strip():
        raise ParseError("empty mesh file")
    try:
        loaded = trimesh.load_mesh(io.BytesIO(data), file_type=fmt, process=False)
    except Exception as exc:
        raise ParseError(f"could not parse {fmt.upper()} data: {exc}") from exc
    faces = getattr(loaded, "faces", None)
    if faces is None or len(faces) == 0:
        raise ParseError(f"no triangular faces found in {fmt.upper()} data")
    mesh = TriMesh(loaded.vertices, faces, name=name or fmt)
    logger.info("Loaded %r", mesh)
    return mesh


def load_mesh_file(path: str, fmt: Optional[str] = None) -> TriMesh:
    fmt = fmt or path.rsplit(".", 1)[-1]
    with open(path, "rb") as fh:
        return load_mesh(fh, fmt, name=path)


def save_off(mesh: TriMesh) -> str:
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} {mesh.n_edges}"]
    lines += [" ".join(f"{c:.17g}" for c in v) for v in mesh.vertices]
    lines += ["3 " + " ".join(str(int(i)) for i in f) for f in mesh.faces]
    return "\n".join(lines) + "\n"


def save_obj(mesh: TriMesh) -> str:
    lines = ["v " + " ".join(f"{c:.17g}" for c in v) for v in mesh.vertices]
    lines += ["f " + " ".join(str(int(i) + 1) for i in f) for f in mesh.faces]
    return "\n".join(lines) + "\n"


# --- generators -------------------------------------------------------------

def generate_icosphere(subdiv: int = 3, radius: float = 1.0) -> TriMesh:
    if int(subdiv) != subdiv or subdiv < 0 or subdiv > MAX_ICOSPHERE_SUBDIV:
        raise SizeError(
            f"icosphere subdivision must be an integer in [0, {MAX_ICOSPHERE_SUBDIV}]",
            {"subdiv": subdiv},
        )
    ico = trimesh.creation.icosphere(subdivisions=int(subdiv), radius=radius)
    return TriMesh(ico.vertices, ico.faces, name=f"icosphere(subdiv={int(subdiv)})")


def generate_ellipsoid(a: float, b: float, c: float, subdiv: int = 3) -> TriMesh:
    if min(a, b, c) <= 0:
        raise NonPositiveAxis("ellipsoid axes must be positive", {"axes": [a, b, c]})
    ico = generate_icosphere(subdiv)
    return TriMesh(
        ico.vertices * np.array([a, b, c]), ico.faces,
        name=f"ellipsoid({a:g},{b:g},{c:g},subdiv={int(subdiv)})",
    )


def _revolve(profile: np.ndarray, segments: int, name: str) -> TriMesh:
    """Surface of revolution about z from a (z, rho) profile running pole to pole."""
    rings = profile[1:-1]
    theta = 2.0 * np.pi * np.arange(segments) / segments
    ring_xyz = np.stack(
        [
            rings[:, 1:2] * np.cos(theta)[None, :],
            rings[:, 1:2] * np.sin(theta)[None, :],
            np.repeat(rings[:, 0:1], segments, axis=1),
        ],
        axis=-1,
    ).reshape(-1, 3)
    south = np.array([[0.0, 0.0, profile[0, 0]]])
    north = np.array([[0.0, 0.0, profile[-1, 0]]])
    vertices = np.vstack([south, ring_xyz, north])

    n_rings = len(rings)
    j = np.arange(segments)
    jn = (j + 1) % segments
    north_id = len(vertices) - 1
    faces = [np.column_stack([np.zeros(segments, dtype=np.int64), 1 + jn, 1 + j])]
    for i in range(n_rings - 1):
        lo, hi = 1 + i * segments, 1 + (i + 1) * segments
        faces.append(np.column_stack([lo + j, lo + jn, hi + jn]))
        faces.append(np.column_stack([lo + j, hi + jn, hi + j]))
    top = 1 + (n_rings - 1) * segments
    faces.append(np.column_stack([np.full(segments, north_id), top + j, top + jn]))
    return TriMesh(vertices, np.vstack(faces), name=name)


def generate_capsule(r: float, h: float, res: int = 64) -> TriMesh:
    """Cylinder of radius r and length h capped by hemispheres."""
    if r <= 0 or h < 0:
        raise SizeError("capsule needs r > 0 and h >= 0", {"r": r, "h": h})
    if res < 8 or res > 1024:
        raise SizeError("capsule resolution must be in [8, 1024]", {"res": res})
    k = max(2, res // 4)
    phi = (np.pi / 2) * np.arange(1, k + 1) / k
    lower = np.column_stack([-h / 2 - r * np.cos(phi), r * np.sin(phi)])
    upper = np.column_stack([h / 2 + r * np.cos(phi[:-1][::-1]), r * np.sin(phi[:-1][::-1])])
    parts = [np.array([[-h / 2 - r, 0.0]]), lower]
    if h > 0:
        spacing = (np.pi / 2) * r / k
        m = max(1, int(math.ceil(h / spacing)))
        z = -h / 2 + h * np.arange(1, m + 1) / m
        parts.append(np.column_stack([z, np.full(m, r)]))
    parts += [upper, np.array([[h / 2 + r, 0.0]])]
    return _revolve(np.vstack(parts), res, name=f"capsule(r={r:g},h={h:g},res={res})")


def generate_dumbbell(radius: float = 1.0, neck_radius: float = 0.05, separation: float = 1.0,
                      res: int = 48) -> TriMesh:
    """Two spheres joined along z by a thin tube."""
    if radius <= 0 or neck_radius <= 0 or separation <= 0 or neck_radius >= radius:
        raise SizeError(
            "dumbbell needs 0 < neck_radius < radius and separation > 0",
            {"radius": radius, "neck_radius": neck_radius, "separation": separation},
        )
    if res < 8 or res > 512:
        raise SizeError("dumbbell resolution must be in [8, 512]", {"res": res})
    center = separation / 2 + radius
    psi_max = np.pi - math.asin(neck_radius / radius)
    k = max(4, res // 2)
    psi = psi_max * np.arange(1, k + 1) / k
    left = np.column_stack([-center - radius * np.cos(psi), radius * np.sin(psi)])
    z_join = left[-1, 0]
    m = max(2, int(math.ceil((-2 * z_join) / (0.1 * radius))))
    neck = np.column_stack([z_join + (-2 * z_join) * np.arange(1, m) / m, np.full(m - 1, neck_radius)])
    right = np.column_stack([-left[::-1, 0], left[::-1, 1]])
    profile = np.vstack([[[-center - radius, 0.0]], left, neck, right, [[center + radius, 0.0]]])
    return _revolve(profile, res, name=f"dumbbell(neck={neck_radius:g})")


def generate_bumpy_sphere(amplitude: float = 0.1, frequency: float = 2.0, subdiv: int = 3,
                          seed: int = 0, terms: int = 4) -> TriMesh:
    """Unit icosphere with smooth random radial noise."""
    if not 0 <= amplitude < 0.5:
        raise SizeError("bump amplitude must lie in [0, 0.5)", {"amplitude": amplitude})
    ico = generate_icosphere(subdiv)
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(terms, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    phases = rng.uniform(0, 2 * np.pi, size=terms)
    weights = rng.uniform(-1, 1, size=terms)
    v = ico.vertices
    bumps = np.sin(frequency * (v @ dirs.T) + phases) @ weights / terms
    return TriMesh(v * (1.0 + amplitude * bumps)[:, None], ico.faces,
                   name=f"bumpy(seed={seed},amp={amplitude:g})")


def _smooth_min(a: np.ndarray, b: np.ndarray, k: float) -> np.ndarray:
    h = np.maximum(k - np.abs(a - b), 0.0) / k
    return np.minimum(a, b) - h * h * k * 0.25


def _tapered_capsule_sdf(p: np.ndarray, tip: np.ndarray, r0: float, r1: float) -> np.ndarray:
    """Approximate signed distance to a capsule from the origin to `tip`
    whose radius shrinks linearly from r0 to r1."""
    length2 = float(tip @ tip)
    t = np.clip((p @ tip) / length2, 0.0, 1.0)
    closest = t[..., None] * tip
    return np.linalg.norm(p - closest, axis=-1) - (r0 + (r1 - r0) * t)


def generate_starfish(leg_len: float = 8.0, leg_rad: float = 1.0, res: int = 6,
                      leg_lens: Optional[Sequence[float]] = None, taper: float = 0.95) -> TriMesh:
    """Three legs at 120 degrees in the xy-plane blended at the origin.

    `res` is the number of grid cells per leg radius used by marching cubes;
    `leg_lens` overrides the three leg lengths individually.
    """
    if leg_rad <= 0:
        raise SizeError("leg radius must be positive", {"leg_rad": leg_rad})
    if leg_len <= 2 * leg_rad:
        raise SelfIntersectionError(
            "legs are too fat for their length at 120 degrees (need leg_len > 2 leg_rad)",
            {"leg_len": leg_len, "leg_rad": leg_rad},
        )
    if not SKIMAGE_AVAILABLE:
        raise MeshError("the starfish generator needs scikit-image")
    if res < 2 or res > 40:
        raise SizeError("starfish resolution must be in [2, 40] cells per radius", {"res": res})
    if not 0.5 <= taper <= 1.0:
        raise SizeError("taper must lie in [0.5, 1]", {"taper": taper})
    lens = [float(leg_len)] * 3 if leg_lens is None else [float(x) for x in leg_lens]
    if len(lens) != 3 or min(lens) <= 0:
        raise SizeError("leg_lens needs three positive lengths", {"leg_lens": lens})

    angles = np.deg2rad([0.0, 120.0, 240.0])
    tips = [L * np.array([math.cos(a), math.sin(a), 0.0]) for L, a in zip(lens, angles)]
    spacing = leg_rad / res
    margin = leg_rad + 3 * spacing
    pts = np.array(tips + [np.zeros(3)])
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    axes = [np.arange(lo[i], hi[i] + spacing, spacing) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    sdf = np.linalg.norm(grid, axis=-1) - 1.15 * leg_rad
    for tip in tips:
        sdf = _smooth_min(sdf, _tapered_capsule_sdf(grid, tip, leg_rad, taper * leg_rad), 0.5 * leg_rad)
    # keep grid nodes off the surface so no marching-cubes vertex sits on a node
    nudge = 1e-9 * spacing
    sdf = np.where(np.abs(sdf) < nudge, nudge, sdf)

    verts, faces, _, _ = measure.marching_cubes(
        sdf, level=0.0, spacing=(spacing, spacing, spacing), allow_degenerate=False
    )
    verts = verts + lo
    surface = trimesh.Trimesh(vertices=verts, faces=faces, process=True)
    parts = surface.split(only_watertight=False)
    if len(parts) > 1:
        surface = max(parts, key=lambda m: m.area)
    surface.remove_unreferenced_vertices()
    if not surface.is_watertight:
        raise TopologyError("starfish extraction is not watertight; try another resolution",
                            {"res": res})
    lens_tag = ",".join(f"{x:g}" for x in lens)
    return TriMesh(surface.vertices, surface.faces, name=f"starfish(legs={lens_tag},rad={leg_rad:g})")


def starfish_tips(leg_len: float = 8.0, leg_rad: float = 1.0, leg_lens: Optional[Sequence[float]] = None,
                  taper: float = 0.95) -> np.ndarray:
    """Approximate tip positions of `generate_starfish` legs (rows x, y, z)."""
    lens = [float(leg_len)] * 3 if leg_lens is None else [float(x) for x in leg_lens]
    angles = np.deg2rad([0.0, 120.0, 240.0])
    return np.array([(L + taper * leg_rad) * np.array([math.cos(a), math.sin(a), 0.0])
                     for L, a in zip(lens, angles)])


GENERATORS = {
    "icosphere": generate_icosphere,
    "ellipsoid": generate_ellipsoid,
    "capsule": generate_capsule,
    "starfish": generate_starfish,
    "dumbbell": generate_dumbbell,
    "bumpy": generate_bumpy_sphere,
}
