"""
Tests for curves: arclength bookkeeping, crossings, winding, regions and
straightening, mostly on an octahedron where every quantity is exact.
"""

import math

import numpy as np
import pytest

from curves import (
    ClosedCurve,
    Path,
    SurfacePoint,
    arc,
    carrier_mask,
    complement_regions,
    concatenate,
    crossing_count,
    crossing_events,
    curves_meet,
    hausdorff_distance,
    insert_at_arclengths,
    is_distinct,
    obj_polyline,
    open_at,
    oriented_intersection_number,
    point_at,
    polyline_records,
    project_to_curve,
    region_containing,
    resample,
    reverse,
    self_intersections,
    straighten_path,
    sub_path,
    winding_mod2,
)
from errors import GapTooLarge, PreconditionError
from mesh import TriMesh, generate_icosphere
from metric import distance_field, level_set

PX, NX, PY, NY, PZ, NZ = range(6)
OCTA_VERTICES = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
OCTA_FACES = [[x, y, z] for x in (PX, NX) for y in (PY, NY) for z in (PZ, NZ)]
EDGE = math.sqrt(2.0)


def face_with(mesh, *verts):
    for f in range(mesh.n_faces):
        if set(verts) <= set(int(v) for v in mesh.faces[f]):
            return f
    raise KeyError(verts)


def edge_loop(mesh, verts, side):
    """Closed curve along mesh edges, each segment carried by the face that also holds `side`."""
    faces = [face_with(mesh, u, w, side) for u, w in zip(verts, verts[1:] + verts[:1])]
    return ClosedCurve(mesh.vertices[verts], np.array(faces))


@pytest.fixture(scope="module")
def octa():
    return TriMesh(OCTA_VERTICES, OCTA_FACES, name="octahedron")


@pytest.fixture(scope="module")
def equator(octa):
    return edge_loop(octa, [PX, PY, NX, NY], PZ)


@pytest.fixture(scope="module")
def meridian(octa):
    return edge_loop(octa, [PZ, PX, NZ, NX], PY)


def test_lengths_and_arclength(equator):
    assert equator.length == pytest.approx(4 * EDGE)
    i, t, xyz = point_at(equator, EDGE / 2)
    assert (i, t) == (0, pytest.approx(0.5))
    assert xyz == pytest.approx([0.5, 0.5, 0.0])
    _, _, wrapped = point_at(equator, 4 * EDGE + EDGE / 2)
    assert wrapped == pytest.approx(xyz)


def test_project_to_curve(equator):
    s, d = project_to_curve(equator, [0.5, 0.5, 0.0])
    assert s == pytest.approx(EDGE / 2)
    assert d == pytest.approx(0.0, abs=1e-12)


def test_insert_keeps_geometry_and_marks_breaks(octa, equator):
    marked = insert_at_arclengths(octa, equator, [EDGE / 2, EDGE])
    assert marked.length == pytest.approx(equator.length)
    assert marked.n == 5
    assert marked.points[marked.breaks[0]] == pytest.approx([0.5, 0.5, 0.0])
    assert marked.points[marked.breaks[1]] == pytest.approx(octa.vertices[PY])


def test_resample_spacing(octa, equator):
    r = resample(octa, equator, 8)
    assert len(np.unique(r.breaks)) == 8
    gaps = np.diff(np.append(r.cumulative[r.breaks], r.length))
    assert gaps == pytest.approx(np.full(8, r.length / 8))
    with pytest.raises(PreconditionError):
        resample(octa, equator, 2)


def test_arcs_and_open_paths(octa, equator):
    a = arc(equator, 0, 2)
    assert isinstance(a, Path)
    assert a.length == pytest.approx(2 * EDGE)
    whole = open_at(equator, 1)
    assert whole.n == equator.n + 1
    assert whole.start == pytest.approx(whole.end)
    piece = sub_path(octa, whole, 0.25 * EDGE, 2.5 * EDGE)
    assert piece.length == pytest.approx(2.25 * EDGE)


def test_concatenate_rejoins_pieces(octa, equator):
    first, second = arc(equator, 0, 2), arc(equator, 2, 0)
    joined = concatenate(octa, [(first, False), (second, False)])
    assert joined.length == pytest.approx(equator.length)
    flipped = concatenate(octa, [(reverse(second), True), (reverse(first), True)])
    assert flipped.length == pytest.approx(equator.length)
    with pytest.raises(GapTooLarge):
        concatenate(octa, [(first, False), (arc(equator, 3, 0), False)])


def test_equator_and_meridian_cross_twice(octa, equator, meridian):
    assert self_intersections(octa, equator) == []
    events = crossing_events(octa, equator, meridian)
    assert len(events) == 2
    assert sorted(e.sign for e in events) == [-1, 1]
    assert crossing_count(octa, equator, meridian) == 2
    assert oriented_intersection_number(octa, equator, meridian) == 0
    assert curves_meet(octa, equator, meridian)


def test_bowtie_crosses_itself_once(octa):
    f = face_with(octa, PX, PY, PZ)
    a, b, c = octa.vertices[octa.faces[f]]
    g = (a + b + c) / 3
    corners = [(0, 0), (1, 1), (1, 0), (0, 1)]
    pts = np.array([g + 0.2 * ((u - 0.5) * (b - a) + (v - 0.5) * (c - a)) for u, v in corners])
    bowtie = ClosedCurve(pts, np.full(4, f))
    crossings = self_intersections(octa, bowtie)
    assert len(crossings) == 1
    assert np.allclose(crossings[0].point, g)
    assert crossings[0].kind == "interior"


def test_reverse_flips_crossing_signs(octa, equator, octa_path):
    forward = oriented_intersection_number(octa, equator, octa_path)
    assert abs(forward) == 1
    assert oriented_intersection_number(octa, reverse(equator), octa_path) == -forward
    assert reverse(equator).length == pytest.approx(equator.length)


@pytest.fixture(scope="module")
def octa_path(octa):
    """Straight path from the centre of an upper face to the centre of the face below it."""
    up, down = face_with(octa, PX, PY, PZ), face_with(octa, PX, PY, NZ)
    mid = 0.5 * (octa.vertices[PX] + octa.vertices[PY])
    return Path(np.array([octa.face_centroids[up], mid, octa.face_centroids[down]]), np.array([up, down]))


def test_winding_parity(octa, equator):
    north = SurfacePoint(face_with(octa, PX, PY, PZ), (1 / 3, 1 / 3, 1 / 3))
    south = SurfacePoint(face_with(octa, PX, PY, NZ), (1 / 3, 1 / 3, 1 / 3))
    also_north = SurfacePoint(face_with(octa, NX, PY, PZ), (1 / 3, 1 / 3, 1 / 3))
    assert winding_mod2(octa, equator, north, south, steiner=2) == 1
    assert winding_mod2(octa, equator, north, also_north, steiner=2) == 0


def test_hausdorff_and_distinctness(equator, meridian):
    assert hausdorff_distance(equator, equator) == pytest.approx(0.0)
    assert hausdorff_distance(equator, meridian) == pytest.approx(math.sqrt(1.5), rel=1e-3)
    assert not is_distinct(equator, equator)[0]
    distinct, evidence = is_distinct(equator, meridian)
    assert distinct
    assert evidence["nearest_multiple"] == 1


def test_double_cover_is_not_distinct(equator):
    double = ClosedCurve(np.vstack([equator.points, equator.points]),
                         np.concatenate([equator.faces, equator.faces]))
    distinct, evidence = is_distinct(equator, double)
    assert not distinct
    assert evidence["nearest_multiple"] == 2


def test_straighten_inside_one_face(octa):
    f = face_with(octa, PX, PY, PZ)
    a, b = octa.vertices[PX], octa.vertices[PY]
    bent = Path(np.array([a, octa.face_centroids[f], b]), np.array([f, f]))
    straight = straighten_path(octa, bent)
    assert straight.n == 2
    assert straight.length == pytest.approx(EDGE)


def test_straighten_across_an_edge(octa):
    up, down = face_with(octa, PX, PY, PZ), face_with(octa, PX, PY, NZ)
    hinge = 0.9 * octa.vertices[PX] + 0.1 * octa.vertices[PY]
    bent = Path(np.array([octa.face_centroids[up], hinge, octa.face_centroids[down]]), np.array([up, down]))
    straight = straighten_path(octa, bent)
    assert straight.length <= bent.length
    # unfolded, the two centroids are two inradii apart
    assert straight.length == pytest.approx(EDGE / math.sqrt(3.0))


def test_export_records(octa, equator):
    records = polyline_records(octa, equator)
    assert len(records) == equator.n
    assert all(sum(r["bary"]) == pytest.approx(1.0) for r in records)
    text = obj_polyline([equator], ["equator"])
    assert text.splitlines()[0] == "o equator"
    assert text.splitlines()[-1] == "l 1 2 3 4 1"


def test_carrier_mask(octa, equator):
    mask = carrier_mask(octa, equator)
    assert mask.sum() == 4
    assert all(octa.vertices[octa.faces[f], 2].max() > 0 for f in np.nonzero(mask)[0])


def test_level_cycle_splits_the_sphere():
    sphere = generate_icosphere(2)
    source = SurfacePoint(0, (1 / 3, 1 / 3, 1 / 3))
    field = distance_field(sphere, source, steiner=2)
    cycle = level_set(field, 0.5 * field.max)[0].curve
    regions = complement_regions(sphere, cycle)
    assert len(regions) == 2
    assert region_containing(regions, 0) is not None
    assert sum(r.area for r in regions) < sphere.area
    assert not np.any(regions[0].mask & regions[1].mask)
