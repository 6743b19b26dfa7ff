"""
Tests for the Steiner lattice distance fields, level sets and coarea helpers
on a unit icosphere, where distances are close to great-circle arcs.
"""

import math

import numpy as np
import pytest

from curves import SurfacePoint
from errors import EmptyRegion, NoComponentNear, ParseError, PreconditionError, WindowTooLarge
from mesh import generate_dumbbell, generate_icosphere
from metric import (
    ball_area,
    coarea_integral,
    coarea_slice_search,
    component_through,
    distance_field,
    dump_field,
    farthest_point,
    lattice_for,
    level_length,
    level_set,
    load_field,
    local_path,
    region_diameter,
    shortest_path,
)

STEINER = 2
CENTRE = (1 / 3, 1 / 3, 1 / 3)


@pytest.fixture(scope="module")
def sphere():
    return generate_icosphere(2)


@pytest.fixture(scope="module")
def source(sphere):
    return SurfacePoint(0, CENTRE)


@pytest.fixture(scope="module")
def field(sphere, source):
    return distance_field(sphere, source, steiner=STEINER)


def arc_between(sphere, p, q):
    a, b = p.position(sphere), q.position(sphere)
    cos = a @ b / (np.linalg.norm(a) * np.linalg.norm(b))
    return math.acos(np.clip(cos, -1.0, 1.0))


def test_lattice_size(sphere):
    lat = lattice_for(sphere, STEINER)
    assert lat.n_nodes == sphere.n_vertices + STEINER * sphere.n_edges + sphere.n_faces
    assert lattice_for(sphere, STEINER) is lat
    assert np.allclose(lat.positions[: sphere.n_vertices], sphere.vertices)
    with pytest.raises(PreconditionError):
        lattice_for(sphere, -1)


def test_field_tracks_great_circle_distance(sphere, source, field):
    assert field.at(source) == pytest.approx(0.0, abs=1e-12)
    for face in (5, 60, 150, 300):
        q = SurfacePoint(face, CENTRE)
        assert field.at(q) == pytest.approx(arc_between(sphere, source, q), rel=0.1, abs=0.02)


def test_farthest_point_is_antipodal(sphere, source, field):
    far, value = farthest_point(field)
    assert value == pytest.approx(field.max)
    assert value == pytest.approx(math.pi, rel=0.1)
    assert arc_between(sphere, source, far) > 0.9 * math.pi


def test_farthest_point_in_a_region(sphere, field):
    near = np.zeros(sphere.n_faces, dtype=bool)
    near[:1] = True
    _, value = farthest_point(field, restrict=near)
    assert value < 0.5


def test_shortest_path_is_tight(sphere, source, field):
    q = SurfacePoint(200, CENTRE)
    path = shortest_path(sphere, source, q, steiner=STEINER, field=field)
    assert path.start == pytest.approx(source.position(sphere))
    assert path.end == pytest.approx(q.position(sphere))
    chord = np.linalg.norm(q.position(sphere) - source.position(sphere))
    assert chord <= path.length <= field.at(q) + 1e-9
    raw = shortest_path(sphere, source, q, steiner=STEINER, straighten=False, field=field)
    assert path.length <= raw.length + 1e-9


def test_local_path_matches_global_nearby(sphere, source):
    corner = sphere.vertices[sphere.faces[0][0]]
    neighbour = next(int(f) for f in sphere.faces_containing(0, corner) if f != 0)
    q = SurfacePoint(neighbour, CENTRE)
    radius = 2.0 * np.linalg.norm(q.position(sphere) - source.position(sphere)) + 0.3
    near = local_path(sphere, source, q, radius, steiner=STEINER)
    full = shortest_path(sphere, source, q, steiner=STEINER)
    assert near.length == pytest.approx(full.length, rel=1e-6)


def test_level_lengths(field):
    assert level_length(field, 0.0) == 0.0
    assert level_length(field, field.max + 1) == 0.0
    assert level_length(field, math.pi / 2) == pytest.approx(2 * math.pi, rel=0.1)
    assert level_length(field, 0.3) < level_length(field, 1.0)


def test_level_set_components(sphere, source, field):
    cycles = level_set(field, math.pi / 2)
    assert cycles
    assert [c.length for c in cycles] == sorted((c.length for c in cycles), reverse=True)
    top = cycles[0]
    assert top.length == pytest.approx(level_length(field, top.level), rel=1e-6)
    # sublevel on the left: the loop turns counterclockwise around the source
    pts = top.curve.points
    swept = 0.5 * np.cross(pts, np.roll(pts, -1, axis=0)).sum(axis=0)
    assert swept @ source.position(sphere) > 0
    for bad in (0.0, field.max):
        with pytest.raises(PreconditionError):
            level_set(field, bad)


def test_component_through(sphere, source, field):
    cycles = level_set(field, 1.0)
    on = cycles[0].curve.points[3]
    assert component_through(cycles, on, tol=1e-9) is cycles[0]
    with pytest.raises(NoComponentNear):
        component_through(cycles, source, tol=0.05, mesh=sphere)


def test_coarea_integral_matches_ball_area(field):
    integral, area = coarea_integral(field, 1.0)
    cap = 2 * math.pi * (1 - math.cos(1.0))
    assert area == pytest.approx(cap, rel=0.1)
    assert 0.8 * area <= integral <= 1.2 * area
    assert ball_area(field, field.max + 1) == pytest.approx(field.mesh.area)
    with pytest.raises(PreconditionError):
        coarea_integral(field, 1.0, samples=10)


def test_coarea_slice_search(sphere, field):
    other = distance_field(sphere, SurfacePoint(300, CENTRE), steiner=STEINER)
    found = coarea_slice_search(field, other, window=0.5, budget=100.0, radius_a=1.0, radius_b=1.0)
    assert 0 <= found.u <= 0.5
    assert found.us[0] == 0.0 and found.us[-1] == pytest.approx(0.5)
    assert len(found.us) == 65
    assert found.meets_budget and not found.clamped
    assert found.total == pytest.approx(min(found.lengths_a + found.lengths_b))
    clamped = coarea_slice_search(field, other, window=10.0, budget=0.0, radius_a=1.0, radius_b=1.0)
    assert clamped.clamped and clamped.window == pytest.approx(0.95)
    assert not clamped.meets_budget
    with pytest.raises(WindowTooLarge):
        coarea_slice_search(field, other, window=10.0, budget=0.0, radius_a=1.0, radius_b=1.0, strict=True)


def test_field_dump_reload(sphere, field):
    data = dump_field(field)
    again = load_field(sphere, data, steiner=STEINER)
    assert np.array_equal(again.values, field.values)
    assert again.max == pytest.approx(field.max)
    with pytest.raises(ParseError):
        load_field(sphere, b"XXXX" + data[4:], steiner=STEINER)
    with pytest.raises(ParseError):
        load_field(sphere, data[:-8], steiner=STEINER)
    with pytest.raises(ParseError):
        load_field(sphere, data, steiner=STEINER + 1)


def test_point_fields_are_cached(sphere):
    first = distance_field(sphere, SurfacePoint(7, CENTRE), steiner=STEINER)
    assert distance_field(sphere, SurfacePoint(7, CENTRE), steiner=STEINER) is first
    assert distance_field(sphere, SurfacePoint(7, CENTRE), steiner=STEINER + 1) is not first


def test_region_diameter_brackets(sphere, source, field):
    lower, upper = region_diameter(sphere, source, np.ones(sphere.n_faces, dtype=bool), steiner=STEINER)
    assert upper == pytest.approx(2 * lower)
    assert lower == pytest.approx(math.pi, rel=0.05)
    xs = source.position(sphere)
    cap = np.linalg.norm(sphere.face_centroids - xs, axis=1) < 0.5
    small, _ = region_diameter(sphere, source, cap, steiner=STEINER)
    assert small <= 1.0 + 2 * sphere.max_edge
    with pytest.raises(EmptyRegion):
        region_diameter(sphere, source, np.zeros(sphere.n_faces, dtype=bool), steiner=STEINER)


def test_slice_search_finds_the_dumbbell_neck():
    neck = 0.05
    db = generate_dumbbell(neck_radius=neck, res=24)
    south = SurfacePoint.from_vertex(db, 0)
    north = SurfacePoint.from_vertex(db, db.n_vertices - 1)
    field_s = distance_field(db, south, steiner=STEINER)
    field_n = distance_field(db, north, steiner=STEINER)
    middle = SurfacePoint.from_vertex(db, int(np.argmin(np.abs(db.vertices[:, 2]))))
    budget = 2 * 2 * math.pi * neck * 1.1
    found = coarea_slice_search(field_s, field_n, window=0.3, budget=budget,
                                radius_a=field_s.at(middle), radius_b=field_n.at(middle))
    assert found.total < budget
    assert found.meets_budget
    pinched = field_s.at(middle)
    assert ball_area(field_s, pinched) == pytest.approx(db.area / 2, rel=0.05)
