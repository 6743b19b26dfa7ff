"""
Tests for Birkhoff shortening: single steps, the turning-defect residual,
full runs and the trace queries used by the constructions.
"""

import math

import numpy as np
import pytest

from birkhoff import (
    OutcomeKind,
    HomotopyTrace,
    birkhoff_run,
    birkhoff_step,
    break_count,
    geodesic_join,
    geodesic_residual,
    is_geodesic,
    last_intersection_index,
    trace_winding_constant,
    track_last_intersection,
    turning_defects,
)
from config import Settings
from curves import ClosedCurve, SurfacePoint
from errors import CorridorMiss, NeverIntersects, NeverSeparates, PreconditionError
from mesh import TriMesh, generate_icosphere
from metric import distance_field, level_set
from test_curves import NX, NY, NZ, OCTA_FACES, OCTA_VERTICES, PX, PY, PZ, edge_loop, face_with

CENTRE = (1 / 3, 1 / 3, 1 / 3)


@pytest.fixture(scope="module")
def octa():
    return TriMesh(OCTA_VERTICES, OCTA_FACES, name="octahedron")


@pytest.fixture(scope="module")
def sphere():
    return generate_icosphere(2)


@pytest.fixture(scope="module")
def small_circle(sphere):
    field = distance_field(sphere, SurfacePoint(0, CENTRE), steiner=2)
    return level_set(field, 1.0)[0].curve


def little_loop(mesh, face, scale=0.1):
    """Tiny triangle around the centroid of one face."""
    c = mesh.face_centroids[face]
    pts = c + scale * (mesh.vertices[mesh.faces[face]] - c)
    return ClosedCurve(pts, np.full(3, face))


def test_octahedron_equator_turns_at_every_vertex(octa):
    equator = edge_loop(octa, [PX, PY, NX, NY], PZ)
    defects = turning_defects(octa, equator)
    assert defects == pytest.approx(np.full(4, math.pi / 3))
    assert geodesic_residual(octa, equator) == pytest.approx(math.pi / 3)
    assert not is_geodesic(octa, equator, 0.03)
    assert is_geodesic(octa, equator, math.pi / 3 + 1e-9)


def test_step_needs_even_break_count(sphere, small_circle):
    for n in (2, 5):
        with pytest.raises(PreconditionError):
            birkhoff_step(sphere, small_circle, n)


def test_step_never_lengthens(sphere, small_circle):
    c = small_circle
    for _ in range(3):
        shorter = birkhoff_step(sphere, c, 32)
        assert shorter.length <= c.length + 1e-12
        c = shorter
    assert c.length < small_circle.length


def test_break_count_is_even_and_clamped(sphere):
    settings = Settings()
    assert break_count(sphere, 1e-6, settings) == settings.min_break_points
    assert break_count(sphere, 1e6, settings) == settings.max_break_points
    assert break_count(sphere, 7.3, settings) % 2 == 0


def test_run_stops_at_iteration_limit_with_trace(sphere, small_circle):
    out = birkhoff_run(sphere, small_circle, geodesic_tol=1e-9, max_iter=3, record_trace=True)
    assert out.kind is OutcomeKind.STALLED
    assert out.reason == "iteration limit"
    assert out.iterations == 3
    assert len(out.trace) == 4
    assert all(a >= b - 1e-12 for a, b in zip(out.trace.lengths, out.trace.lengths[1:]))
    assert out.summary()["kind"] == "Stalled"
    assert len(out.trace.records(sphere, every=2)) == 2


def test_run_honours_stop_when(sphere, small_circle):
    out = birkhoff_run(sphere, small_circle, geodesic_tol=1e-9, stop_when=lambda c, it: it == 2)
    assert out.stopped and out.iterations == 2
    assert not out.is_geodesic


def test_tiny_curve_collapses_immediately(octa):
    out = birkhoff_run(octa, little_loop(octa, 0))
    assert out.kind is OutcomeKind.POINT_COLLAPSE
    assert out.iterations == 0
    assert out.point is not None


@pytest.mark.slow
def test_small_circle_shrinks_to_a_point(sphere, small_circle):
    out = birkhoff_run(sphere, small_circle, max_iter=2000)
    assert out.kind is OutcomeKind.POINT_COLLAPSE
    assert out.length < small_circle.length


def test_geodesic_join_in_a_corridor(octa):
    up, down = face_with(octa, PX, PY, PZ), face_with(octa, PX, PY, NZ)
    p, q = SurfacePoint(up, CENTRE), SurfacePoint(down, CENTRE)
    path = geodesic_join(octa, p, q, [up, down])
    assert path.length == pytest.approx(math.sqrt(2.0) / math.sqrt(3.0))
    with pytest.raises(CorridorMiss):
        geodesic_join(octa, p, q, [down, up])
    widened = geodesic_join(octa, p, q, [down, up], widen=True)
    assert widened.length == pytest.approx(path.length, rel=1e-6)


def polar_diamond(mesh):
    """Loop through the midpoints of the four edges at PZ."""
    ring = [PX, PY, NX, NY]
    pts = [(mesh.vertices[v] + mesh.vertices[PZ]) / 2 for v in ring]
    faces = [face_with(mesh, u, w, PZ) for u, w in zip(ring, ring[1:] + ring[:1])]
    return ClosedCurve(np.array(pts), np.array(faces))


def test_last_intersection(octa):
    equator = edge_loop(octa, [PX, PY, NX, NY], PZ)
    meridian = edge_loop(octa, [PZ, PX, NZ, NX], PY)
    diamond = polar_diamond(octa)
    loop = little_loop(octa, face_with(octa, PX, PY, PZ))
    trace = HomotopyTrace()
    for c in (diamond, diamond, loop):
        trace.append(c)
    assert last_intersection_index(octa, trace, meridian) == 1
    assert track_last_intersection(octa, trace, meridian) is diamond
    with pytest.raises(NeverSeparates):
        last_intersection_index(octa, [loop, equator], meridian)
    with pytest.raises(NeverIntersects):
        last_intersection_index(octa, [loop, loop], meridian)


def test_tracked_curve_must_be_shorter_than_the_cycle(octa):
    equator = edge_loop(octa, [PX, PY, NX, NY], PZ)
    meridian = edge_loop(octa, [PZ, PX, NZ, NX], PY)
    loop = little_loop(octa, face_with(octa, PX, PY, PZ))
    assert equator.length == pytest.approx(meridian.length)
    with pytest.raises(PreconditionError):
        track_last_intersection(octa, [equator, equator, loop], meridian)


def test_trace_winding(octa):
    north, south = face_with(octa, PX, PY, PZ), face_with(octa, PX, PY, NZ)
    p, far = SurfacePoint(north, CENTRE), SurfacePoint(south, CENTRE)
    equator = edge_loop(octa, [PX, PY, NX, NY], PZ)
    around = little_loop(octa, north)
    elsewhere = little_loop(octa, face_with(octa, NX, PY, PZ))
    assert trace_winding_constant(octa, [equator, around], p, far)
    assert not trace_winding_constant(octa, [equator, elsewhere], p, far)


def hexagonal_belt(mesh):
    """Closed geodesic through the six edge midpoints on the plane x + y + z = 0."""
    ends = [(PX, NY), (PX, NZ), (PY, NZ), (PY, NX), (PZ, NX), (PZ, NY)]
    pts = [(mesh.vertices[a] + mesh.vertices[b]) / 2 for a, b in ends]
    faces = [face_with(mesh, *{*e, *f}) for e, f in zip(ends, ends[1:] + ends[:1])]
    return ClosedCurve(np.array(pts), np.array(faces))


def test_hexagonal_belt_is_a_fixed_point(octa):
    belt = hexagonal_belt(octa)
    assert belt.length == pytest.approx(3 * math.sqrt(2.0))
    assert geodesic_residual(octa, belt) == pytest.approx(0.0, abs=1e-9)
    stepped = birkhoff_step(octa, belt, 8)
    assert stepped.length <= belt.length + 1e-12
    assert stepped.length == pytest.approx(belt.length, rel=1e-6)
    assert np.abs(stepped.points.sum(axis=1)).max() < 1e-8
    out = birkhoff_run(octa, belt)
    assert out.kind is OutcomeKind.GEODESIC
    assert out.iterations == 0


def test_stalled_run_reports_its_residual(sphere, small_circle):
    out = birkhoff_run(sphere, small_circle, geodesic_tol=1e-9, max_iter=2)
    assert out.residual == pytest.approx(geodesic_residual(sphere, out.curve))
    assert out.residual > 0


@pytest.mark.slow
def test_great_circle_lengths_never_grow(sphere):
    field = distance_field(sphere, SurfacePoint(0, CENTRE), steiner=2)
    circle = level_set(field, math.pi / 2)[0].curve
    out = birkhoff_run(sphere, circle, geodesic_tol=1e-9, max_iter=10, record_trace=True)
    lengths = out.trace.lengths
    assert all(a >= b - 1e-12 for a, b in zip(lengths, lengths[1:]))
    assert lengths[-1] == pytest.approx(2 * math.pi, rel=0.05)
