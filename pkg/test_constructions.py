"""
Tests for the covering arithmetic, sweepouts, offsets and the degree check.
"""

import math

import numpy as np
import pytest

from birkhoff import OutcomeKind, geodesic_residual
from config import Settings
from constructions import (
    MIN_SLICES,
    CaseLabel,
    assemble_sweepout,
    bracket_n,
    covering_N,
    long_sphere_candidate,
    minmax_over_sweepout,
    noncontractibility_check,
    perturb_offside,
    point_curve,
    random_surface_points,
    rotman_bound,
    starfish_long_candidate,
    starfish_short_sweepout_xy,
    starfish_short_sweepout_z,
    sweepout_from_distance,
)
from curves import SurfacePoint, complement_regions, is_distinct, region_containing, self_intersections
from errors import ContinuityLost, PreconditionError, RotmanViolated
from harness import GeodesicRecord, case_analysis, classify_geodesic, count_self_crossings, find_shortest_geodesic
from mesh import generate_capsule, generate_icosphere, generate_starfish
from metric import distance_field, farthest_point, level_set

CENTRE = (1 / 3, 1 / 3, 1 / 3)


@pytest.fixture(scope="module")
def sphere():
    return generate_icosphere(2)


@pytest.fixture(scope="module")
def source():
    return SurfacePoint(0, CENTRE)


@pytest.fixture(scope="module")
def sweepout(sphere, source):
    return sweepout_from_distance(sphere, source, slices=MIN_SLICES, steiner=2)


def test_bracket_round_sphere():
    area, L1 = 4 * math.pi, 2 * math.pi
    assert rotman_bound(area) == pytest.approx(4 * math.sqrt(8 * math.pi))
    n = bracket_n(area, L1)
    assert n == 3
    assert covering_N(n) == 4


def test_bracket_brackets():
    rng = np.random.default_rng(7)
    bound = rotman_bound(2.0)
    for L1 in rng.uniform(0.01, 1.0, size=50) * bound:
        n = bracket_n(2.0, L1)
        assert bound / (n + 1) < L1 <= bound / n
    assert bracket_n(2.0, bound) == 1


def test_bracket_rejects_long_geodesics():
    with pytest.raises(RotmanViolated):
        bracket_n(1.0, rotman_bound(1.0) * 1.01)
    with pytest.raises(RotmanViolated):
        bracket_n(1.0, 0.0)


def test_covering_count():
    assert [covering_N(n) for n in (1, 2, 3, 7)] == [2, 3, 4, 10]
    with pytest.raises(PreconditionError):
        covering_N(0)


def test_case_labels_are_strings():
    assert CaseLabel("StarfishShortXY") is CaseLabel.STARFISH_SHORT_XY
    assert CaseLabel.LONG_SPHERE == "LongSphere"


def test_point_curve(sphere, source):
    c = point_curve(sphere, source)
    assert c.n == 1 and c.length == 0.0
    assert c.is_point(1e-9)


def test_sweepout_needs_enough_slices(sphere, source):
    with pytest.raises(PreconditionError):
        sweepout_from_distance(sphere, source, slices=10)


def test_distance_sweepout_shape(sphere, sweepout):
    assert len(sweepout.slices) >= MIN_SLICES
    assert sweepout.slices[0].length == 0.0 and sweepout.slices[-1].length == 0.0
    assert sweepout.max_length == pytest.approx(2 * math.pi, rel=0.1)
    assert sweepout.continuity_bound >= 2 * sphere.max_edge
    assert sweepout.violations() == []
    assert len(sweepout.records(sphere)) == len(sweepout.slices)


def test_assembled_sweepout_keeps_its_declared_bound(sphere, source):
    field = distance_field(sphere, source, steiner=2)
    slices = [point_curve(sphere, source)]
    slices += [level_set(field, r)[0].curve for r in (0.5, 1.0, 1.5)]
    s = assemble_sweepout(sphere, slices, "hand-built", {"note": "test"}, bound=1.0)
    assert s.continuity_bound == 1.0
    assert s.violations() == []
    assert s.details["max_gap"] <= 1.0
    assert s.details["note"] == "test"
    assert s.provenance == "hand-built"

    default = assemble_sweepout(sphere, slices, "hand-built")
    assert default.continuity_bound == pytest.approx(Settings().continuity_bound_for(sphere))


def test_jumping_family_is_rejected(sphere, source):
    field = distance_field(sphere, source, steiner=2)
    far, _ = farthest_point(field)
    slices = [point_curve(sphere, source), level_set(field, 0.3)[0].curve,
              level_set(field, 2.8)[0].curve, point_curve(sphere, far)]
    with pytest.raises(ContinuityLost) as info:
        assemble_sweepout(sphere, slices, "jump", bound=0.5)
    assert 1 in info.value.details["transitions"]
    assert all(g > 0.5 for g in info.value.details["gaps"])
    with pytest.raises(ContinuityLost):
        assemble_sweepout(sphere, slices, "jump", settings=Settings(continuity_factor=2.0))


def test_random_points_are_interior(sphere):
    pts = random_surface_points(sphere, np.random.default_rng(1), 20)
    assert len(pts) == 20
    assert all(min(p.bary) > 0 for p in pts)


def test_offset_rejects_sub_resolution_eps(sphere, source):
    field = distance_field(sphere, source, steiner=2)
    gamma = level_set(field, math.pi / 2)[0].curve
    with pytest.raises(PreconditionError):
        perturb_offside(sphere, gamma, np.ones(sphere.n_faces, dtype=bool), 1e-4)


def test_offset_moves_into_the_requested_side(sphere, source):
    field = distance_field(sphere, source, steiner=2)
    gamma = level_set(field, math.pi / 2)[0].curve
    regions = complement_regions(sphere, gamma)
    side = regions[region_containing(regions, source.face)]
    moved = perturb_offside(sphere, gamma, side, 0.4, steiner=2)
    xs = source.position(sphere)
    assert moved.length < gamma.length
    assert np.linalg.norm(moved.points - xs, axis=1).mean() < np.linalg.norm(gamma.points - xs, axis=1).mean()


@pytest.mark.parametrize("build", [starfish_long_candidate, starfish_short_sweepout_z,
                                   starfish_short_sweepout_xy])
def test_figure_eight_constructions_reject_simple_curves(sphere, source, build):
    circle = level_set(distance_field(sphere, source, 2), 1.0)[0].curve
    with pytest.raises(PreconditionError):
        build(sphere, circle, source, source, source, Settings(steiner_per_edge=2))


@pytest.mark.slow
def test_distance_sweepout_has_degree_one(sphere, sweepout):
    assert noncontractibility_check(sphere, sweepout, Settings(steiner_per_edge=2))


@pytest.mark.slow
def test_minmax_on_the_round_sphere(sphere, sweepout):
    result = minmax_over_sweepout(sphere, sweepout, Settings(steiner_per_edge=2, pull_tight_iters=3))
    assert all(a >= b - 1e-12 for a, b in zip(result.widths, result.widths[1:]))
    assert result.width <= sweepout.max_length + 1e-12
    assert result.outcome.length <= result.critical.length + 1e-12


@pytest.fixture(scope="module")
def capsule_case():
    """Thin capsule with its waist as the shortest geodesic."""
    cap = generate_capsule(0.2, 10.0, res=16)
    settings = Settings(steiner_per_edge=2)
    field = distance_field(cap, SurfacePoint.from_vertex(cap, 0), steiner=2)
    waist = level_set(field, field.max / 2)[0].curve
    gamma1 = GeodesicRecord(waist, geodesic_residual(cap, waist), count_self_crossings(cap, waist), "waist")
    return cap, gamma1, case_analysis(cap, gamma1, settings), settings


@pytest.mark.slow
def test_capsule_waist_is_a_long_sphere(capsule_case):
    cap, gamma1, analysis, _ = capsule_case
    assert gamma1.length == pytest.approx(0.4 * math.pi, rel=0.03)
    assert analysis.label is CaseLabel.LONG_SPHERE
    assert not analysis.hypotheses_held


@pytest.mark.slow
def test_long_sphere_candidate_on_the_capsule(capsule_case):
    cap, gamma1, analysis, settings = capsule_case
    outcome = long_sphere_candidate(cap, gamma1.curve, analysis.points["x"], analysis.points["y"], settings)
    assert outcome.is_geodesic
    assert is_distinct(gamma1.curve, outcome.curve)[0]
    assert not outcome.details["hypothesis_held"]
    if "early_exit" in outcome.details:
        # the tube carries a family of circles as long as the waist
        assert outcome.length == pytest.approx(0.4 * math.pi, rel=0.05)
        return
    assert outcome.length == pytest.approx(2 * 10.0 + 2 * math.pi * 0.2, rel=0.05)
    n = bracket_n(cap.area, gamma1.length)
    covering = outcome.details["covering"]
    assert outcome.details["N"] == covering_N(n)
    assert covering["max_length"] < 2 * covering_N(n) * gamma1.length * 1.05


@pytest.fixture(scope="module")
def starfish_case():
    star = generate_starfish(leg_len=5.0, leg_rad=1.0, res=3)
    settings = Settings(steiner_per_edge=2)
    gamma1 = find_shortest_geodesic(star, settings=settings)
    return star, gamma1, case_analysis(star, gamma1, settings), settings


@pytest.mark.slow
def test_starfish_shortest_geodesic_is_a_figure_eight(starfish_case):
    star, gamma1, analysis, settings = starfish_case
    assert gamma1.self_crossings == 1
    assert len(self_intersections(star, gamma1.curve)) == 1
    assert analysis.label in (CaseLabel.STARFISH_ALL_LONG, CaseLabel.STARFISH_SHORT_Z,
                              CaseLabel.STARFISH_SHORT_XY)
    assert set(analysis.points) == {"x", "y", "z"}
    assert classify_geodesic(star, gamma1, settings) is analysis.label


@pytest.mark.slow
def test_starfish_spine_candidate(starfish_case):
    star, gamma1, analysis, settings = starfish_case
    p = analysis.points
    outcome = starfish_long_candidate(star, gamma1.curve, p["x"], p["y"], p["z"], settings)
    assert outcome.kind is not OutcomeKind.POINT_COLLAPSE
    assert outcome.details["sigma_length"] <= outcome.details["budget"] * (1 + settings.mesh_slack)
    assert outcome.length <= outcome.details["sigma_length"] + 1e-9
    assert "distinct" in outcome.details


@pytest.mark.slow
@pytest.mark.parametrize("build", [starfish_short_sweepout_z, starfish_short_sweepout_xy])
def test_starfish_short_sweepouts(starfish_case, build):
    star, gamma1, analysis, settings = starfish_case
    p = analysis.points
    sweep = build(star, gamma1.curve, p["x"], p["y"], p["z"], settings)
    assert sweep.slices[0].length == 0.0 and sweep.slices[-1].length == 0.0
    assert sweep.violations() == []
    assert sweep.continuity_bound >= settings.continuity_bound_for(star)
    assert sweep.max_length > 0
    assert "budget" in sweep.details
