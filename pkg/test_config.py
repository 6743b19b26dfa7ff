"""
Tests for settings loading and error payloads.
"""

import pytest

from config import Settings, load_settings, log_level
from errors import GeodesicError, MeshError, PreconditionError, SolverError, TopologyError
from mesh import generate_icosphere


def test_defaults():
    s = load_settings()
    assert s == Settings()
    assert s.seeds == 4 and s.slices == 64
    assert s.public()["geodesic_tol"] == pytest.approx(0.03)


def test_environment_then_overrides(monkeypatch):
    monkeypatch.setenv("GEODESIC_SEEDS", "6")
    monkeypatch.setenv("GEODESIC_GEODESIC_TOL", "0.1")
    s = load_settings({"seeds": 8, "slices": None})
    assert s.seeds == 8
    assert s.geodesic_tol == pytest.approx(0.1)
    assert s.slices == 64


def test_invalid_values_are_rejected(monkeypatch):
    with pytest.raises(ValueError):
        load_settings({"slices": 2})
    with pytest.raises(ValueError):
        load_settings({"no_such_field": 1})
    monkeypatch.setenv("GEODESIC_MAX_ITER", "lots")
    with pytest.raises(ValueError):
        load_settings()


def test_collapse_tolerance():
    sphere = generate_icosphere(1)
    assert Settings().collapse_tol_for(sphere) == pytest.approx(3.0 * sphere.min_edge)
    assert Settings(collapse_tol=0.25).collapse_tol_for(sphere) == 0.25


def test_continuity_bound_scales_with_edges(monkeypatch):
    sphere = generate_icosphere(1)
    assert Settings().continuity_bound_for(sphere) == pytest.approx(4.0 * sphere.max_edge)
    monkeypatch.setenv("GEODESIC_CONTINUITY_FACTOR", "2.5")
    monkeypatch.setenv("GEODESIC_LOOP_ITERS", "50")
    s = load_settings()
    assert s.continuity_bound_for(sphere) == pytest.approx(2.5 * sphere.max_edge)
    assert s.loop_iters == 50
    with pytest.raises(ValueError):
        load_settings({"continuity_factor": 0.0})


def test_log_level(monkeypatch):
    monkeypatch.setenv("GEODESIC_LOG_LEVEL", "debug")
    assert log_level() == 10
    monkeypatch.setenv("GEODESIC_LOG_LEVEL", "nonsense")
    assert log_level() == 20


def test_error_payloads():
    exc = TopologyError("boundary edge", {"edge": [0, 1]})
    assert isinstance(exc, MeshError) and isinstance(exc, GeodesicError)
    assert exc.to_payload() == {"success": False, "error": "boundary edge",
                                "error_type": "TopologyError", "details": {"edge": [0, 1]}}
    assert isinstance(PreconditionError("x"), SolverError)
    assert PreconditionError("x").details == {}
