#!/usr/bin/env python3
"""
Tests for the Closed Geodesic MCP Server tools
"""

import math

import pytest

from geodesic_mcp_server import (
    SERVICE_NAME,
    TOOLS,
    bracket,
    check_mesh,
    generate_mesh,
    health_check,
    verify_mesh,
)
from test_mesh import TETRA_FACES, TETRA_VERTICES


def test_health_check():
    result = health_check()
    assert result["success"] and result["status"] == "healthy"
    assert result["service"] == SERVICE_NAME
    assert set(result["available_tools"]) == set(TOOLS)
    assert "icosphere" in result["generators"]
    assert "scikit_image" in result["optional_stack"]


def test_generate_then_check():
    made = generate_mesh("icosphere", {"subdiv": 1})
    assert made["success"]
    assert made["diagnostics"]["faces"] == 80
    checked = check_mesh(made["off"], "OFF")
    assert checked["success"]
    assert checked["diagnostics"]["eulerCharacteristic"] == 2


def test_unknown_kind_and_bad_params():
    unknown = generate_mesh("torus")
    assert not unknown["success"] and unknown["error_type"] == "ValueError"
    bad = generate_mesh("icosphere", {"subdiv": 12})
    assert not bad["success"] and bad["error_type"] == "SizeError"
    typo = generate_mesh("icosphere", {"subdivisions": 2})
    assert not typo["success"] and typo["error_type"] == "TypeError"


def test_open_mesh_is_an_error_payload():
    lines = ["OFF", "4 3 0"] + [" ".join(map(str, v)) for v in TETRA_VERTICES]
    lines += ["3 " + " ".join(map(str, f)) for f in TETRA_FACES[:3]]
    result = check_mesh("\n".join(lines) + "\n")
    assert not result["success"]
    assert result["error_type"] == "TopologyError"
    assert "timestamp" in result


def test_bracket():
    result = bracket(4 * math.pi, 2 * math.pi)
    assert result["success"]
    assert (result["n"], result["N"]) == (3, 4)
    assert result["rotman_bound"] == pytest.approx(4 * math.sqrt(8 * math.pi))
    too_long = bracket(1.0, 100.0)
    assert not too_long["success"] and too_long["error_type"] == "RotmanViolated"


@pytest.mark.slow
def test_verify_round_sphere():
    made = generate_mesh("icosphere", {"subdiv": 3})
    result = verify_mesh(made["off"])
    assert result["success"], result.get("error")
    assert result["report"]["case"] == "LongSphere"


if __name__ == "__main__":
    print("🔬 Testing Closed Geodesic MCP Server")
    print("=" * 50)
    print(f"🛠️  Tools: {', '.join(TOOLS)}")
    status = health_check()
    print(f"💚 Health: {status['status']} ({status['version']})")
    print(f"📐 Bracket for the unit sphere: {bracket(4 * math.pi, 2 * math.pi)}")
    print("=" * 50)
