"""
Pydantic models shared by the CLI, the MCP server and the JSON report.
"""

import hashlib
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class MeshDiagnostics(BaseModel):
    eulerCharacteristic: int
    isClosed: bool
    isOriented: bool
    minAngle: float
    minEdge: float
    maxEdge: float
    area: float
    diameterEstimate: float
    vertices: int
    edges: int
    faces: int


class HypothesisRow(BaseModel):
    name: str
    value: Optional[float] = None
    threshold: float
    held: bool


class RatioRow(BaseModel):
    bound: str
    constant: float
    product_over_area: float
    status: Literal["pass", "fail"]
    applicability: Literal["applicable", "informational"]


class CheckRow(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class GeodesicSummary(BaseModel):
    length: float
    residual: float
    self_crossings: int
    provenance: str
    points: List[List[float]] = Field(default_factory=list)


class VerificationReportModel(BaseModel):
    schemaVersion: int = SCHEMA_VERSION
    mesh: Dict[str, Any]
    area: float
    L1: float
    L2: float
    product: float
    case: str
    hypotheses: List[HypothesisRow] = Field(default_factory=list)
    ratios: List[RatioRow] = Field(default_factory=list)
    checks: List[CheckRow] = Field(default_factory=list)
    distinctness: Dict[str, Any] = Field(default_factory=dict)
    assumptions: List[str] = Field(default_factory=list)
    notes: List[str] = Field(default_factory=list)
    settings: Dict[str, Any] = Field(default_factory=dict)
    timings: Dict[str, float] = Field(default_factory=dict)

    @property
    def all_applicable_pass(self) -> bool:
        rows_ok = all(r.status == "pass" for r in self.ratios if r.applicability == "applicable")
        return rows_ok and all(c.passed for c in self.checks)


def report_json(report: VerificationReportModel, include_timings: bool = True) -> str:
    payload = report.model_dump(mode="json")
    if not include_timings:
        payload.pop("timings", None)
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False)


def deterministic_digest(report: VerificationReportModel) -> str:
    """sha256 of the report with timings removed."""
    return hashlib.sha256(report_json(report, include_timings=False).encode("utf-8")).hexdigest()
