"""
Solver settings.

Defaults live on the Settings model; every field can be overridden from the
environment as GEODESIC_<FIELD> (a .env file is honoured) and then by explicit
overrides coming from CLI flags or tool arguments.
"""

import logging
import os
from typing import Any, Dict, Mapping, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

ENV_PREFIX = "GEODESIC_"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

_dotenv_loaded = False


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    steiner_per_edge: int = Field(3, ge=0, le=16)
    geodesic_tol: float = Field(0.03, gt=0.0)
    collapse_factor: float = Field(3.0, gt=0.0)
    collapse_tol: Optional[float] = Field(None, gt=0.0)
    mesh_slack: float = Field(0.05, ge=0.0, le=1.0)
    max_iter: int = Field(2000, ge=1)
    stall_window: int = Field(50, ge=2)
    seeds: int = Field(4, ge=1)
    slices: int = Field(64, ge=3)
    pull_tight_iters: int = Field(20, ge=0)
    focus: float = Field(0.8, ge=0.0, le=1.0)
    continuity_factor: float = Field(4.0, gt=0.0)
    loop_iters: int = Field(400, ge=1)
    fate_depth: int = Field(40, ge=1)
    fate_iters: int = Field(500, ge=1)
    min_break_points: int = Field(32, ge=4)
    max_break_points: int = Field(4096, ge=4)
    rng_seed: int = 0

    def collapse_tol_for(self, mesh) -> float:
        if self.collapse_tol is not None:
            return float(self.collapse_tol)
        return self.collapse_factor * mesh.min_edge

    def continuity_bound_for(self, mesh) -> float:
        return self.continuity_factor * mesh.max_edge

    def public(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _env_overrides() -> Dict[str, str]:
    values = {}
    for name in Settings.model_fields:
        raw = os.getenv(ENV_PREFIX + name.upper())
        if raw is not None and raw != "":
            values[name] = raw
    return values


def load_settings(overrides: Optional[Mapping[str, Any]] = None) -> Settings:
    """Build Settings from defaults, GEODESIC_* environment variables and overrides."""
    global _dotenv_loaded
    if not _dotenv_loaded:
        load_dotenv()
        _dotenv_loaded = True

    values: Dict[str, Any] = _env_overrides()
    if values:
        logger.debug("settings from environment: %s", sorted(values))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return Settings.model_validate(values)


def log_level() -> int:
    name = os.getenv(ENV_PREFIX + "LOG_LEVEL", "INFO").upper()
    return getattr(logging, name, logging.INFO)
