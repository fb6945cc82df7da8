"""Request/response models for the simulation service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class PoseOut(BaseModel):
    x: float
    y: float
    theta: float


class Artifact(BaseModel):
    """One output file. `data` is inline content (omitted when the server
    wrote the file to a local output directory instead)."""

    name: str
    encoding: Literal["text", "base64"]
    data: Optional[str] = None


class SimulateRequest(BaseModel):
    scenario: str = Field(description="scenario file content, TOML")
    seed: Optional[int] = Field(default=None, description="overrides sim.seed")
    map_format: Literal["csv", "pgm", "both"] = "both"
    include_artifacts: bool = True


class SimulateResponse(BaseModel):
    reached_goal: bool
    steps: int
    failure_reason: Optional[str] = None
    final_true_pose: PoseOut
    final_odom_pose: PoseOut
    artifacts: list[Artifact] = []


class FilterRequest(BaseModel):
    """Echo-delay stream; null entries are missed pings."""

    echoes: list[Optional[float]]
    g: float = 0.9
    dt_hysteresis: float = 0.01
    max_time: float = 0.05
    miss_reset_count: int = 10
    ping_period: float = 0.050


class FilterResponse(BaseModel):
    classifications: list[str]


class MapConvertRequest(BaseModel):
    data: str
    encoding: Literal["text", "base64"] = "text"
    from_format: Literal["csv", "pgm"]
    to_format: Literal["csv", "pgm"]


class MapConvertResponse(BaseModel):
    data: str
    encoding: Literal["text", "base64"]


class ValidateRequest(BaseModel):
    scenario: str


class ValidateResponse(BaseModel):
    valid: bool
    normalized: Optional[str] = None
    error: Optional[str] = None
