"""Service operations behind the HTTP routes.

These functions are transport-free: the FastAPI app maps their ValueErrors
to 400 responses, and the CLI calls them in-process for local work. Bad
input raises ValueError (or a subclass); anything else is a bug.
"""

from __future__ import annotations

import base64
import tempfile
from pathlib import Path

from ..mapping import load_map, save_map
from ..motion_filter import FilterParams, classify_stream
from ..scenario import ScenarioError, load_scenario, normalize_scenario
from ..sim import run
from .schemas import (Artifact, FilterRequest, FilterResponse,
                      MapConvertRequest, MapConvertResponse, PoseOut,
                      SimulateRequest, SimulateResponse, ValidateRequest,
                      ValidateResponse)


def _artifact_from_file(path: Path) -> Artifact:
    if path.suffix == ".pgm":
        return Artifact(name=path.name, encoding="base64",
                        data=base64.b64encode(path.read_bytes()).decode("ascii"))
    return Artifact(name=path.name, encoding="text",
                    data=path.read_text(encoding="ascii"))


def _artifact_names(directory: Path) -> list[Path]:
    maps = sorted(directory.glob("global_map_*.*"),
                  key=lambda p: (int(p.stem.rsplit("_", 1)[1]), p.suffix))
    traj = directory / "trajectory.csv"
    return maps + ([traj] if traj.exists() else [])


def simulate(req: SimulateRequest, output_dir=None) -> SimulateResponse:
    """Run a scenario. With `output_dir`, artifacts land there and the
    response lists their names; otherwise they come back inline."""
    scenario = load_scenario(req.scenario)
    if req.seed is not None:
        scenario = scenario.with_seed(req.seed)
        scenario.validate()
    if output_dir is not None:
        result = run(scenario, output_dir=output_dir, map_format=req.map_format)
        artifacts = [Artifact(name=p.name,
                              encoding="base64" if p.suffix == ".pgm" else "text")
                     for p in _artifact_names(Path(output_dir))]
    else:
        with tempfile.TemporaryDirectory() as tmp:
            result = run(scenario, output_dir=tmp, map_format=req.map_format)
            artifacts = []
            if req.include_artifacts:
                artifacts = [_artifact_from_file(p)
                             for p in _artifact_names(Path(tmp))]
    final_true = result.true_trajectory[-1]
    final_odom = result.odom_trajectory[-1]
    return SimulateResponse(
        reached_goal=result.reached_goal,
        steps=result.steps,
        failure_reason=result.failure_reason,
        final_true_pose=PoseOut(x=final_true.x, y=final_true.y,
                                theta=final_true.theta),
        final_odom_pose=PoseOut(x=final_odom.x, y=final_odom.y,
                                theta=final_odom.theta),
        artifacts=artifacts)


def run_filter(req: FilterRequest) -> FilterResponse:
    params = FilterParams(g=req.g, dt_hysteresis=req.dt_hysteresis,
                          max_time=req.max_time,
                          miss_reset_count=req.miss_reset_count,
                          ping_period=req.ping_period)
    return FilterResponse(
        classifications=[str(c) for c in classify_stream(req.echoes, params)])


def convert_map(req: MapConvertRequest) -> MapConvertResponse:
    if req.encoding == "base64":
        raw = base64.b64decode(req.data)
    else:
        raw = req.data.encode("ascii")
    with tempfile.TemporaryDirectory() as tmp:
        src = Path(tmp) / f"in.{req.from_format}"
        dst = Path(tmp) / f"out.{req.to_format}"
        src.write_bytes(raw)
        save_map(load_map(src), dst)
        out = dst.read_bytes()
    if req.to_format == "pgm":
        return MapConvertResponse(data=base64.b64encode(out).decode("ascii"),
                                  encoding="base64")
    return MapConvertResponse(data=out.decode("ascii"), encoding="text")


def validate_scenario(req: ValidateRequest) -> ValidateResponse:
    try:
        scenario = load_scenario(req.scenario)
    except ScenarioError as e:
        return ValidateResponse(valid=False, error=str(e))
    return ValidateResponse(valid=True, normalized=normalize_scenario(scenario))
