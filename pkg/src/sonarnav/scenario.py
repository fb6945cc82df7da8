"""Scenario files: the TOML format consumed by the CLI and service.

A scenario bundles everything one simulation needs: world geometry, robot
start and goal, sensor / planner / mapping / odometry parameters, and the
master seed. Only `world.bounds`, `robot.start` and `robot.goal` are
required; every other field carries the package default, so a minimal
scenario is a world plus the two endpoints. Unknown sections or keys are
rejected rather than silently ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import tomli

from .mapping import SonarInverseModel
from .planner import PlannerParams
from .robot import OdometryParams, Pose
from .sensor import SensorParams
from .world import Bounds, Circle, Obstacle, Rect, Segment, World


class ScenarioError(ValueError):
    """Scenario text that does not parse or does not validate."""


@dataclass(frozen=True)
class Scenario:
    world: World
    start: Pose
    goal: tuple[float, float]
    sensor: SensorParams = SensorParams()
    planner: PlannerParams = PlannerParams()
    odometry: OdometryParams = OdometryParams()
    model: SonarInverseModel = SonarInverseModel()
    grid_resolution: float = 0.1
    seed: int = 0
    max_sim_steps: int = 10000
    sweep_every: int = 10
    robot_speed: float = 0.2
    control_dt: float = 0.1
    replan_map: str = "global"

    def validate(self) -> None:
        self.sensor.validate()
        self.planner.validate()
        self.odometry.validate()
        self.model.validate()
        if not self.world.bounds.contains(self.start.x, self.start.y):
            raise ScenarioError("robot.start lies outside world bounds")
        if not self.world.bounds.contains(*self.goal):
            raise ScenarioError("robot.goal lies outside world bounds")
        if self.grid_resolution <= 0.0:
            raise ScenarioError("mapping.resolution must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ScenarioError("sim.seed must be a 64-bit unsigned integer")
        if self.max_sim_steps < 1:
            raise ScenarioError("sim.max_sim_steps must be at least 1")
        if self.sweep_every < 1:
            raise ScenarioError("sim.sweep_every must be at least 1")
        if self.robot_speed <= 0.0:
            raise ScenarioError("robot.speed must be positive")
        if self.control_dt <= 0.0:
            raise ScenarioError("sim.control_dt must be positive")
        if self.replan_map not in ("global", "local"):
            raise ScenarioError("sim.replan_map must be 'global' or 'local'")

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, seed=seed)


# --- parsing helpers ------------------------------------------------------

def _check_keys(table: dict, allowed: set[str], path: str) -> None:
    for key in table:
        if key not in allowed:
            raise ScenarioError(f"unknown field '{path}.{key}'")


def _get_num(table: dict, key: str, default, path: str) -> float:
    v = table.get(key, default)
    if v is None:
        raise ScenarioError(f"missing required field '{path}.{key}'")
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"field '{path}.{key}' must be a number")
    return float(v)

def _get_int(table: dict, key: str, default, path: str) -> int:
    v = table.get(key, default)
    if v is None:
        raise ScenarioError(f"missing required field '{path}.{key}'")
    if isinstance(v, bool) or not isinstance(v, int):
        raise ScenarioError(f"field '{path}.{key}' must be an integer")
    return v

def _get_floats(table: dict, key: str, n: int, path: str) -> list[float]:
    v = table.get(key)
    if v is None:
        raise ScenarioError(f"missing required field '{path}.{key}'")
    if not isinstance(v, list) or len(v) != n or any(
            isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
        raise ScenarioError(f"field '{path}.{key}' must be a list of {n} numbers")
    return [float(x) for x in v]


def _parse_obstacle(table: dict, path: str) -> Obstacle:
    kind = table.get("kind")
    if kind == "segment":
        _check_keys(table, {"kind", "points"}, path)
        x1, y1, x2, y2 = _get_floats(table, "points", 4, path)
        ob = Segment(x1, y1, x2, y2)
    elif kind == "circle":
        _check_keys(table, {"kind", "center", "radius"}, path)
        cx, cy = _get_floats(table, "center", 2, path)
        ob = Circle(cx, cy, _get_num(table, "radius", None, path))
    elif kind == "rect":
        _check_keys(table, {"kind", "bounds"}, path)
        xmin, ymin, xmax, ymax = _get_floats(table, "bounds", 4, path)
        ob = Rect(xmin, ymin, xmax, ymax)
    else:
        raise ScenarioError(
            f"'{path}.kind' must be 'segment', 'circle' or 'rect'")
    try:
        ob.validate()
    except ValueError as e:
        raise ScenarioError(f"{path}: {e}") from e
    return ob


def parse_world(table: dict) -> World:
    """Build a World from a decoded [world] table."""
    _check_keys(table, {"bounds", "obstacles"}, "world")
    xmin, ymin, xmax, ymax = _get_floats(table, "bounds", 4, "world")
    bounds = Bounds(xmin, ymin, xmax, ymax)
    raw = table.get("obstacles", [])
    if not isinstance(raw, list):
        raise ScenarioError("'world.obstacles' must be an array of tables")
    obstacles = tuple(_parse_obstacle(ob, f"world.obstacles[{i}]")
                      for i, ob in enumerate(raw))
    try:
        return World(bounds=bounds, obstacles=obstacles)
    except ValueError as e:
        raise ScenarioError(f"world: {e}") from e


def load_world(text: str) -> World:
    """Parse the [world] section out of scenario-format TOML text."""
    data = _decode(text)
    if "world" not in data:
        raise ScenarioError("missing required section [world]")
    return parse_world(data["world"])


def _decode(text: str) -> dict:
    try:
        return tomli.loads(text)
    except tomli.TOMLDecodeError as e:
        raise ScenarioError(f"scenario is not valid TOML: {e}") from e


def load_scenario(text: str) -> Scenario:
    """Parse and fully validate scenario TOML text."""
    data = _decode(text)
    for section in data:
        if section not in ("world", "robot", "sensor", "planner",
                           "mapping", "sim"):
            raise ScenarioError(f"unknown section [{section}]")
    if "world" not in data:
        raise ScenarioError("missing required section [world]")
    if "robot" not in data:
        raise ScenarioError("missing required section [robot]")
    world = parse_world(data["world"])

    rb = data["robot"]
    _check_keys(rb, {"start", "goal", "speed", "trans_noise_sigma",
                     "rot_noise_sigma"}, "robot")
    sx, sy, sth = _get_floats(rb, "start", 3, "robot")
    gx, gy = _get_floats(rb, "goal", 2, "robot")
    odometry = OdometryParams(
        trans_noise_sigma=_get_num(rb, "trans_noise_sigma", 0.01, "robot"),
        rot_noise_sigma=_get_num(rb, "rot_noise_sigma", 0.01, "robot"))
    robot_speed = _get_num(rb, "speed", 0.2, "robot")

    sn = data.get("sensor", {})
    _check_keys(sn, {"max_range", "sweep_min", "sweep_max", "beam_count",
                     "speed_of_sound", "pulse_frequency", "noise_sigma",
                     "dropout_prob", "ping_period"}, "sensor")
    d = SensorParams()
    sensor = SensorParams(
        max_range=_get_num(sn, "max_range", d.max_range, "sensor"),
        sweep_min=_get_num(sn, "sweep_min", d.sweep_min, "sensor"),
        sweep_max=_get_num(sn, "sweep_max", d.sweep_max, "sensor"),
        beam_count=_get_int(sn, "beam_count", d.beam_count, "sensor"),
        speed_of_sound=_get_num(sn, "speed_of_sound", d.speed_of_sound, "sensor"),
        pulse_frequency=_get_num(sn, "pulse_frequency", d.pulse_frequency, "sensor"),
        noise_sigma=_get_num(sn, "noise_sigma", d.noise_sigma, "sensor"),
        dropout_prob=_get_num(sn, "dropout_prob", d.dropout_prob, "sensor"),
        ping_period=_get_num(sn, "ping_period", d.ping_period, "sensor"))

    pl = data.get("planner", {})
    _check_keys(pl, {"k_att", "k_rep", "rho0", "step_size", "goal_tol",
                     "max_steps", "occ_threshold", "min_progress"}, "planner")
    p = PlannerParams()
    planner = PlannerParams(
        k_att=_get_num(pl, "k_att", p.k_att, "planner"),
        k_rep=_get_num(pl, "k_rep", p.k_rep, "planner"),
        rho0=_get_num(pl, "rho0", p.rho0, "planner"),
        step_size=_get_num(pl, "step_size", p.step_size, "planner"),
        goal_tol=_get_num(pl, "goal_tol", p.goal_tol, "planner"),
        max_steps=_get_int(pl, "max_steps", p.max_steps, "planner"),
        occ_threshold=_get_num(pl, "occ_threshold", p.occ_threshold, "planner"),
        min_progress=_get_num(pl, "min_progress", p.min_progress, "planner"))

    mp = data.get("mapping", {})
    _check_keys(mp, {"resolution", "l_occ", "l_free", "cone_half_angle",
                     "occupied_band", "mode"}, "mapping")
    m = SonarInverseModel()
    resolution = _get_num(mp, "resolution", 0.1, "mapping")
    mode = mp.get("mode", m.mode)
    if not isinstance(mode, str):
        raise ScenarioError("field 'mapping.mode' must be a string")
    model = SonarInverseModel(
        cone_half_angle=_get_num(mp, "cone_half_angle", m.cone_half_angle, "mapping"),
        l_occ=_get_num(mp, "l_occ", m.l_occ, "mapping"),
        l_free=_get_num(mp, "l_free", m.l_free, "mapping"),
        # The occupied band defaults to one cell of the configured grid.
        occupied_band=_get_num(mp, "occupied_band", resolution, "mapping"),
        mode=mode)

    sm = data.get("sim", {})
    _check_keys(sm, {"seed", "max_sim_steps", "sweep_every", "control_dt",
                     "replan_map"}, "sim")
    replan_map = sm.get("replan_map", "global")
    if not isinstance(replan_map, str):
        raise ScenarioError("field 'sim.replan_map' must be a string")
    scenario = Scenario(
        world=world,
        start=Pose(sx, sy, sth),
        goal=(gx, gy),
        sensor=sensor,
        planner=planner,
        odometry=odometry,
        model=model,
        grid_resolution=resolution,
        seed=_get_int(sm, "seed", 0, "sim"),
        max_sim_steps=_get_int(sm, "max_sim_steps", 10000, "sim"),
        sweep_every=_get_int(sm, "sweep_every", 10, "sim"),
        robot_speed=robot_speed,
        control_dt=_get_num(sm, "control_dt", 0.1, "sim"),
        replan_map=replan_map)
    try:
        scenario.validate()
    except ValueError as e:
        raise ScenarioError(str(e)) from e
    return scenario


def load_scenario_file(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as f:
        return load_scenario(f.read())


# --- normalization --------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, float):
        if v != v or math.isinf(v):
            raise ScenarioError("cannot serialize a non-finite number")
        return repr(v)
    return str(v)


def _fmt_list(vals) -> str:
    return "[" + ", ".join(_fmt(float(v)) for v in vals) + "]"


def normalize_scenario(sc: Scenario) -> str:
    """Render a scenario as canonical TOML with every default made explicit.

    load_scenario(normalize_scenario(sc)) reproduces sc exactly.
    """
    b = sc.world.bounds
    lines = ["[world]", f"bounds = {_fmt_list([b.xmin, b.ymin, b.xmax, b.ymax])}"]
    for ob in sc.world.obstacles:
        lines.append("")
        lines.append("[[world.obstacles]]")
        if isinstance(ob, Segment):
            lines.append('kind = "segment"')
            lines.append(f"points = {_fmt_list([ob.x1, ob.y1, ob.x2, ob.y2])}")
        elif isinstance(ob, Circle):
            lines.append('kind = "circle"')
            lines.append(f"center = {_fmt_list([ob.cx, ob.cy])}")
            lines.append(f"radius = {_fmt(ob.radius)}")
        else:
            lines.append('kind = "rect"')
            lines.append(f"bounds = {_fmt_list([ob.xmin, ob.ymin, ob.xmax, ob.ymax])}")
    sections = [
        ("robot", [("start", _fmt_list([sc.start.x, sc.start.y, sc.start.theta])),
                   ("goal", _fmt_list(sc.goal)),
                   ("speed", _fmt(sc.robot_speed)),
                   ("trans_noise_sigma", _fmt(sc.odometry.trans_noise_sigma)),
                   ("rot_noise_sigma", _fmt(sc.odometry.rot_noise_sigma))]),
        ("sensor", [("max_range", _fmt(sc.sensor.max_range)),
                    ("sweep_min", _fmt(sc.sensor.sweep_min)),
                    ("sweep_max", _fmt(sc.sensor.sweep_max)),
                    ("beam_count", _fmt(sc.sensor.beam_count)),
                    ("speed_of_sound", _fmt(sc.sensor.speed_of_sound)),
                    ("pulse_frequency", _fmt(sc.sensor.pulse_frequency)),
                    ("noise_sigma", _fmt(sc.sensor.noise_sigma)),
                    ("dropout_prob", _fmt(sc.sensor.dropout_prob)),
                    ("ping_period", _fmt(sc.sensor.ping_period))]),
        ("planner", [("k_att", _fmt(sc.planner.k_att)),
                     ("k_rep", _fmt(sc.planner.k_rep)),
                     ("rho0", _fmt(sc.planner.rho0)),
                     ("step_size", _fmt(sc.planner.step_size)),
                     ("goal_tol", _fmt(sc.planner.goal_tol)),
                     ("max_steps", _fmt(sc.planner.max_steps)),
                     ("occ_threshold", _fmt(sc.planner.occ_threshold)),
                     ("min_progress", _fmt(sc.planner.min_progress))]),
        ("mapping", [("resolution", _fmt(sc.grid_resolution)),
                     ("l_occ", _fmt(sc.model.l_occ)),
                     ("l_free", _fmt(sc.model.l_free)),
                     ("cone_half_angle", _fmt(sc.model.cone_half_angle)),
                     ("occupied_band", _fmt(sc.model.occupied_band)),
                     ("mode", _fmt(sc.model.mode))]),
        ("sim", [("seed", _fmt(sc.seed)),
                 ("max_sim_steps", _fmt(sc.max_sim_steps)),
                 ("sweep_every", _fmt(sc.sweep_every)),
                 ("control_dt", _fmt(sc.control_dt)),
                 ("replan_map", _fmt(sc.replan_map))]),
    ]
    for name, fields in sections:
        lines.append("")
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {v}" for k, v in fields)
    return "\n".join(lines) + "\n"
