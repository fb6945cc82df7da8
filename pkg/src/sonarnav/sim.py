"""Navigation loop: sweep, map, plan, move, repeat until the goal.

The robot sweeps before it first moves, folds the sweep into a fresh
robot-centered local map, fuses that into the global map, and plans an
initial path. From then on it pursues waypoints with a rotate-then-drive
controller; every `sweep_every` control steps it sweeps again, refreshes the
maps, stores the global map to disk, and replans.

Mapping and planning run entirely off the dead-reckoned odometry pose;
ground truth is recorded only for evaluation. Runs are reproducible: one
master seed derives independent sensor and odometry streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .mapping import (OccupancyGrid, fuse_into_global, new_grid, save_map,
                      update_from_sweep)
from .planner import plan_path
from .robot import Pose, odometry_step, step_displacement, wrap_angle
from .scenario import Scenario
from .sensor import sweep

# The odometry noise stream is decorrelated from the sensor stream by
# seeding it with the master seed XOR this constant (the 64-bit golden
# ratio, a conventional stream-splitting value).
ODOM_SEED_XOR = 0x9E3779B97F4A7C15

# Heading error below which the controller drives instead of spinning.
HEADING_LOCK = 0.05  # rad
TURN_RATE = 1.0      # rad/s, rotate-in-place speed and omega clamp


@dataclass
class SimResult:
    reached_goal: bool
    steps: int
    true_trajectory: list[Pose]
    odom_trajectory: list[Pose]
    final_global_map: OccupancyGrid
    failure_reason: Optional[str] = None  # local_minimum | step_budget | planner_error
    # Control steps at which sweeps were taken (0 = the pre-move sweep).
    sweep_steps: list[int] = field(default_factory=list)


def pursue_waypoint(pose: Pose, waypoint: tuple[float, float], speed: float,
                    control_dt: float) -> tuple[float, float]:
    """Rotate-then-drive command toward a waypoint.

    A heading error of HEADING_LOCK or more turns in place at TURN_RATE;
    below it the robot drives at `speed` with a proportional turn command
    2*err/control_dt clamped to the turn rate.
    """
    err = wrap_angle(math.atan2(waypoint[1] - pose.y, waypoint[0] - pose.x)
                     - pose.theta)
    if abs(err) >= HEADING_LOCK:
        return 0.0, TURN_RATE if err > 0 else -TURN_RATE
    return speed, min(TURN_RATE, max(-TURN_RATE, 2.0 * err / control_dt))


def make_global_grid(scenario: Scenario) -> OccupancyGrid:
    """Global map covering the world bounds plus a sensor-range margin.

    The margin guarantees every robot-centered local map fits inside, and
    the origin anchors the lattice all local maps align to.
    """
    b = scenario.world.bounds
    res = scenario.grid_resolution
    margin = scenario.sensor.max_range
    width = math.ceil((b.xmax - b.xmin + 2.0 * margin) / res)
    height = math.ceil((b.ymax - b.ymin + 2.0 * margin) / res)
    return new_grid((b.xmin - margin, b.ymin - margin), res, width, height)


def make_local_grid(scenario: Scenario, anchor: OccupancyGrid,
                    pose: Pose) -> OccupancyGrid:
    """Fresh local map: a square covering the sensor disc around the robot,
    snapped onto the anchor grid's lattice so fusion is cell-exact."""
    res = scenario.grid_resolution
    side = math.ceil(2.0 * scenario.sensor.max_range / res)
    ix = math.floor((pose.x - scenario.sensor.max_range - anchor.origin_x) / res)
    iy = math.floor((pose.y - scenario.sensor.max_range - anchor.origin_y) / res)
    return new_grid((anchor.origin_x + ix * res, anchor.origin_y + iy * res),
                    res, side, side)


class _ArtifactWriter:
    def __init__(self, output_dir, map_format: str):
        self.dir = Path(output_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        if map_format not in ("csv", "pgm", "both"):
            raise ValueError(f"unknown map format {map_format!r}")
        self.map_format = map_format

    def save_global(self, grid: OccupancyGrid, k: int) -> None:
        if self.map_format in ("csv", "both"):
            save_map(grid, self.dir / f"global_map_{k}.csv")
        if self.map_format in ("pgm", "both"):
            save_map(grid, self.dir / f"global_map_{k}.pgm")

    def save_trajectory(self, true_traj: list[Pose], odom_traj: list[Pose]) -> None:
        lines = ["step,true_x,true_y,true_theta,odom_x,odom_y,odom_theta"]
        for k, (t, o) in enumerate(zip(true_traj, odom_traj)):
            lines.append(f"{k},{t.x!r},{t.y!r},{t.theta!r},"
                         f"{o.x!r},{o.y!r},{o.theta!r}")
        (self.dir / "trajectory.csv").write_text("\n".join(lines) + "\n",
                                                 encoding="ascii")


def run(scenario: Scenario, output_dir=None, map_format: str = "both") -> SimResult:
    """Execute a scenario to completion.

    Writes `global_map_<k>.csv` / `.pgm` after every fusion and
    `trajectory.csv` at the end when `output_dir` is given. Deterministic:
    identical scenarios and seeds produce bitwise-identical results and
    artifact bytes.
    """
    scenario.validate()
    writer = _ArtifactWriter(output_dir, map_format) if output_dir else None
    sensor_rng = np.random.default_rng(scenario.seed)
    odom_rng = np.random.default_rng(scenario.seed ^ ODOM_SEED_XOR)

    global_grid = make_global_grid(scenario)
    true_pose = scenario.start
    odom_pose = scenario.start
    true_traj = [true_pose]
    odom_traj = [odom_pose]
    sweep_steps: list[int] = []
    goal = scenario.goal
    goal_tol = scenario.planner.goal_tol
    reach_tol = scenario.planner.step_size
    dt = scenario.control_dt
    fusions = 0
    local_grid: Optional[OccupancyGrid] = None

    def result(reached: bool, reason: Optional[str] = None) -> SimResult:
        if writer is not None:
            writer.save_trajectory(true_traj, odom_traj)
        return SimResult(reached, len(true_traj) - 1, true_traj, odom_traj,
                         global_grid, reason, sweep_steps)

    def goal_dist(pose: Pose) -> float:
        return math.hypot(pose.x - goal[0], pose.y - goal[1])

    def sweep_and_fuse(pose: Pose, step: int) -> None:
        nonlocal fusions, local_grid
        local_grid = make_local_grid(scenario, global_grid, pose)
        measurements = sweep(scenario.world, pose, scenario.sensor, sensor_rng)
        update_from_sweep(local_grid, pose, measurements, scenario.sensor,
                          scenario.model)
        fuse_into_global(global_grid, local_grid)
        sweep_steps.append(step)
        if writer is not None:
            writer.save_global(global_grid, fusions)
        fusions += 1

    def replan(pose: Pose):
        grid = global_grid if scenario.replan_map == "global" else local_grid
        try:
            plan = plan_path((pose.x, pose.y), goal, grid, scenario.planner)
        except ValueError:
            return None, "planner_error"
        if plan.failure_reason == "local_minimum":
            return None, "local_minimum"
        if plan.failure_reason is not None:
            return None, "planner_error"
        return plan.waypoints, None

    if goal_dist(odom_pose) <= goal_tol:
        return result(True)

    sweep_and_fuse(odom_pose, 0)
    waypoints, fail = replan(odom_pose)
    if fail is not None:
        return result(False, fail)
    wp_idx = 0

    for step in range(1, scenario.max_sim_steps + 1):
        while (wp_idx < len(waypoints) - 1
               and math.hypot(odom_pose.x - waypoints[wp_idx][0],
                              odom_pose.y - waypoints[wp_idx][1]) <= reach_tol):
            wp_idx += 1
        v, omega = pursue_waypoint(odom_pose, waypoints[wp_idx],
                                   scenario.robot_speed, dt)
        true_pose = step_displacement(true_pose, v * dt, omega * dt)
        dd, dth = odometry_step((v * dt, omega * dt), scenario.odometry, odom_rng)
        odom_pose = step_displacement(odom_pose, dd, dth)
        true_traj.append(true_pose)
        odom_traj.append(odom_pose)
        if goal_dist(odom_pose) <= goal_tol:
            return result(True)
        if step % scenario.sweep_every == 0:
            sweep_and_fuse(odom_pose, step)
            waypoints, fail = replan(odom_pose)
            if fail is not None:
                return result(False, fail)
            wp_idx = 0
    return result(False, "step_budget")
