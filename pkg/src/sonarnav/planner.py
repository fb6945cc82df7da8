"""Potential-field path planning over an occupancy grid.

The goal pulls with the gradient of a quadratic bowl; every sufficiently
occupied cell pushes with the classic inverse-distance barrier, cut off
beyond an influence radius. Descent takes fixed-length normalized steps, so
per-step motion is bounded no matter how large the forces get near
obstacles. A window with no net displacement is reported honestly as a
local-minimum failure; there is no randomized escape.

The planner sees only the grid. It never consults the true world geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .mapping import OccupancyGrid, log_odds

# Net-displacement window for the local-minimum detector, in steps.
STALL_WINDOW = 20


@dataclass(frozen=True)
class PlannerParams:
    k_att: float = 1.0
    k_rep: float = 0.5
    rho0: float = 0.5          # m, repulsion influence radius
    step_size: float = 0.05    # m
    goal_tol: float = 0.1      # m
    max_steps: int = 10000
    occ_threshold: float = 0.65
    min_progress: float = 1e-4  # m over STALL_WINDOW steps

    def validate(self) -> None:
        if self.k_att <= 0.0:
            raise ValueError("k_att must be positive")
        if self.k_rep < 0.0:
            raise ValueError("k_rep must be nonnegative")
        if self.rho0 <= 0.0 or self.step_size <= 0.0 or self.goal_tol <= 0.0:
            raise ValueError("rho0, step_size and goal_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if not 0.5 < self.occ_threshold < 1.0:
            raise ValueError("occ_threshold must be in (0.5, 1)")
        if self.min_progress <= 0.0:
            raise ValueError("min_progress must be positive")


@dataclass(frozen=True)
class PlanResult:
    """Waypoints plus an optional failure reason.

    On success the last waypoint is within goal_tol of the goal; on failure
    ("local_minimum" or "step_budget_exhausted") the waypoints are the
    partial path walked before giving up.
    """

    waypoints: list[tuple[float, float]]
    failure_reason: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.failure_reason is None


def attractive_gradient(q: tuple[float, float], goal: tuple[float, float],
                        k_att: float) -> tuple[float, float]:
    """Pull toward the goal: k_att * (goal - q).

    This is the descent direction (negative gradient) of the quadratic
    potential 0.5 * k_att * |q - goal|^2.
    """
    return (k_att * (goal[0] - q[0]), k_att * (goal[1] - q[1]))


def occupied_centers(grid: OccupancyGrid, occ_threshold: float) -> np.ndarray:
    """Centers of all cells the planner treats as obstacle points, shape (N, 2)."""
    mask = grid.cells >= log_odds(occ_threshold)
    iy, ix = np.nonzero(mask)
    return np.column_stack((grid.origin_x + (ix + 0.5) * grid.resolution,
                            grid.origin_y + (iy + 0.5) * grid.resolution))


def _repulsion(q: tuple[float, float], centers: np.ndarray, k_rep: float,
               rho0: float, rho_floor: float) -> tuple[float, float]:
    if len(centers) == 0 or k_rep == 0.0:
        return (0.0, 0.0)
    diff = np.array(q, dtype=np.float64) - centers
    rho = np.hypot(diff[:, 0], diff[:, 1])
    near = (rho <= rho0) & (rho > 0.0)
    if not near.any():
        return (0.0, 0.0)
    rho = rho[near]
    # Magnitude terms are floored to stay finite inside a cell; the direction
    # keeps the true unit vector (q - o) / rho.
    rf = np.maximum(rho, rho_floor)
    coef = k_rep * (1.0 / rf - 1.0 / rho0) / (rf * rf * rho)
    force = (coef[:, None] * diff[near]).sum(axis=0)
    return (float(force[0]), float(force[1]))


def repulsive_gradient(q: tuple[float, float], grid: OccupancyGrid,
                       params: PlannerParams) -> tuple[float, float]:
    """Push away from occupied cells.

    Sum over obstacle cell centers o within rho0 of q of
    k_rep * (1/rho - 1/rho0) * (1/rho^2) * (q - o)/rho; zero beyond rho0.
    Distances are floored at half a cell to stay finite inside a cell.
    """
    if not (math.isfinite(q[0]) and math.isfinite(q[1])):
        raise ValueError("query point must be finite")
    return _repulsion(q, occupied_centers(grid, params.occ_threshold),
                      params.k_rep, params.rho0, grid.resolution / 2.0)


def plan_path(start: tuple[float, float], goal: tuple[float, float],
              grid: OccupancyGrid, params: PlannerParams) -> PlanResult:
    """Gradient-descent a path from start to within goal_tol of goal.

    Steps are step_size long (shorter on final approach), in the direction
    of the combined attractive and repulsive force. Fails when the step
    budget runs out or net displacement over the last STALL_WINDOW steps
    drops below min_progress.
    """
    params.validate()
    for name, p in (("start", start), ("goal", goal)):
        ix, iy = grid.world_to_cell(p[0], p[1])
        if not grid.in_bounds(ix, iy):
            raise ValueError(f"{name} lies outside the grid extent")
        if grid.cells[iy, ix] >= log_odds(params.occ_threshold):
            raise ValueError(f"{name} lies inside an occupied cell")

    centers = occupied_centers(grid, params.occ_threshold)
    rho_floor = grid.resolution / 2.0
    q = (float(start[0]), float(start[1]))
    waypoints = [q]
    for _ in range(params.max_steps):
        dist_goal = math.hypot(q[0] - goal[0], q[1] - goal[1])
        if dist_goal <= params.goal_tol:
            return PlanResult(waypoints)
        fx, fy = attractive_gradient(q, goal, params.k_att)
        rx, ry = _repulsion(q, centers, params.k_rep, params.rho0, rho_floor)
        fx, fy = fx + rx, fy + ry
        norm = math.hypot(fx, fy)
        if norm > 1e-12:
            step = min(params.step_size, dist_goal)
            q = (q[0] + step * fx / norm, q[1] + step * fy / norm)
        waypoints.append(q)
        if len(waypoints) > STALL_WINDOW:
            ref = waypoints[-1 - STALL_WINDOW]
            if math.hypot(q[0] - ref[0], q[1] - ref[1]) < params.min_progress:
                return PlanResult(waypoints, "local_minimum")
    if math.hypot(q[0] - goal[0], q[1] - goal[1]) <= params.goal_tol:
        return PlanResult(waypoints)
    return PlanResult(waypoints, "step_budget_exhausted")
