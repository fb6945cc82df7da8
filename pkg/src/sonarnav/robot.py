"""Differential-drive kinematics and encoder odometry.

Ground truth integrates the unicycle model exactly (arc motion, not Euler),
so step size never enters the accuracy of a rollout. Odometry corrupts the
per-step displacement the way encoders do: a multiplicative error on distance
travelled and an additive error on heading change that scales with the turn.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def wrap_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    w = math.remainder(theta, math.tau)
    if w <= -math.pi:
        w += math.tau
    return w


@dataclass(frozen=True)
class Pose:
    """Position and heading of the robot reference point in the global frame."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)
                and math.isfinite(self.theta)):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class OdometryParams:
    trans_noise_sigma: float = 0.01  # fraction of distance travelled
    rot_noise_sigma: float = 0.01    # rad of error per rad turned

    def validate(self) -> None:
        if self.trans_noise_sigma < 0.0 or self.rot_noise_sigma < 0.0:
            raise ValueError("odometry noise sigmas must be nonnegative")


def step_displacement(pose: Pose, dist: float, dtheta: float) -> Pose:
    """Advance a pose along an arc of length `dist` turning `dtheta` total.

    The arc is evaluated in the product form
    dist*sinc(dtheta/2) * (cos, sin)(theta + dtheta/2), which degrades
    gracefully into the straight-line formula for arbitrarily small turns
    instead of amplifying the cancellation in sin(theta+dtheta) - sin(theta).
    """
    if dtheta == 0.0:
        x = pose.x + dist * math.cos(pose.theta)
        y = pose.y + dist * math.sin(pose.theta)
        return Pose(x, y, pose.theta)
    h = dtheta / 2.0
    chord = dist * (math.sin(h) / h)
    x = pose.x + chord * math.cos(pose.theta + h)
    y = pose.y + chord * math.sin(pose.theta + h)
    return Pose(x, y, pose.theta + dtheta)


def step_kinematics(pose: Pose, v: float, omega: float, dt: float) -> Pose:
    """Advance a unicycle pose by one command interval, exactly."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return step_displacement(pose, v * dt, omega * dt)


def odometry_step(true_displacement: tuple[float, float], params: OdometryParams,
                  rng: np.random.Generator) -> tuple[float, float]:
    """Corrupt one (distance, heading-change) increment with encoder noise."""
    dd, dth = true_displacement
    eps_t = params.trans_noise_sigma * rng.standard_normal()
    eps_r = params.rot_noise_sigma * abs(dth) * rng.standard_normal()
    return dd * (1.0 + eps_t), dth + eps_r
