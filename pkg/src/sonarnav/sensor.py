"""Ultrasonic sensor model.

A measurement cycle pings at a fixed rate and converts round-trip travel time
to distance through the speed of sound. A sweep fans `beam_count` ideal rays
over the sensor's angular range relative to the robot heading; hits carry
additive Gaussian range noise and may drop out entirely. The beam is treated
as an ideal ray here; the acoustic cone only matters to the map update.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .robot import Pose
from .world import World, ray_cast

SPEED_OF_SOUND = 343.0  # m/s, dry air at 20 C

# Range noise is clamped to stay strictly positive after extreme draws.
_MIN_RANGE = 1e-9


@dataclass(frozen=True)
class SensorParams:
    max_range: float = 3.0
    sweep_min: float = -math.pi / 2
    sweep_max: float = math.pi / 2
    beam_count: int = 181
    speed_of_sound: float = SPEED_OF_SOUND
    pulse_frequency: float = 40000.0  # informational only
    noise_sigma: float = 0.0
    dropout_prob: float = 0.0
    ping_period: float = 0.050

    def validate(self) -> None:
        if self.max_range <= 0.0:
            raise ValueError("max_range must be positive")
        if self.sweep_min >= self.sweep_max:
            raise ValueError("sweep_min must be below sweep_max")
        if self.speed_of_sound <= 0.0:
            raise ValueError("speed_of_sound must be positive")
        if self.beam_count < 1:
            raise ValueError("beam_count must be at least 1")
        if not 0.0 <= self.dropout_prob <= 1.0:
            raise ValueError("dropout_prob must be in [0, 1]")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be nonnegative")
        if self.ping_period <= 0.0:
            raise ValueError("ping_period must be positive")


@dataclass(frozen=True)
class EchoMeasurement:
    """One beam result: bearing relative to the robot X axis, echo time if any."""

    bearing: float
    echo_time: Optional[float] = None


def echo_time_from_distance(d: float, c: float = SPEED_OF_SOUND) -> float:
    """Round-trip travel time for an obstacle at distance d."""
    if d < 0.0:
        raise ValueError("distance must be nonnegative")
    if c <= 0.0:
        raise ValueError("speed of sound must be positive")
    return 2.0 * d / c


def distance_from_echo_time(t: float, c: float = SPEED_OF_SOUND) -> float:
    """Obstacle distance for a measured round-trip time t."""
    if t < 0.0:
        raise ValueError("echo time must be nonnegative")
    if c <= 0.0:
        raise ValueError("speed of sound must be positive")
    return c * t / 2.0


def sweep_bearings(params: SensorParams) -> np.ndarray:
    """Beam bearings, evenly spaced over the sweep range, endpoints included."""
    if params.beam_count == 1:
        return np.array([0.0])
    return np.linspace(params.sweep_min, params.sweep_max, params.beam_count)


def sweep(world: World, pose: Pose, params: SensorParams,
          rng: np.random.Generator) -> list[EchoMeasurement]:
    """Fan of range measurements taken from `pose`.

    Each beam ray-casts at heading + bearing; a hit distance gets Gaussian
    noise, is clamped into (0, max_range], and converts to a round-trip echo
    time. With probability dropout_prob a hit is discarded. Misses are empty.
    Deterministic for a fixed rng state.
    """
    params.validate()
    if not world.bounds.contains(pose.x, pose.y):
        raise ValueError("sweep pose must lie inside world bounds")
    out = []
    for bearing in sweep_bearings(params):
        angle = pose.theta + bearing
        d = ray_cast(world, (pose.x, pose.y),
                     (math.cos(angle), math.sin(angle)), params.max_range)
        echo_time = None
        if d is not None:
            if params.noise_sigma > 0.0:
                d = d + params.noise_sigma * rng.standard_normal()
            d = min(params.max_range, max(d, _MIN_RANGE))
            dropped = params.dropout_prob > 0.0 and rng.random() < params.dropout_prob
            if not dropped:
                echo_time = echo_time_from_distance(d, params.speed_of_sound)
        out.append(EchoMeasurement(bearing=float(bearing), echo_time=echo_time))
    return out


def projectile_time_of_flight(u: float, theta: float, g: float) -> float:
    """Flight time of a projectile launched at speed u and elevation theta."""
    if u < 0.0:
        raise ValueError("launch speed must be nonnegative")
    if g <= 0.0:
        raise ValueError("gravitational acceleration must be positive")
    return max(0.0, 2.0 * u * math.sin(theta) / g)
