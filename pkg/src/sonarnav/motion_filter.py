"""Echo-motion detection from a stream of ping delays.

A low-pass filtered running average of the echo delay (coefficient g) is
differentiated and low-pass filtered again; the sign of that differential,
gated by a symmetric hysteresis band, classifies a target as approaching or
leaving. Ten consecutive missed pings reset the average to the sentinel so
the next echo starts a fresh lock instead of blending with stale history.

The filter is standalone: the navigation loop does not consume it. The CLI
and service expose it directly on echo-delay streams.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import Optional


class Classification(enum.Enum):
    APPROACHING = "Approaching"
    LEAVING = "Leaving"
    STEADY = "Steady"
    NO_TARGET = "NoTarget"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class FilterParams:
    g: float = 0.9                 # low-pass coefficient; sensible range 0.7..0.95
    dt_hysteresis: float = 0.01    # s, dead band on the filtered differential
    max_time: float = 0.05         # s, no-echo sentinel (one ping period)
    miss_reset_count: int = 10
    ping_period: float = 0.050     # s, informational

    def validate(self) -> None:
        if not 0.0 < self.g < 1.0:
            raise ValueError("filter coefficient g must be in (0, 1)")
        if self.dt_hysteresis <= 0.0:
            raise ValueError("dt_hysteresis must be positive")
        if self.max_time <= 0.0:
            raise ValueError("max_time must be positive")
        if self.miss_reset_count < 1:
            raise ValueError("miss_reset_count must be at least 1")
        if self.ping_period <= 0.0:
            raise ValueError("ping_period must be positive")


@dataclass(frozen=True)
class FilterState:
    """Persistent filter state between pings.

    `locked` plays the role of the avg_time == max_time sentinel comparison,
    so the fresh-lock branch survives serialization roundtrips; avg_time
    equals max_time exactly whenever locked is False.
    """

    avg_time: float
    avg_dt: float = 0.0
    consecutive_misses: int = 0
    locked: bool = False


def filter_init(params: FilterParams) -> FilterState:
    """Fresh state: average pinned at the sentinel, no differential, no misses."""
    params.validate()
    return FilterState(avg_time=params.max_time)


def _classify(state: FilterState, params: FilterParams) -> Classification:
    if not state.locked:
        return Classification.NO_TARGET
    if state.avg_dt < -params.dt_hysteresis:
        return Classification.APPROACHING
    if state.avg_dt > params.dt_hysteresis:
        return Classification.LEAVING
    return Classification.STEADY


def filter_step(state: FilterState, echo: Optional[float],
                params: FilterParams) -> tuple[FilterState, Classification]:
    """Advance the filter by one ping interval.

    A miss keeps avg_time and avg_dt frozen until the miss counter reaches
    the reset count, at which point the state returns to the sentinel. An
    echo while unlocked seeds avg_time directly; echoes while locked run the
    double low-pass recurrence
        avg_time' = g*avg_time + (1-g)*echo
        avg_dt'   = g*avg_dt   + (1-g)*(avg_time' - avg_time).
    """
    if echo is None:
        misses = state.consecutive_misses + 1
        if misses >= params.miss_reset_count:
            state = FilterState(avg_time=params.max_time)
        else:
            state = replace(state, consecutive_misses=misses)
        return state, _classify(state, params)
    if not 0.0 < echo <= params.max_time:
        raise ValueError(f"echo time {echo} outside (0, {params.max_time}]")
    if not state.locked:
        state = FilterState(avg_time=echo, avg_dt=0.0, locked=True)
    else:
        prev = state.avg_time
        avg_time = state.avg_time * params.g + (1.0 - params.g) * echo
        avg_dt = state.avg_dt * params.g + (1.0 - params.g) * (avg_time - prev)
        state = FilterState(avg_time=avg_time, avg_dt=avg_dt, locked=True)
    return state, _classify(state, params)


def classify_stream(echoes: list[Optional[float]],
                    params: FilterParams) -> list[Classification]:
    """Fold filter_step over a ping stream; one classification per ping."""
    state = filter_init(params)
    out = []
    for echo in echoes:
        state, cls = filter_step(state, echo, params)
        out.append(cls)
    return out


def parse_echo_stream(text: str) -> list[Optional[float]]:
    """Parse an echo-stream file: one line per ping, either the echo delay
    in decimal seconds or '-' for a missed ping. Blank lines are skipped."""
    echoes: list[Optional[float]] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        token = line.strip()
        if not token:
            continue
        if token == "-":
            echoes.append(None)
        else:
            try:
                echoes.append(float(token))
            except ValueError:
                raise ValueError(
                    f"echo stream line {lineno}: expected seconds or '-', "
                    f"got {token!r}") from None
    return echoes
