"""2D environment geometry and ray-cast queries for echo synthesis.

The world is a set of reflective obstacles (segments, circles, axis-aligned
rectangles) inside an axis-aligned bounding box. The bounds are an open room:
they clip nothing and reflect nothing, so a wall must be declared explicitly
as an obstacle. All geometry is in meters, double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Segment:
    """Thin reflective wall between two distinct endpoints."""

    x1: float
    y1: float
    x2: float
    y2: float

    def validate(self) -> None:
        if self.x1 == self.x2 and self.y1 == self.y2:
            raise ValueError("segment endpoints must be distinct")

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return self.distance_to(x, y) <= tol

    def distance_to(self, x: float, y: float) -> float:
        ex, ey = self.x2 - self.x1, self.y2 - self.y1
        px, py = x - self.x1, y - self.y1
        t = (px * ex + py * ey) / (ex * ex + ey * ey)
        t = min(1.0, max(0.0, t))
        return math.hypot(px - t * ex, py - t * ey)

    def ray_intersection(self, ox: float, oy: float, dx: float, dy: float):
        ex, ey = self.x2 - self.x1, self.y2 - self.y1
        wx, wy = self.x1 - ox, self.y1 - oy
        denom = dx * ey - dy * ex
        if abs(denom) < 1e-15:
            # Parallel; collinear rays may still touch an endpoint.
            if abs(wx * dy - wy * dx) > 1e-12:
                return None
            hits = []
            for qx, qy in ((self.x1, self.y1), (self.x2, self.y2)):
                t = (qx - ox) * dx + (qy - oy) * dy
                if t >= 0.0:
                    hits.append(t)
            return min(hits) if hits else None
        t = (wx * ey - wy * ex) / denom
        u = (wx * dy - wy * dx) / denom
        if t >= 0.0 and 0.0 <= u <= 1.0:
            return t
        return None


@dataclass(frozen=True)
class Circle:
    """Solid reflective disc."""

    cx: float
    cy: float
    radius: float

    def validate(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("circle radius must be positive")

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return math.hypot(x - self.cx, y - self.cy) <= self.radius + tol

    def ray_intersection(self, ox: float, oy: float, dx: float, dy: float):
        # |o + t d - c|^2 = r^2, unit d. Tangent grazing counts as a hit.
        fx, fy = ox - self.cx, oy - self.cy
        b = fx * dx + fy * dy
        c = fx * fx + fy * fy - self.radius * self.radius
        if c < 0.0:
            return 0.0
        disc = b * b - c
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        t1 = -b - sq
        if t1 >= 0.0:
            return t1
        t2 = -b + sq
        if t2 >= 0.0:
            return t2
        return None


@dataclass(frozen=True)
class Rect:
    """Solid axis-aligned reflective block."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def validate(self) -> None:
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError("rectangle must have positive area")

    def contains(self, x: float, y: float, tol: float = 0.0) -> bool:
        return (self.xmin - tol <= x <= self.xmax + tol
                and self.ymin - tol <= y <= self.ymax + tol)

    def ray_intersection(self, ox: float, oy: float, dx: float, dy: float):
        # Slab test; returns entry distance, 0 if the origin is inside.
        tmin, tmax = -math.inf, math.inf
        for o, d, lo, hi in ((ox, dx, self.xmin, self.xmax),
                             (oy, dy, self.ymin, self.ymax)):
            if abs(d) < 1e-15:
                if o < lo or o > hi:
                    return None
                continue
            ta = (lo - o) / d
            tb = (hi - o) / d
            if ta > tb:
                ta, tb = tb, ta
            tmin = max(tmin, ta)
            tmax = min(tmax, tb)
        if tmax < tmin or tmax < 0.0:
            return None
        return max(tmin, 0.0)


Obstacle = Segment | Circle | Rect


@dataclass(frozen=True)
class Bounds:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def validate(self) -> None:
        if self.xmax <= self.xmin or self.ymax <= self.ymin:
            raise ValueError("bounds must have strictly positive width and height")

    def contains(self, x: float, y: float) -> bool:
        return self.xmin <= x <= self.xmax and self.ymin <= y <= self.ymax

    def contains_obstacle(self, ob: Obstacle) -> bool:
        if isinstance(ob, Segment):
            return self.contains(ob.x1, ob.y1) and self.contains(ob.x2, ob.y2)
        if isinstance(ob, Circle):
            return (self.contains(ob.cx - ob.radius, ob.cy - ob.radius)
                    and self.contains(ob.cx + ob.radius, ob.cy + ob.radius))
        return self.contains(ob.xmin, ob.ymin) and self.contains(ob.xmax, ob.ymax)


@dataclass(frozen=True)
class World:
    """Immutable environment; safe for concurrent read-only queries."""

    bounds: Bounds
    obstacles: tuple[Obstacle, ...] = field(default_factory=tuple)

    def __post_init__(self):
        self.bounds.validate()
        for i, ob in enumerate(self.obstacles):
            ob.validate()
            if not self.bounds.contains_obstacle(ob):
                raise ValueError(f"obstacle {i} extends outside world bounds")


def ray_cast(world: World, origin: tuple[float, float],
             direction: tuple[float, float], max_range: float):
    """Distance along a unit-direction ray to the nearest obstacle.

    Returns None when nothing is hit within max_range. The bounds do not
    echo; only declared obstacles do. A ray starting on or inside a solid
    obstacle reports distance 0.
    """
    if max_range <= 0.0:
        raise ValueError("max_range must be positive")
    dx, dy = direction
    norm = math.hypot(dx, dy)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    ox, oy = origin
    best = None
    for ob in world.obstacles:
        t = ob.ray_intersection(ox, oy, dx, dy)
        if t is not None and t <= max_range and (best is None or t < best):
            best = t
    return best
