"""Occupancy-grid construction from sweep measurements.

Cells hold additive log-odds of occupancy, clamped to [l_min, l_max];
log-odds 0 is "never observed" (probability 0.5). A range measurement frees
every traversed cell well short of the measured range and marks the cells
straddling the range as occupied; a miss frees the whole ray out to the
sensor limit. Traversal enumerates exactly the cells the beam's center line
passes through (grid walking, not 8-connected rasterization).

Maps persist to a lossless CSV form and a quantized 8-bit PGM image
(dark = occupied); both are documented in the README.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .robot import Pose
from .sensor import EchoMeasurement, SensorParams, distance_from_echo_time

L_MIN_DEFAULT = -6.0
L_MAX_DEFAULT = 6.0


@dataclass
class OccupancyGrid:
    """Uniform-cell log-odds map; cell (0, 0) has its corner at `origin`.

    cells is indexed [row, col] = [iy, ix]; column ix spans x in
    [origin_x + ix*res, origin_x + (ix+1)*res), rows likewise in y.
    """

    origin_x: float
    origin_y: float
    resolution: float
    width: int
    height: int
    cells: np.ndarray
    l_min: float = L_MIN_DEFAULT
    l_max: float = L_MAX_DEFAULT

    def world_to_cell(self, x: float, y: float) -> tuple[int, int]:
        ix = math.floor((x - self.origin_x) / self.resolution)
        iy = math.floor((y - self.origin_y) / self.resolution)
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        return (self.origin_x + (ix + 0.5) * self.resolution,
                self.origin_y + (iy + 0.5) * self.resolution)

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def probability_map(self) -> np.ndarray:
        return probability(self.cells)

    def copy(self) -> "OccupancyGrid":
        return OccupancyGrid(self.origin_x, self.origin_y, self.resolution,
                             self.width, self.height, self.cells.copy(),
                             self.l_min, self.l_max)


@dataclass(frozen=True)
class SonarInverseModel:
    """Per-measurement log-odds increments for the map update.

    mode "ray" updates only the cells on the beam center line (exactly
    oracle-checkable); mode "cone" additionally frees cells inside the
    acoustic cone, with the free increment scaled down toward the cone edge.
    """

    cone_half_angle: float = 0.2618  # ~15 degrees
    l_occ: float = 0.85
    l_free: float = -0.4
    occupied_band: float = 0.1  # m, defaults to one cell at 0.1 m resolution
    mode: str = "ray"

    def validate(self) -> None:
        if not 0.0 < self.cone_half_angle < math.pi / 2:
            raise ValueError("cone_half_angle must be in (0, pi/2)")
        if not (self.l_occ > 0.0 > self.l_free):
            raise ValueError("need l_occ > 0 > l_free")
        if self.occupied_band <= 0.0:
            raise ValueError("occupied_band must be positive")
        if self.mode not in ("ray", "cone"):
            raise ValueError(f"unknown inverse-model mode {self.mode!r}")


def new_grid(origin: tuple[float, float], resolution: float,
             width: int, height: int) -> OccupancyGrid:
    """Fresh all-unknown grid (every cell at log-odds 0)."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be at least 1x1")
    return OccupancyGrid(float(origin[0]), float(origin[1]), float(resolution),
                         int(width), int(height),
                         np.zeros((height, width), dtype=np.float64))


def probability(l):
    """Occupancy probability 1 / (1 + exp(-l)) for scalar or array log-odds."""
    if isinstance(l, np.ndarray):
        return 1.0 / (1.0 + np.exp(-l))
    return 1.0 / (1.0 + math.exp(-l))


def log_odds(p: float) -> float:
    """Inverse of probability(); p must be in (0, 1)."""
    return math.log(p / (1.0 - p))


def traverse_cells(grid: OccupancyGrid, origin: tuple[float, float],
                   direction: tuple[float, float],
                   t_end: float) -> Iterator[tuple[int, int]]:
    """Cells whose interior the segment origin..origin+t_end*direction crosses.

    Amanatides-Woo grid walking, starting at the cell containing the origin.
    An exact boundary tie steps both axes at once: a segment through a cell
    corner visits the two diagonal cells only. Stops on leaving the grid.
    """
    ox, oy = origin
    dx, dy = direction
    res = grid.resolution
    ix, iy = grid.world_to_cell(ox, oy)
    if not grid.in_bounds(ix, iy):
        raise ValueError("traversal origin must lie inside the grid")

    if dx > 0:
        step_x, t_max_x = 1, (grid.origin_x + (ix + 1) * res - ox) / dx
        t_delta_x = res / dx
    elif dx < 0:
        step_x, t_max_x = -1, (grid.origin_x + ix * res - ox) / dx
        t_delta_x = -res / dx
    else:
        step_x, t_max_x, t_delta_x = 0, math.inf, math.inf
    if dy > 0:
        step_y, t_max_y = 1, (grid.origin_y + (iy + 1) * res - oy) / dy
        t_delta_y = res / dy
    elif dy < 0:
        step_y, t_max_y = -1, (grid.origin_y + iy * res - oy) / dy
        t_delta_y = -res / dy
    else:
        step_y, t_max_y, t_delta_y = 0, math.inf, math.inf

    while True:
        yield ix, iy
        t_next = min(t_max_x, t_max_y)
        if t_next >= t_end:
            return
        if t_max_x < t_max_y:
            ix += step_x
            t_max_x += t_delta_x
        elif t_max_y < t_max_x:
            iy += step_y
            t_max_y += t_delta_y
        else:
            ix += step_x
            iy += step_y
            t_max_x += t_delta_x
            t_max_y += t_delta_y
        if not grid.in_bounds(ix, iy):
            return


def _apply(grid: OccupancyGrid, ix: int, iy: int, delta: float) -> None:
    v = grid.cells[iy, ix] + delta
    grid.cells[iy, ix] = min(grid.l_max, max(grid.l_min, v))


def _update_ray(grid: OccupancyGrid, origin: tuple[float, float],
                direction: tuple[float, float], hit_range: Optional[float],
                max_range: float, model: SonarInverseModel) -> None:
    ox, oy = origin
    dx, dy = direction
    band = model.occupied_band
    # One extra cell of walk length so every cell whose center projects
    # inside the update window is enumerated.
    if hit_range is not None:
        t_end = hit_range + band + grid.resolution
        free_limit = hit_range - band
    else:
        t_end = max_range + grid.resolution
        free_limit = max_range
    for ix, iy in traverse_cells(grid, origin, direction, t_end):
        cx, cy = grid.cell_center(ix, iy)
        t_c = (cx - ox) * dx + (cy - oy) * dy
        if t_c < free_limit:
            _apply(grid, ix, iy, model.l_free)
        elif hit_range is not None and abs(t_c - hit_range) < band:
            _apply(grid, ix, iy, model.l_occ)


def _update_cone(grid: OccupancyGrid, origin: tuple[float, float], angle: float,
                 hit_range: Optional[float], max_range: float,
                 model: SonarInverseModel) -> None:
    # Free the cone interior with angular falloff, then run the exact ray
    # update on top so the center line keeps its ray-mode semantics.
    ox, oy = origin
    band = model.occupied_band
    reach = (hit_range - band) if hit_range is not None else max_range
    if reach > 0.0:
        res = grid.resolution
        ix0, iy0 = grid.world_to_cell(ox - reach, oy - reach)
        ix1, iy1 = grid.world_to_cell(ox + reach, oy + reach)
        ix0, iy0 = max(ix0, 0), max(iy0, 0)
        ix1, iy1 = min(ix1, grid.width - 1), min(iy1, grid.height - 1)
        if ix1 >= ix0 and iy1 >= iy0:
            xs = grid.origin_x + (np.arange(ix0, ix1 + 1) + 0.5) * res - ox
            ys = grid.origin_y + (np.arange(iy0, iy1 + 1) + 0.5) * res - oy
            px, py = np.meshgrid(xs, ys)
            dist = np.hypot(px, py)
            dang = np.arctan2(py, px) - angle
            dang = np.abs(np.arctan2(np.sin(dang), np.cos(dang)))
            inside = (dist < reach) & (dang <= model.cone_half_angle) & (dist > 0)
            if inside.any():
                falloff = 1.0 - (dang / model.cone_half_angle) ** 2
                block = grid.cells[iy0:iy1 + 1, ix0:ix1 + 1]
                block[inside] = np.clip(block[inside]
                                        + model.l_free * falloff[inside],
                                        grid.l_min, grid.l_max)
    _update_ray(grid, origin, (math.cos(angle), math.sin(angle)),
                hit_range, max_range, model)


def update_from_sweep(grid: OccupancyGrid, pose: Pose,
                      measurements: list[EchoMeasurement],
                      sensor: SensorParams,
                      model: SonarInverseModel) -> OccupancyGrid:
    """Fold one sweep into the grid (mutates and returns it).

    Beams with an echo free the traversed cells strictly nearer than
    range - occupied_band and occupy the cells whose center projection falls
    within the band around the range; beams without an echo free out to
    max_range. Each cell changes at most once per measurement.
    """
    model.validate()
    ix, iy = grid.world_to_cell(pose.x, pose.y)
    if not grid.in_bounds(ix, iy):
        raise ValueError("pose must map inside the grid extent")
    origin = (pose.x, pose.y)
    for m in measurements:
        if not sensor.sweep_min <= m.bearing <= sensor.sweep_max:
            raise ValueError(
                f"measurement bearing {m.bearing} outside sweep range")
        hit_range = None
        if m.echo_time is not None:
            hit_range = distance_from_echo_time(m.echo_time, sensor.speed_of_sound)
        angle = pose.theta + m.bearing
        if model.mode == "cone":
            _update_cone(grid, origin, angle, hit_range, sensor.max_range, model)
        else:
            _update_ray(grid, origin, (math.cos(angle), math.sin(angle)),
                        hit_range, sensor.max_range, model)
    return grid


def fuse_into_global(global_grid: OccupancyGrid,
                     local: OccupancyGrid) -> OccupancyGrid:
    """Add a local map's evidence into the global map (mutates and returns it).

    Cell correspondence goes through world coordinates of local cell centers,
    so the local map may sit anywhere on the global lattice. Results are
    clamped; all-zero local cells are no-ops by construction.
    """
    if abs(global_grid.resolution - local.resolution) > 1e-12:
        raise ValueError("fusion requires identical resolutions")
    res = local.resolution
    cols = np.floor((local.origin_x + (np.arange(local.width) + 0.5) * res
                     - global_grid.origin_x) / res).astype(int)
    rows = np.floor((local.origin_y + (np.arange(local.height) + 0.5) * res
                     - global_grid.origin_y) / res).astype(int)
    if (cols[0] < 0 or cols[-1] >= global_grid.width
            or rows[0] < 0 or rows[-1] >= global_grid.height):
        raise ValueError("local map extends outside the global map")
    block = global_grid.cells[np.ix_(rows, cols)]
    global_grid.cells[np.ix_(rows, cols)] = np.clip(
        block + local.cells, global_grid.l_min, global_grid.l_max)
    return global_grid


# --- persistence ---------------------------------------------------------

CSV_TAG = "occgrid"


def save_map(grid: OccupancyGrid, path) -> None:
    """Write a map file; the format follows the path suffix (.csv or .pgm)."""
    path = str(path)
    if path.endswith(".csv"):
        _save_csv(grid, path)
    elif path.endswith(".pgm"):
        _save_pgm(grid, path)
    else:
        raise ValueError(f"unsupported map extension for {path} (use .csv or .pgm)")


def load_map(path) -> OccupancyGrid:
    path = str(path)
    if path.endswith(".csv"):
        return _load_csv(path)
    if path.endswith(".pgm"):
        return _load_pgm(path)
    raise ValueError(f"unsupported map extension for {path} (use .csv or .pgm)")


def _save_csv(grid: OccupancyGrid, path: str) -> None:
    lines = [f"{CSV_TAG},{grid.origin_x!r},{grid.origin_y!r},"
             f"{grid.resolution!r},{grid.width},{grid.height}"]
    for row in grid.cells:
        lines.append(",".join(repr(float(v)) for v in row))
    with open(path, "w", encoding="ascii") as f:
        f.write("\n".join(lines) + "\n")


def _load_csv(path: str) -> OccupancyGrid:
    with open(path, "r", encoding="ascii") as f:
        header = f.readline().strip()
        parts = header.split(",")
        if len(parts) != 6 or parts[0] != CSV_TAG:
            raise ValueError(f"{path}: not an occupancy-grid CSV header: {header!r}")
        try:
            ox, oy, res = float(parts[1]), float(parts[2]), float(parts[3])
            width, height = int(parts[4]), int(parts[5])
        except ValueError as e:
            raise ValueError(f"{path}: bad header field: {e}") from e
        grid = new_grid((ox, oy), res, width, height)
        for iy in range(height):
            line = f.readline()
            if not line:
                raise ValueError(f"{path}: truncated after {iy} of {height} rows")
            vals = line.strip().split(",")
            if len(vals) != width:
                raise ValueError(
                    f"{path}: row {iy} has {len(vals)} values, expected {width}")
            grid.cells[iy, :] = [float(v) for v in vals]
    if np.any(grid.cells < grid.l_min) or np.any(grid.cells > grid.l_max):
        raise ValueError(f"{path}: log-odds values outside "
                         f"[{grid.l_min}, {grid.l_max}]")
    return grid


def pgm_pixels(grid: OccupancyGrid) -> np.ndarray:
    """8-bit image of the grid: pixel = floor(255*(1-p) + 0.5), dark = occupied."""
    p = grid.probability_map()
    return np.floor(255.0 * (1.0 - p) + 0.5).astype(np.uint8)


def _save_pgm(grid: OccupancyGrid, path: str) -> None:
    header = (f"P5\n# {CSV_TAG} {grid.origin_x!r} {grid.origin_y!r} "
              f"{grid.resolution!r}\n{grid.width} {grid.height}\n255\n")
    with open(path, "wb") as f:
        f.write(header.encode("ascii"))
        f.write(pgm_pixels(grid).tobytes())  # grid row 0 at image top


def _load_pgm(path: str) -> OccupancyGrid:
    with open(path, "rb") as f:
        data = f.read()
    try:
        origin = (0.0, 0.0)
        resolution = None
        pos = 0
        fields = []
        while len(fields) < 4:
            nl = data.index(b"\n", pos)
            line = data[pos:nl].decode("ascii")
            pos = nl + 1
            if line.startswith("#"):
                tokens = line[1:].split()
                if tokens and tokens[0] == CSV_TAG:
                    origin = (float(tokens[1]), float(tokens[2]))
                    resolution = float(tokens[3])
                continue
            fields.extend(line.split())
        magic, width, height, maxval = fields[0], int(fields[1]), int(fields[2]), int(fields[3])
    except (ValueError, IndexError) as e:
        raise ValueError(f"{path}: malformed PGM header: {e}") from e
    if magic != "P5" or maxval != 255:
        raise ValueError(f"{path}: expected binary PGM with maxval 255")
    if resolution is None:
        raise ValueError(f"{path}: missing '{CSV_TAG}' georeference comment")
    pixels = np.frombuffer(data[pos:pos + width * height], dtype=np.uint8)
    if pixels.size != width * height:
        raise ValueError(f"{path}: truncated pixel data")
    grid = new_grid(origin, resolution, width, height)
    p = 1.0 - pixels.reshape(height, width).astype(np.float64) / 255.0
    with np.errstate(divide="ignore"):
        l = np.log(p) - np.log1p(-p)
    grid.cells[:] = np.clip(l, grid.l_min, grid.l_max)
    return grid
