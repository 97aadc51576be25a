"""Sugar landscape on a torus.

Cells are stored row-major in flat arrays (index ``y * width + x``); ``y``
grows downward, so the north-east quadrant is large ``x``, small ``y``.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import NamedTuple

import numpy as np

MAX_CAPACITY = 4


class Position(NamedTuple):
    x: int
    y: int


class MapParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class Landscape:
    """Sugar ``level`` (float) and ``capacity`` (int) per cell, plus the growback rate."""

    __slots__ = ("width", "height", "capacity", "level", "growback_rate")

    def __init__(self, width: int, height: int, capacity, growback_rate: float = 1.0, level=None):
        capacity = np.asarray(capacity, dtype=np.int64).reshape(-1)
        if capacity.size != width * height:
            raise ValueError("capacity length does not match dimensions")
        if capacity.min(initial=0) < 0 or capacity.max(initial=0) > MAX_CAPACITY:
            raise ValueError(f"capacities must lie in 0..{MAX_CAPACITY}")
        self.width = width
        self.height = height
        self.capacity = capacity.copy()
        if level is None:
            self.level = capacity.astype(np.float64)
        else:
            self.level = np.array(level, dtype=np.float64).reshape(-1)
        self.growback_rate = float(growback_rate)

    def copy(self) -> "Landscape":
        return Landscape(self.width, self.height, self.capacity, self.growback_rate, self.level)

    @property
    def n_cells(self) -> int:
        return self.width * self.height

    def index(self, pos) -> int:
        return (pos[1] % self.height) * self.width + (pos[0] % self.width)

    def position(self, idx: int) -> Position:
        return Position(int(idx) % self.width, int(idx) // self.width)

    def level_at(self, pos) -> float:
        return float(self.level[self.index(pos)])

    def capacity_at(self, pos) -> int:
        return int(self.capacity[self.index(pos)])

    def set_level(self, pos, value: float) -> None:
        idx = self.index(pos)
        if not 0 <= value <= self.capacity[idx]:
            raise ValueError(f"level {value} outside [0, {self.capacity[idx]}]")
        self.level[idx] = value

    def total_sugar(self) -> float:
        return math.fsum(self.level.tolist())

    def rows(self) -> list[list[int]]:
        return self.capacity.reshape(self.height, self.width).tolist()

    def __eq__(self, other):
        if not isinstance(other, Landscape):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.growback_rate == other.growback_rate
                and np.array_equal(self.capacity, other.capacity)
                and np.array_equal(self.level, other.level))


def terrace_band(d: float, width: int) -> int:
    if d < 0.12 * width:
        return 4
    if d < 0.22 * width:
        return 3
    if d < 0.32 * width:
        return 2
    if d < 0.42 * width:
        return 1
    return 0


def peak_positions(width: int, height: int) -> tuple[Position, Position]:
    return (Position(math.floor(0.75 * width), math.floor(0.25 * height)),
            Position(math.floor(0.25 * width), math.floor(0.75 * height)))


def generate_default(width: int = 50, height: int = 50, growback_rate: float = 1.0) -> Landscape:
    """Two terraced sugar peaks (NE and SW) falling to a barren periphery."""
    if width < 10 or height < 10:
        raise ValueError(f"landscape must be at least 10x10, got {width}x{height}")
    peaks = peak_positions(width, height)
    capacity = [max(terrace_band(math.hypot(x - px, y - py), width) for px, py in peaks)
                for y in range(height) for x in range(width)]
    return Landscape(width, height, capacity, growback_rate)


def load_map(text: str, growback_rate: float = 1.0) -> Landscape:
    rows: list[list[int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        row = []
        for col, tok in enumerate(stripped.split(), start=1):
            try:
                v = int(tok)
            except ValueError:
                raise MapParseError(f"not an integer: {tok!r}", lineno, col) from None
            if not 0 <= v <= MAX_CAPACITY:
                raise MapParseError(f"capacity {v} outside 0..{MAX_CAPACITY}", lineno, col)
            row.append(v)
        if rows and len(row) != len(rows[0]):
            raise MapParseError(f"expected {len(rows[0])} values, found {len(row)}", lineno)
        rows.append(row)
    if not rows:
        raise MapParseError("map is empty")
    width, height = len(rows[0]), len(rows)
    return Landscape(width, height, [v for r in rows for v in r], growback_rate)


def export_map(landscape: Landscape) -> str:
    return "".join(" ".join(str(v) for v in row) + "\n" for row in landscape.rows())


def grow_back(landscape: Landscape) -> Landscape:
    """Regrow every cell by the growback rate, capped at capacity (in place)."""
    np.minimum(landscape.level + landscape.growback_rate, landscape.capacity, out=landscape.level)
    return landscape


def harvest(landscape: Landscape, pos) -> float:
    """Collect all sugar at ``pos``; the cell is left empty."""
    idx = landscape.index(pos)
    g = float(landscape.level[idx])
    landscape.level[idx] = 0.0
    return g


def torus_delta(a: int, b: int, n: int) -> int:
    d = abs(a - b) % n
    return min(d, n - d)


@lru_cache(maxsize=None)
def _sight(width: int, height: int, vision: int) -> tuple[np.ndarray, np.ndarray]:
    n = width * height
    cells = np.full((n, 4 * vision), -1, dtype=np.int64)
    dists = np.zeros((n, 4 * vision), dtype=np.int64)
    for idx in range(n):
        x, y = idx % width, idx // width
        seen = {idx}
        k = 0
        for dx, dy in ((0, -1), (0, 1), (1, 0), (-1, 0)):
            for step in range(1, vision + 1):
                nx, ny = (x + dx * step) % width, (y + dy * step) % height
                j = ny * width + nx
                if j in seen:
                    continue
                seen.add(j)
                cells[idx, k] = j
                dists[idx, k] = torus_delta(nx, x, width) + torus_delta(ny, y, height)
                k += 1
    cells.flags.writeable = False
    dists.flags.writeable = False
    return cells, dists


def sight_table(width: int, height: int, vision: int) -> tuple[np.ndarray, np.ndarray]:
    """Visible cells and their lattice distances, one row per viewer cell.

    Rows list north 1..v, south 1..v, east 1..v, west 1..v; wrap-around
    duplicates keep their first occurrence, the viewer's own cell is
    dropped, and unused slots hold -1.
    """
    return _sight(width, height, vision)


@lru_cache(maxsize=None)
def _sight_stack(width: int, height: int, max_vision: int) -> tuple[np.ndarray, np.ndarray]:
    n = width * height
    cells = np.full((max_vision + 1, n, 4 * max_vision), -1, dtype=np.int64)
    dists = np.zeros((max_vision + 1, n, 4 * max_vision), dtype=np.int64)
    for v in range(1, max_vision + 1):
        c, d = _sight(width, height, v)
        cells[v, :, :4 * v] = c
        dists[v, :, :4 * v] = d
    cells.flags.writeable = False
    dists.flags.writeable = False
    return cells, dists


def sight_stack(width: int, height: int, max_vision: int) -> tuple[np.ndarray, np.ndarray]:
    """``sight_table`` for every vision 1..max_vision, indexed ``[vision, cell, k]``."""
    return _sight_stack(width, height, max_vision)


def visible_positions(landscape: Landscape, pos, vision: int) -> list[Position]:
    if vision < 1:
        raise ValueError("vision must be at least 1")
    cells, _ = sight_table(landscape.width, landscape.height, vision)
    return [landscape.position(j) for j in cells[landscape.index(pos)] if j >= 0]
