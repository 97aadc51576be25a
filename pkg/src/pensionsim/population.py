"""Agents, initial placement, the movement rule, reproduction and vital checks.

Agents live in an :class:`AgentTable` (one numpy array per field, agent id ==
row). :class:`Agent` is a thin read/write view onto one row for code that
prefers objects; the engine works on the arrays directly.
"""
from __future__ import annotations

import enum
from typing import Iterator, Optional

import numpy as np
from numba import njit

from .landscape import Landscape, Position, sight_stack
from .rng import RngState, _below, k_sample
from .scenario import ScenarioSpec

INT_FIELDS = ("cell", "vision", "metabolism", "age", "max_age", "n_children_target", "age_to_reproduce")
BOOL_FIELDS = ("has_bred", "retired", "first_generation", "alive")


class AgentTable:
    """Growable struct-of-arrays agent store."""

    def __init__(self, capacity: int = 64):
        capacity = max(capacity, 1)
        for f in INT_FIELDS:
            setattr(self, f, np.zeros(capacity, dtype=np.int64))
        self.cell.fill(-1)
        self.wealth = np.zeros(capacity, dtype=np.float64)
        for f in BOOL_FIELDS:
            setattr(self, f, np.zeros(capacity, dtype=np.bool_))
        self.size = 0

    @property
    def capacity(self) -> int:
        return self.wealth.shape[0]

    def ensure(self, capacity: int) -> None:
        if capacity <= self.capacity:
            return
        new = max(capacity, 2 * self.capacity)
        for f in INT_FIELDS + ("wealth",) + BOOL_FIELDS:
            old = getattr(self, f)
            arr = np.zeros(new, dtype=old.dtype)
            if f == "cell":
                arr.fill(-1)
            arr[:old.shape[0]] = old
            setattr(self, f, arr)

    def add(self, *, vision: int, metabolism: int, wealth: float, max_age: int, n_children_target: int,
            age_to_reproduce: int, age: int = 0, cell: int = -1, has_bred: bool = False,
            retired: bool = False, first_generation: bool = False) -> "Agent":
        self.ensure(self.size + 1)
        i = self.size
        self.cell[i] = cell
        self.vision[i] = vision
        self.metabolism[i] = metabolism
        self.wealth[i] = wealth
        self.age[i] = age
        self.max_age[i] = max_age
        self.n_children_target[i] = n_children_target
        self.age_to_reproduce[i] = age_to_reproduce
        self.has_bred[i] = has_bred
        self.retired[i] = retired
        self.first_generation[i] = first_generation
        self.alive[i] = True
        self.size += 1
        return Agent(self, i)

    def __getitem__(self, agent_id: int) -> "Agent":
        if not 0 <= agent_id < self.size:
            raise IndexError(agent_id)
        return Agent(self, agent_id)

    def __iter__(self) -> Iterator["Agent"]:
        return (Agent(self, i) for i in range(self.size) if self.alive[i])

    def __len__(self) -> int:
        return int(self.alive[:self.size].sum())

    def rows(self, ids) -> tuple:
        ids = np.asarray(ids, dtype=np.int64)
        return tuple(getattr(self, f)[ids].tobytes() for f in INT_FIELDS + ("wealth",) + BOOL_FIELDS)


def _field(name, cast):
    def get(self):
        return cast(getattr(self.table, name)[self.id])

    def set(self, value):
        getattr(self.table, name)[self.id] = value
    return property(get, set)


class Agent:
    """View of one agent row."""

    __slots__ = ("table", "id")

    def __init__(self, table: AgentTable, agent_id: int):
        self.table = table
        self.id = int(agent_id)

    cell = _field("cell", int)
    vision = _field("vision", int)
    metabolism = _field("metabolism", int)
    wealth = _field("wealth", float)
    age = _field("age", int)
    max_age = _field("max_age", int)
    n_children_target = _field("n_children_target", int)
    age_to_reproduce = _field("age_to_reproduce", int)
    has_bred = _field("has_bred", bool)
    retired = _field("retired", bool)
    first_generation = _field("first_generation", bool)
    alive = _field("alive", bool)

    def position(self, landscape: Landscape) -> Optional[Position]:
        c = self.cell
        return None if c < 0 else landscape.position(c)

    def __eq__(self, other):
        return isinstance(other, Agent) and other.table is self.table and other.id == self.id

    def __hash__(self):
        return hash((id(self.table), self.id))

    def __repr__(self):
        return (f"Agent(id={self.id}, cell={self.cell}, v={self.vision}, m={self.metabolism}, "
                f"wealth={self.wealth:.3f}, age={self.age}, retired={self.retired})")


class Occupancy:
    """Cell -> working agent id (-1 when free). Retired agents never appear."""

    __slots__ = ("grid",)

    def __init__(self, n_cells: int):
        self.grid = np.full(n_cells, -1, dtype=np.int64)

    @property
    def count(self) -> int:
        return int((self.grid >= 0).sum())

    def at(self, cell: int) -> int:
        return int(self.grid[cell])

    def is_free(self, cell: int) -> bool:
        return self.grid[cell] < 0

    def place(self, agent: Agent, cell: int) -> None:
        if self.grid[cell] >= 0:
            raise AssertionError(f"cell {cell} already occupied by agent {self.grid[cell]}")
        self.grid[cell] = agent.id
        agent.cell = cell

    def vacate(self, agent: Agent) -> None:
        c = agent.cell
        if c >= 0 and self.grid[c] == agent.id:
            self.grid[c] = -1
        agent.cell = -1


class VitalStatus(enum.Enum):
    ALIVE = "alive"
    DEAD_STARVATION = "dead_starvation"
    DEAD_OLD_AGE = "dead_old_age"


class Transition(enum.Enum):
    NONE = "none"
    RETIRES_NOW = "retires_now"


# -- compiled kernels -------------------------------------------------------

@njit(cache=True)
def k_choose_move(here, vision, level, occ, sight_cells, sight_dists, s, ties):
    """Rule M: most sugar, then nearest, then uniform among the remaining ties.

    ``sight_cells``/``sight_dists`` are indexed ``[vision, cell, k]``; the
    current cell competes at distance 0. ``ties`` is scratch space of at
    least ``4 * vision`` slots.
    """
    best = level[here]
    best_d = 0
    n_ties = 0  # 0 means "stay" is the unique nearest best
    row_c = sight_cells[vision, here]
    row_d = sight_dists[vision, here]
    for k in range(4 * vision):
        j = row_c[k]
        if j < 0:
            break
        if occ[j] >= 0:
            continue
        lv = level[j]
        if lv > best:
            best = lv
            best_d = row_d[k]
            ties[0] = j
            n_ties = 1
        elif lv == best and n_ties > 0:
            d = row_d[k]
            if d < best_d:
                best_d = d
                ties[0] = j
                n_ties = 1
            elif d == best_d:
                ties[n_ties] = j
                n_ties += 1
    if n_ties == 0:
        return here
    if n_ties == 1:
        return ties[0]
    s[4] += np.uint64(1)
    return ties[_below(s, n_ties)]


@njit(cache=True)
def _tdelta(a, b, n):
    d = abs(a - b) % n
    return d if d <= n - d else n - d


@njit(cache=True)
def k_nearest_free(origin, occ, width, height, s):
    """Closest free cell to ``origin`` by torus lattice distance, -1 if none.

    Each ring is enumerated dx = -r..r with dy = +rem then -rem; the rng picks
    uniformly among the ring's free cells.
    """
    ox = origin % width
    oy = origin // width
    max_r = width // 2 + height // 2
    ring = np.empty(4 * max_r + 4, dtype=np.int64)
    for r in range(1, max_r + 1):
        n = 0
        for dx in range(-r, r + 1):
            rem = r - abs(dx)
            for sgn in (1, -1):
                if rem == 0 and sgn == -1:
                    break
                x = (ox + dx) % width
                y = (oy + sgn * rem) % height
                if _tdelta(x, ox, width) + _tdelta(y, oy, height) != r:
                    continue
                j = y * width + x
                if occ[j] >= 0:
                    continue
                dup = False
                for q in range(n):
                    if ring[q] == j:
                        dup = True
                        break
                if not dup:
                    ring[n] = j
                    n += 1
        if n == 1:
            return ring[0]
        if n > 1:
            s[4] += np.uint64(1)
            return ring[_below(s, n)]
    return -1


@njit(cache=True)
def k_reproduce(parent, next_id, cell, vision, metab, wealth, age, max_age, n_children, atr,
                has_bred, retired, first_gen, alive, occ, width, height, s,
                d_max_age, d_children, d_atr, out_children):
    """Breed all of ``parent``'s children at once.

    Writes new ids into ``out_children``; returns ``(n_born, n_skipped, next_id)``.
    Each child gets ``wealth / (2k)``; a child with no free cell is skipped
    and its share stays with the parent.
    """
    has_bred[parent] = True
    k = n_children[parent]
    if k <= 0:
        return 0, 0, next_id
    before = wealth[parent]
    share = before / (2.0 * k)
    born = 0
    skipped = 0
    for _ in range(k):
        c = k_nearest_free(cell[parent], occ, width, height, s)
        if c < 0:
            skipped += 1
            continue
        i = next_id
        next_id += 1
        cell[i] = c
        occ[c] = i
        vision[i] = vision[parent]
        metab[i] = metab[parent]
        wealth[i] = share
        age[i] = 0
        max_age[i] = np.int64(k_sample(s, d_max_age))
        n_children[i] = np.int64(k_sample(s, d_children))
        atr[i] = np.int64(k_sample(s, d_atr))
        has_bred[i] = False
        retired[i] = False
        first_gen[i] = False
        alive[i] = True
        out_children[born] = i
        born += 1
    wealth[parent] = before - share * born
    return born, skipped, next_id


# -- Python-level operations -----------------------------------------------

def spawn_initial(n: int, scenario: ScenarioSpec, landscape: Landscape,
                  rng: RngState) -> tuple[AgentTable, Occupancy]:
    """Place ``n`` first-generation agents on distinct uniformly random cells."""
    n_cells = landscape.n_cells
    if n < 0:
        raise ValueError("population size must be non-negative")
    if n > n_cells:
        raise ValueError(f"cannot place {n} agents on {n_cells} cells")
    table = AgentTable(max(64, 2 * n))
    occupancy = Occupancy(n_cells)
    # partial Fisher-Yates: the first n entries become distinct uniform cells
    cells = list(range(n_cells))
    for i in range(n):
        j = i + rng.randbelow(n_cells - i)
        cells[i], cells[j] = cells[j], cells[i]
    vision_d, metab_d = scenario.trait("vision"), scenario.trait("metabolism")
    atr_d = scenario.trait("age_to_reproduce")
    for i in range(n):
        a = table.add(
            vision=rng.sample(vision_d),
            metabolism=rng.sample(metab_d),
            wealth=rng.sample(scenario.endowment),
            max_age=rng.sample(scenario.max_age),
            n_children_target=rng.sample(scenario.children),
            age_to_reproduce=rng.sample(atr_d),
            first_generation=True,
        )
        occupancy.place(a, cells[i])
    return table, occupancy


def choose_move(agent: Agent, landscape: Landscape, occupancy: Occupancy, rng: RngState) -> Position:
    if agent.retired:
        raise ValueError("retired agents do not move")
    v = agent.vision
    cells, dists = sight_stack(landscape.width, landscape.height, v)
    j = k_choose_move(agent.cell, v, landscape.level, occupancy.grid, cells, dists, rng.s,
                      np.empty(4 * v, dtype=np.int64))
    return landscape.position(j)


def nearest_free_cell(landscape: Landscape, occupancy: Occupancy, origin: int, rng: RngState) -> Optional[int]:
    c = k_nearest_free(origin, occupancy.grid, landscape.width, landscape.height, rng.s)
    return None if c < 0 else int(c)


class Births:
    """Skipped-birth counter for callers of :func:`reproduce`."""

    __slots__ = ("skipped",)

    def __init__(self):
        self.skipped = 0


def reproduce(parent: Agent, scenario: ScenarioSpec, occupancy: Occupancy, landscape: Landscape,
              rng: RngState, births: Optional[Births] = None) -> list[Agent]:
    """Breed all of the parent's children at once.

    Half the parent's wealth is split evenly between the children; vision
    and metabolism are inherited, other life-cycle traits freshly drawn.
    """
    if parent.retired or parent.has_bred or parent.age != parent.age_to_reproduce or not parent.alive:
        raise ValueError(f"agent {parent.id} is not eligible to reproduce")
    t = parent.table
    k = max(parent.n_children_target, 0)
    t.ensure(t.size + k)
    out = np.empty(max(k, 1), dtype=np.int64)
    born, skipped, next_id = k_reproduce(
        parent.id, t.size, t.cell, t.vision, t.metabolism, t.wealth, t.age, t.max_age,
        t.n_children_target, t.age_to_reproduce, t.has_bred, t.retired, t.first_generation, t.alive,
        occupancy.grid, landscape.width, landscape.height, rng.s,
        scenario.max_age.encode(), scenario.children.encode(), scenario.trait("age_to_reproduce").encode(),
        out)
    t.size = int(next_id)
    if births is not None:
        births.skipped += int(skipped)
    return [Agent(t, int(i)) for i in out[:born]]


def check_vital(agent: Agent, retirement_age: int) -> tuple[VitalStatus, Transition]:
    if agent.wealth <= 0:
        status = VitalStatus.DEAD_STARVATION
    elif agent.age > agent.max_age:
        status = VitalStatus.DEAD_OLD_AGE
    else:
        status = VitalStatus.ALIVE
    transition = Transition.NONE
    if status is VitalStatus.ALIVE and not agent.retired and agent.age >= retirement_age:
        transition = Transition.RETIRES_NOW
    return status, transition
