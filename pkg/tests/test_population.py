import numpy as np
import pytest

from oracles import admissible_moves
from pensionsim.landscape import Landscape, Position, generate_default
from pensionsim.population import (AgentTable, Births, Occupancy, Transition, VitalStatus, check_vital, choose_move,
                                   nearest_free_cell, reproduce, spawn_initial)
from pensionsim.rng import new_rng
from pensionsim.scenario import ScenarioSpec


def world(levels, agents, vision=3):
    h, w = len(levels), len(levels[0])
    land = Landscape(w, h, [4] * (w * h), level=[v for row in levels for v in row])
    table, occ = AgentTable(), Occupancy(w * h)
    out = []
    for (x, y) in agents:
        a = table.add(vision=vision, metabolism=1, wealth=10, max_age=80, n_children_target=0,
                      age_to_reproduce=20)
        occ.place(a, land.index(Position(x, y)))
        out.append(a)
    return land, table, occ, out


def test_spawn_initial():
    s = ScenarioSpec()
    land = generate_default()
    table, occ = spawn_initial(400, s, land, new_rng(1))
    cells = table.cell[:400]
    assert len(set(cells.tolist())) == 400 and occ.count == 400
    assert (table.age[:400] == 0).all()
    assert ((table.wealth[:400] >= 5) & (table.wealth[:400] <= 25)).all()
    assert table.first_generation[:400].all()


def test_spawn_too_many():
    with pytest.raises(ValueError):
        spawn_initial(101, ScenarioSpec(), Landscape(10, 10, [1] * 100), new_rng(0))


def test_move_north():
    levels = [[0] * 10 for _ in range(10)]
    levels[4][5] = 4
    levels[3][5] = 3
    land, _, occ, (a,) = world(levels, [(5, 5)])
    assert choose_move(a, land, occ, new_rng(0)) == Position(5, 4)


def test_move_prefers_nearest():
    levels = [[0] * 10 for _ in range(10)]
    levels[5][7] = 4  # two east
    levels[5][4] = 4  # one west
    land, _, occ, (a,) = world(levels, [(5, 5)])
    assert choose_move(a, land, occ, new_rng(0)) == Position(4, 5)


def test_move_stays_when_surrounded():
    levels = [[3] * 10 for _ in range(10)]
    levels[5][5] = 0
    around = [(5, 4), (5, 6), (4, 5), (6, 5)]
    land, _, occ, agents = world(levels, [(5, 5)] + around, vision=1)
    assert choose_move(agents[0], land, occ, new_rng(0)) == Position(5, 5)


def test_move_random_oracle():
    rng = np.random.default_rng(7)
    for trial in range(300):
        levels = rng.integers(0, 3, size=(10, 10)).tolist()
        spots = rng.choice(100, size=rng.integers(1, 30), replace=False)
        pos = [(int(c) % 10, int(c) // 10) for c in spots]
        v = int(rng.integers(1, 7))
        land, _, occ, agents = world(levels, pos, vision=v)
        x, y = pos[0]
        want = admissible_moves(x, y, v, levels, set(pos[1:]), 10, 10)
        got = choose_move(agents[0], land, occ, new_rng(trial))
        assert tuple(got) in want


def test_move_tie_is_uniform():
    levels = [[0] * 10 for _ in range(10)]
    for x, y in ((5, 4), (5, 6), (4, 5), (6, 5)):
        levels[y][x] = 2
    land, _, occ, (a,) = world(levels, [(5, 5)], vision=1)
    r = new_rng(11)
    picks = [choose_move(a, land, occ, r) for _ in range(4000)]
    counts = {p: picks.count(p) for p in set(picks)}
    assert len(counts) == 4 and all(900 < c < 1100 for c in counts.values())


def test_nearest_free_cell():
    land = Landscape(5, 5, [1] * 25)
    table, occ = AgentTable(), Occupancy(25)
    a = table.add(vision=1, metabolism=1, wealth=1, max_age=80, n_children_target=0, age_to_reproduce=20)
    occ.place(a, 12)
    c = nearest_free_cell(land, occ, 12, new_rng(0))
    assert c in {7, 11, 13, 17}
    full = Occupancy(1)
    full.grid[0] = 0
    assert nearest_free_cell(Landscape(1, 1, [1]), full, 0, new_rng(0)) is None


def breeder(wealth, k):
    land = generate_default(20, 20)
    table, occ = AgentTable(), Occupancy(land.n_cells)
    p = table.add(vision=4, metabolism=2, wealth=wealth, max_age=80, n_children_target=k, age_to_reproduce=20,
                  age=20)
    occ.place(p, 45)
    return land, table, occ, p


@pytest.mark.parametrize("wealth,k,child,left", [(20, 2, 5, 10), (8, 1, 4, 4), (13, 0, None, 13)])
def test_reproduce_split(wealth, k, child, left):
    land, table, occ, p = breeder(wealth, k)
    kids = reproduce(p, ScenarioSpec(), occ, land, new_rng(3))
    assert len(kids) == k
    assert p.wealth == left and p.has_bred
    for c in kids:
        assert c.wealth == child and c.age == 0
        assert c.vision == p.vision and c.metabolism == p.metabolism
        assert occ.at(c.cell) == c.id


def test_reproduce_no_room():
    land = Landscape(2, 1, [1, 1])
    table, occ = AgentTable(), Occupancy(2)
    p = table.add(vision=1, metabolism=1, wealth=20, max_age=80, n_children_target=3, age_to_reproduce=20, age=20)
    occ.place(p, 0)
    births = Births()
    kids = reproduce(p, ScenarioSpec(), occ, land, new_rng(0), births)
    assert len(kids) == 1 and births.skipped == 2
    # unplaced shares stay with the parent
    assert kids[0].wealth + p.wealth == pytest.approx(20)


def test_reproduce_ineligible():
    land, table, occ, p = breeder(10, 1)
    p.age = 19
    with pytest.raises(ValueError):
        reproduce(p, ScenarioSpec(), occ, land, new_rng(0))


def test_check_vital():
    t = AgentTable()
    a = t.add(vision=1, metabolism=1, wealth=0, max_age=70, n_children_target=0, age_to_reproduce=20, age=30)
    assert check_vital(a, 65) == (VitalStatus.DEAD_STARVATION, Transition.NONE)
    a.wealth = 1
    a.age = 70
    assert check_vital(a, 65) == (VitalStatus.ALIVE, Transition.RETIRES_NOW)
    a.age = 71
    assert check_vital(a, 65)[0] is VitalStatus.DEAD_OLD_AGE
    a.age = 65
    assert check_vital(a, 65) == (VitalStatus.ALIVE, Transition.RETIRES_NOW)
