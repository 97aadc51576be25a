import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pensionsim.landscape import (Landscape, MapParseError, Position, export_map, generate_default, grow_back,
                                  harvest, load_map, torus_delta, visible_positions)


def test_default_map_peak_and_corner():
    land = generate_default(50, 50)
    assert land.capacity_at(Position(37, 12)) == 4
    assert land.level_at(Position(37, 12)) == 4
    assert land.capacity_at(Position(12, 37)) == 4
    assert land.capacity_at(Position(0, 0)) == 0
    assert np.array_equal(land.level, land.capacity)


def test_default_map_too_small():
    with pytest.raises(ValueError):
        generate_default(5, 50)


@pytest.mark.parametrize("w,h", [(10, 10), (30, 20), (64, 48)])
def test_level_equals_capacity_any_size(w, h):
    land = generate_default(w, h)
    assert np.array_equal(land.level, land.capacity)
    assert land.capacity.max() == 4


def test_load_small_map():
    land = load_map("0 1\n2 3\n")
    assert land.rows() == [[0, 1], [2, 3]]
    assert land.capacity_at(Position(1, 0)) == 1


def test_load_map_errors():
    with pytest.raises(MapParseError) as e:
        load_map("0 1\n2 5\n")
    assert (e.value.line, e.value.column) == (2, 2)
    with pytest.raises(MapParseError) as e:
        load_map("0 1\n2\n")
    assert e.value.line == 2
    with pytest.raises(MapParseError):
        load_map("# only a comment\n")


def test_round_trip_default():
    land = generate_default(50, 50)
    assert load_map(export_map(land)) == land


@settings(max_examples=50)
@given(st.integers(1, 8), st.integers(1, 8), st.data())
def test_round_trip_random(w, h, data):
    caps = data.draw(st.lists(st.integers(0, 4), min_size=w * h, max_size=w * h))
    land = Landscape(w, h, caps)
    assert load_map(export_map(land)) == land


@pytest.mark.parametrize("level,cap,expect", [(2, 4, 3), (4, 4, 4), (0, 0, 0)])
def test_grow_back(level, cap, expect):
    land = Landscape(1, 1, [cap], level=[level])
    grow_back(land)
    assert land.level[0] == expect


def test_grow_back_restores_capacity():
    land = generate_default(20, 20)
    land.level[:] = 0
    for _ in range(4):
        grow_back(land)
    assert np.array_equal(land.level, land.capacity)


def test_harvest():
    land = Landscape(2, 1, [3, 0])
    assert harvest(land, Position(0, 0)) == 3
    assert land.level_at(Position(0, 0)) == 0
    assert harvest(land, Position(0, 0)) == 0
    assert harvest(land, Position(1, 0)) == 0


def test_visibility():
    land = generate_default(50, 50)
    assert set(visible_positions(land, Position(5, 5), 1)) == {(5, 4), (5, 6), (6, 5), (4, 5)}
    v2 = visible_positions(land, Position(0, 0), 2)
    assert Position(49, 0) in v2 and Position(0, 48) in v2
    assert len(visible_positions(land, Position(10, 10), 6)) == 24


def test_visibility_wrap_dedup():
    land = Landscape(4, 4, [1] * 16)
    vis = visible_positions(land, Position(0, 0), 3)
    assert len(vis) == len(set(vis))
    assert Position(0, 0) not in vis


def test_torus_delta():
    assert torus_delta(0, 49, 50) == 1
    assert torus_delta(3, 10, 50) == 7
    assert torus_delta(0, 25, 50) == 25
