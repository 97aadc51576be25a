import numpy as np
import pytest
from hypothesis import given, strategies as st

from pensionsim.metrics import CSV_COLUMNS, decile_of_rank, deciles, gini, gini_pairwise, lorenz


def test_gini_examples():
    assert gini([5, 5, 5]) == 0
    assert gini([0, 10]) == pytest.approx(0.5, abs=1e-12)
    assert gini([]) == 0
    assert gini([0, 0]) == 0


def test_gini_negative():
    with pytest.raises(ValueError):
        gini([1, -1])
    with pytest.raises(ValueError):
        lorenz([-0.5])


def test_gini_matches_pairwise_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        w = rng.exponential(5, size=rng.integers(1, 120))
        assert abs(gini(w) - gini_pairwise(w)) < 1e-9


@given(st.lists(st.floats(0, 1e6), min_size=1, max_size=60), st.floats(0.01, 1000))
def test_gini_scale_invariant(w, c):
    if sum(w) == 0:
        return
    assert gini([c * x for x in w]) == pytest.approx(gini(w), abs=1e-9)


def test_lorenz():
    eq = lorenz([4, 4, 4, 4])
    assert all(abs(x - y) < 1e-12 for x, y in eq.points)
    pts = lorenz([0, 0, 10]).points
    assert (pytest.approx(2 / 3), 0.0) in [(x, y) for x, y in pts]
    assert pts[-1] == (1.0, 1.0)


def test_lorenz_gini_identity():
    rng = np.random.default_rng(2)
    for n in (1, 2, 7, 50, 200):
        w = rng.pareto(2.0, n)
        assert abs(lorenz(w).area_gap() - gini(w)) <= 1.0 / n


def test_deciles_examples():
    assert deciles([1.0] * 10) == pytest.approx((0.1,) * 10)
    assert deciles([0] * 9 + [5]) == pytest.approx((0,) * 9 + (1,))
    assert deciles([]) is None
    assert deciles([0, 0, 0]) is not None and sum(deciles([0, 0, 0])) == pytest.approx(1)


def test_decile_sizes_n23():
    sizes = np.bincount(decile_of_rank(np.arange(1, 24), 23), minlength=11)[1:]
    assert sizes.sum() == 23
    assert sizes.max() - sizes.min() <= 1


@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=300))
def test_decile_invariants(w):
    s = deciles(w)
    assert abs(sum(s) - 1) < 1e-9
    assert all(x >= 0 for x in s)


def test_csv_columns():
    assert CSV_COLUMNS[:2] == ("tick", "population")
    assert CSV_COLUMNS[-1] == "d10" and len(CSV_COLUMNS) == 22
