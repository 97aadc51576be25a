"""Macro indicators computed once per tick."""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Optional, Sequence

import numpy as np

# CSV column order; d1..d10 follow
TICK_COLUMNS = ("tick", "population", "working_count", "retired_count", "unbred_count", "gdp",
                "gdp_per_capita", "gini", "fund_balance", "fund_per_retiree", "mean_vision",
                "mean_metabolism")
DECILE_COLUMNS = tuple(f"d{i}" for i in range(1, 11))
CSV_COLUMNS = TICK_COLUMNS + DECILE_COLUMNS


@dataclass
class TickMetrics:
    tick: int
    population: int
    working_count: int
    retired_count: int
    unbred_count: int
    gdp: float
    gdp_per_capita: Optional[float]
    gini: float
    fund_balance: float
    fund_per_retiree: Optional[float]
    mean_vision: Optional[float]
    mean_metabolism: Optional[float]
    decile_shares: Optional[tuple[float, ...]]

    def row(self) -> list:
        """Values in CSV column order; ``None`` marks an absent value."""
        vals = [getattr(self, c) for c in TICK_COLUMNS]
        vals.extend(self.decile_shares if self.decile_shares is not None else [None] * 10)
        return vals

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _as_wealths(wealths) -> np.ndarray:
    w = np.asarray(wealths, dtype=np.float64).reshape(-1)
    if w.size and w.min() < 0:
        raise ValueError(f"negative wealth {w.min()!r}")
    return w


def gini(wealths) -> float:
    """Gini coefficient through the sorted form.

    Equal to ``sum_ij |w_i - w_j| / (2 n^2 mean)``; 0 for empty or all-zero input.
    """
    w = np.sort(_as_wealths(wealths))
    n = w.size
    total = w.sum()
    if n == 0 or total == 0:
        return 0.0
    ranks = np.arange(1, n + 1, dtype=np.float64)
    g = 2.0 * np.dot(ranks, w) / (n * total) - (n + 1) / n
    return float(min(max(g, 0.0), 1.0))


def gini_pairwise(wealths: Sequence[float]) -> float:
    """Brute-force O(n^2) Gini, kept as an independent reference."""
    w = [float(x) for x in wealths]
    n = len(w)
    total = sum(w)
    if n == 0 or total == 0:
        return 0.0
    s = 0.0
    for a in w:
        for b in w:
            s += abs(a - b)
    return s / (2.0 * n * n * (total / n))


@dataclass(frozen=True)
class LorenzCurve:
    points: tuple[tuple[float, float], ...]

    def area_gap(self) -> float:
        """Twice the area between the diagonal and the curve (trapezoid rule)."""
        under = 0.0
        for (x0, y0), (x1, y1) in zip(self.points, self.points[1:]):
            under += (x1 - x0) * (y0 + y1) / 2.0
        return 1.0 - 2.0 * under


def lorenz(wealths) -> LorenzCurve:
    w = np.sort(_as_wealths(wealths))
    n = w.size
    if n == 0:
        return LorenzCurve(((0.0, 0.0), (1.0, 1.0)))
    total = w.sum()
    xs = np.arange(1, n + 1) / n
    ys = np.cumsum(w) / total if total > 0 else xs.copy()
    pts = [(0.0, 0.0)] + list(zip(xs.tolist(), ys.tolist()))
    pts[-1] = (1.0, 1.0)
    return LorenzCurve(tuple(pts))


def decile_of_rank(rank, n: int):
    """1-based decile of 1-based ``rank``: ranks in ((d-1)n/10, dn/10] form decile d."""
    return -(-10 * rank // n)


def deciles(wealths, ids=None) -> Optional[tuple[float, ...]]:
    """Share of total wealth per tenth of the population, poorest first.

    Equal wealths are ranked by ``ids``. With zero total wealth each decile's
    share is its head-count fraction.
    """
    w = _as_wealths(wealths)
    n = w.size
    if n == 0:
        return None
    keys = np.arange(n) if ids is None else np.asarray(ids)
    order = np.lexsort((keys, w))
    d = decile_of_rank(np.arange(1, n + 1), n) - 1
    counts = np.bincount(d, minlength=10)
    total = w.sum()
    if total == 0:
        return tuple((counts / n).tolist())
    sums = np.bincount(d, weights=w[order], minlength=10)
    return tuple((sums / total).tolist())


def tick_indicators(tick: int, table, working: np.ndarray, retired: np.ndarray, fund_balance: float,
                    gdp: float) -> TickMetrics:
    """Indicators at the end of a tick.

    ``gdp`` is this tick's total post-productivity, pre-tax income.
    """
    n_work, n_ret = len(working), len(retired)
    population = n_work + n_ret
    living = np.concatenate((working, retired))
    wealths = table.wealth[living]
    if population:
        gdp_pc = float(gdp) / population
        mean_v = float(table.vision[living].mean())
        mean_m = float(table.metabolism[living].mean())
        shares = deciles(wealths, living)
    else:
        gdp_pc = mean_v = mean_m = shares = None
    return TickMetrics(
        tick=tick,
        population=population,
        working_count=n_work,
        retired_count=n_ret,
        unbred_count=int(population - table.has_bred[living].sum()),
        gdp=float(gdp),
        gdp_per_capita=gdp_pc,
        gini=gini(wealths),
        fund_balance=float(fund_balance),
        fund_per_retiree=float(fund_balance) / n_ret if n_ret else None,
        mean_vision=mean_v,
        mean_metabolism=mean_m,
        decile_shares=shares,
    )
