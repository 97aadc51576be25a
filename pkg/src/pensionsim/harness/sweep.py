"""Parameter sweeps over a two-axis policy grid."""
from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional

from ..engine import RunResult, run
from ..rng import derive_seed
from ..scenario import ScenarioSpec
from .config import SweepConfig, validate_sweep

HEADLINE = ("population", "gini", "fund_per_retiree", "gdp_per_capita")
JOBS_ENV = "PENSIONSIM_JOBS"


@dataclass
class RunRecord:
    cell: int
    rep: int
    x: Any
    y: Any
    seed: int
    result: RunResult

    def window_means(self, window: int) -> dict[str, Optional[float]]:
        """Mean of each headline indicator over the last ``window`` ticks, skipping absent values."""
        tail = self.result.series[-window:]
        out = {}
        for name in HEADLINE:
            vals = [getattr(m, name) for m in tail]
            vals = [v for v in vals if v is not None]
            out[name] = sum(vals) / len(vals) if vals else None
        return out


@dataclass
class CellSummary:
    cell: int
    x: Any
    y: Any
    mean: dict
    min: dict
    max: dict


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[RunRecord]
    cells: list[CellSummary]

    def cell(self, x, y) -> CellSummary:
        for c in self.cells:
            if c.x == x and c.y == y:
                return c
        raise KeyError((x, y))


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV)
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ValueError(f"{JOBS_ENV} must be a positive integer, got {raw!r}") from None
        if n < 1:
            raise ValueError(f"{JOBS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


def _one(task) -> RunResult:
    scenario, ticks, seed, check = task
    return run(scenario, ticks, seed, check_ledgers=check)


def _summarize(records: list[RunRecord], cfg: SweepConfig) -> list[CellSummary]:
    by_cell: dict[int, list[RunRecord]] = {}
    for r in records:
        by_cell.setdefault(r.cell, []).append(r)
    out = []
    for c, recs in sorted(by_cell.items()):
        means = [r.window_means(cfg.final_window) for r in recs]
        agg: dict[str, dict] = {"mean": {}, "min": {}, "max": {}}
        for name in HEADLINE:
            vals = [m[name] for m in means if m[name] is not None]
            agg["mean"][name] = math.fsum(vals) / len(vals) if vals else None
            agg["min"][name] = min(vals) if vals else None
            agg["max"][name] = max(vals) if vals else None
        out.append(CellSummary(c, recs[0].x, recs[0].y, agg["mean"], agg["min"], agg["max"]))
    return out


def _warm_up(scenario: ScenarioSpec) -> None:
    # compile the kernels once so forked workers inherit them
    run(scenario, 1, 0, check_ledgers=False)


def run_sweep(cfg: SweepConfig, jobs: Optional[int] = None) -> SweepResult:
    scenarios = validate_sweep(cfg)
    cells = cfg.cells()
    keys, tasks = [], []
    for (c, x, y), scen in zip(cells, scenarios):
        for r in range(cfg.replications):
            seed = derive_seed(cfg.master_seed, c, r)
            keys.append((c, r, x, y, seed))
            tasks.append((scen, cfg.ticks, seed, cfg.check_ledgers))
    jobs = default_jobs() if jobs is None else jobs
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    if jobs == 1 or len(tasks) == 1:
        results = [_one(t) for t in tasks]
    else:
        _warm_up(scenarios[0])
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            results = list(pool.map(_one, tasks, chunksize=1))
    records = [RunRecord(c, r, x, y, seed, res) for (c, r, x, y, seed), res in zip(keys, results)]
    return SweepResult(cfg, records, _summarize(records, cfg))
