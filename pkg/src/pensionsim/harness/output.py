"""CSV and JSON outputs of runs and sweeps."""
from __future__ import annotations

import csv
import json
import tempfile
from pathlib import Path

from ..metrics import CSV_COLUMNS
from ..scenario import render_scenario
from .sweep import HEADLINE, RunRecord, SweepResult


class OutputError(OSError):
    pass


def preflight(out_dir) -> Path:
    """Create ``out_dir`` and prove it is writable before any compute starts."""
    p = Path(out_dir)
    try:
        p.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(dir=p, prefix=".probe-"):
            pass
    except OSError as e:
        raise OutputError(f"output directory {p} is not writable: {e}") from None
    return p


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))
    return v


def write_timeseries(path: Path, record: RunRecord) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for m in record.result.series:
            w.writerow([_cell(v) for v in m.row()])


def run_summary(record: RunRecord, master_seed: int, window: int) -> dict:
    res = record.result
    scen = res.scenario
    pol = scen.policy
    d = res.diagnostics
    return {
        "seed": record.seed,
        "master_seed": master_seed,
        "cell": record.cell,
        "rep": record.rep,
        "x": record.x,
        "y": record.y,
        "scenario": render_scenario(*scen.triple()),
        "ticks": res.ticks,
        "policy": {
            "retirement_age": pol.retirement_age,
            "pension_tax_pct": pol.pension_tax_pct,
            "fixed_fee": pol.fixed_fee,
            "fixed_fee_mode": pol.fixed_fee_mode,
            "social_services": pol.social_services,
            "productivity_decay": pol.productivity_decay,
        },
        "max_age": repr(scen.max_age),
        "fund": res.fund.totals(),
        "deaths": {
            "starvation_working": d.deaths_starvation_working,
            "starvation_retired": d.deaths_starvation_retired,
            "old_age": d.deaths_old_age,
        },
        "births": d.births,
        "skipped_births": d.skipped_births,
        "retirements": d.retirements,
        "initial_population": res.initial_population,
        "final_population": res.final_working + res.final_retired,
        "final_window": record.window_means(window),
    }


def write_run(out_dir: Path, record: RunRecord, master_seed: int, window: int) -> None:
    write_timeseries(out_dir / f"timeseries_{record.cell}_{record.rep}.csv", record)
    text = json.dumps(run_summary(record, master_seed, window), indent=2, sort_keys=True)
    (out_dir / f"summary_{record.cell}_{record.rep}.json").write_text(text + "\n", encoding="utf-8")


def write_outputs(out_dir, result: SweepResult) -> Path:
    cfg = result.config
    out = preflight(out_dir)
    for rec in result.records:
        write_run(out, rec, cfg.master_seed, cfg.final_window)
    with open(out / "aggregate.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("x", "y", "rep") + HEADLINE)
        for rec in result.records:
            means = rec.window_means(cfg.final_window)
            w.writerow([_cell(rec.x), _cell(rec.y), rec.rep] + [_cell(means[h]) for h in HEADLINE])
    with open(out / "cells.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        head = ["cell", "x", "y"]
        for h in HEADLINE:
            head += [f"{h}_mean", f"{h}_min", f"{h}_max"]
        w.writerow(head)
        for c in result.cells:
            row = [c.cell, _cell(c.x), _cell(c.y)]
            for h in HEADLINE:
                row += [_cell(c.mean[h]), _cell(c.min[h]), _cell(c.max[h])]
            w.writerow(row)
    return out
