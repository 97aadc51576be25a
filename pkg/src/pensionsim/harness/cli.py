"""Command line entry point: ``pensionsim run|sweep|map|validate``."""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from ..landscape import MapParseError, export_map, generate_default, load_map
from ..rng import derive_seed
from .config import Axis, ConfigError, SweepConfig, load_config, validate_sweep
from .output import OutputError, preflight, write_outputs
from .sweep import JOBS_ENV, default_jobs, run_sweep


def _fail(msg: str) -> int:
    print(f"pensionsim: error: {msg}", file=sys.stderr)
    return 1


def single_run_config(cfg: SweepConfig) -> SweepConfig:
    """Collapse a config to a 1x1 grid with one replication at its base policy."""
    base = cfg.base_scenario().policy
    cfg.axis_x = Axis("retirement_age", (base.retirement_age,))
    cfg.axis_y = Axis("pension_tax_pct", (base.pension_tax_pct,))
    cfg.replications = 1
    return cfg


def cmd_run(args) -> int:
    cfg = load_config(args.config) if args.config else SweepConfig()
    if args.scenario is not None:
        cfg.scenario = args.scenario
    if args.ticks is not None:
        cfg.ticks = args.ticks
    if args.seed is not None:
        cfg.master_seed = args.seed
    if cfg.ticks < 1:
        raise ConfigError("ticks must be at least 1")
    cfg = single_run_config(cfg)
    validate_sweep(cfg)
    out = preflight(args.out)
    t0 = time.perf_counter()
    result = run_sweep(cfg, jobs=1)
    write_outputs(out, result)
    rec = result.records[0]
    last = rec.result.series[-1]
    print(f"seed {rec.seed}: {cfg.ticks} ticks in {time.perf_counter() - t0:.2f}s, "
          f"population {last.population}, gini {last.gini:.3f} -> {out}")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out_dir = args.out or cfg.output_dir
    if not out_dir:
        raise ConfigError("no output directory: pass --out or set output_dir")
    scenarios = validate_sweep(cfg)
    out = preflight(out_dir)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    t0 = time.perf_counter()
    result = run_sweep(cfg, jobs=jobs)
    write_outputs(out, result)
    print(f"{len(scenarios)} cells x {cfg.replications} replications in "
          f"{time.perf_counter() - t0:.2f}s with {jobs} job(s) -> {out}")
    return 0


def cmd_map(args) -> int:
    if args.emit:
        if args.width < 10 or args.height < 10:
            raise ConfigError("map dimensions must be at least 10")
        land = generate_default(args.width, args.height)
        Path(args.emit).write_text(export_map(land), encoding="utf-8")
        print(f"wrote {land.width}x{land.height} map to {args.emit}")
        return 0
    try:
        text = Path(args.check).read_text(encoding="utf-8")
    except OSError as e:
        return _fail(f"cannot read {args.check}: {e}")
    try:
        land = load_map(text)
    except MapParseError as e:
        return _fail(f"{args.check}: {e}")
    print(f"{args.check}: {land.width}x{land.height}, total capacity {int(land.capacity.sum())}")
    return 0


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    if cfg.axis_x is None and cfg.axis_y is None:
        cfg = single_run_config(cfg)
    scenarios = validate_sweep(cfg, seeder=derive_seed)
    print(f"{args.config}: ok, {len(scenarios)} cells x {cfg.replications} replications, "
          f"{cfg.ticks} ticks")
    return 0


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {n}")
    return n


def _nonneg(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pensionsim", description="Agent-based pension policy simulator.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="one simulation run")
    r.add_argument("--scenario", help='scenario such as "S(ON, OFF, U)"')
    r.add_argument("--ticks", type=_positive)
    r.add_argument("--seed", type=_nonneg, help="master seed; the run uses the seed of cell 0, rep 0")
    r.add_argument("--config", help="JSON config supplying policy and model settings")
    r.add_argument("--out", required=True, help="output directory")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="policy grid sweep")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="output directory (default: output_dir from the config)")
    s.add_argument("--jobs", type=_positive, help=f"worker processes (default: ${JOBS_ENV} or CPU count)")
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("map", help="emit or check a landscape file")
    g = m.add_mutually_exclusive_group(required=True)
    g.add_argument("--emit", metavar="FILE", help="write the default map")
    g.add_argument("--check", metavar="FILE", help="parse a map and report problems")
    m.add_argument("--width", type=int, default=50)
    m.add_argument("--height", type=int, default=50)
    m.set_defaults(func=cmd_map)

    v = sub.add_parser("validate", help="check a config without running it")
    v.add_argument("--config", required=True)
    v.set_defaults(func=cmd_validate)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, OutputError, ValueError) as e:
        return _fail(str(e))
    except OSError as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
