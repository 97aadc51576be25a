"""JSON run/sweep configuration and its validation.

Example::

    {
      "scenario": "S(OFF, OFF, U)",
      "ticks": 500,
      "replications": 5,
      "master_seed": 7,
      "axis_x": {"name": "fixed_fee", "values": [0, 0.25, 0.5, 1, 2]},
      "axis_y": {"name": "pension_tax_pct", "values": [0, 10, 20, 40]},
      "policy": {"retirement_age": 65, "pension_tax_pct": 0, "fixed_fee": 0.0},
      "model": {"initial_population": 400},
      "output_dir": "out"
    }

``policy`` keys: retirement_age, pension_tax_pct, fixed_fee, fixed_fee_mode.
``model`` keys: initial_population, width, height, growback_rate,
map_file, knots_file, leftover_stays, retire_before_breed, children,
max_age, endowment (distributions as ``{"kind": "uniform", "lo", "hi"}`` or
``{"kind": "normal", "mu", "sigma", "lo", "hi", "rounding"}``).
Relative file paths resolve against the config file's directory.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from ..pension import PolicyParams
from ..productivity import build_akima, parse_knots
from ..rng import ClampedNormal, DistributionSpec, UniformInt, derive_seed
from ..scenario import ScenarioSpec, parse_scenario

AXIS_PARAMS = ("retirement_age", "max_age_mean", "pension_tax_pct", "fixed_fee")
MAX_AGE_HALF_RANGE = 20
MAX_AGE_SIGMA = 6.7

_TOP_KEYS = {"scenario", "ticks", "replications", "master_seed", "axis_x", "axis_y", "policy", "model",
             "output_dir", "final_window", "check_ledgers"}
_POLICY_KEYS = {"retirement_age", "pension_tax_pct", "fixed_fee", "fixed_fee_mode"}
_MODEL_KEYS = {"initial_population", "width", "height", "growback_rate", "map_file", "knots_file",
               "leftover_stays", "retire_before_breed", "children", "max_age", "endowment"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple

    def __post_init__(self):
        if self.name not in AXIS_PARAMS:
            raise ConfigError(f"unknown axis parameter {self.name!r}; expected one of {', '.join(AXIS_PARAMS)}")
        if not self.values:
            raise ConfigError(f"axis {self.name!r} has no values")


@dataclass
class SweepConfig:
    scenario: str = "S(OFF, OFF, U)"
    ticks: int = 500
    replications: int = 5
    master_seed: int = 0
    axis_x: Optional[Axis] = None
    axis_y: Optional[Axis] = None
    policy: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    output_dir: Optional[str] = None
    final_window: int = 100
    check_ledgers: bool = True
    base_dir: Path = field(default=Path("."), repr=False)

    def axes(self) -> tuple[Axis, Axis]:
        if self.axis_x is None or self.axis_y is None:
            raise ConfigError("a sweep needs both axis_x and axis_y")
        return self.axis_x, self.axis_y

    def cells(self) -> list[tuple[int, Any, Any]]:
        """``(cell_index, x, y)`` with x outermost."""
        ax, ay = self.axes()
        return [(i * len(ay.values) + j, x, y)
                for i, x in enumerate(ax.values) for j, y in enumerate(ay.values)]

    def base_scenario(self) -> ScenarioSpec:
        try:
            ss, pd, dist = parse_scenario(self.scenario)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        pol = dict(self.policy)
        try:
            policy = PolicyParams(social_services=ss, productivity_decay=pd, **pol)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"policy: {e}") from None
        m = dict(self.model)
        kwargs: dict[str, Any] = {}
        for key in ("initial_population", "width", "height"):
            if key in m:
                kwargs[key] = _int(m[key], f"model.{key}")
        if "growback_rate" in m:
            kwargs["growback_rate"] = float(m["growback_rate"])
        for key in ("leftover_stays", "retire_before_breed"):
            if key in m:
                kwargs[key] = _bool(m[key], f"model.{key}")
        for key in ("children", "max_age", "endowment"):
            if key in m:
                kwargs[key] = parse_distribution(m[key], f"model.{key}")
        if m.get("map_file"):
            kwargs["map_text"] = self._read(m["map_file"])
        if m.get("knots_file"):
            knots = tuple(parse_knots(self._read(m["knots_file"])))
            build_akima(knots)
            kwargs["knots"] = knots
        try:
            return ScenarioSpec(dist_kind=dist, policy=policy, **kwargs)
        except ValueError as e:
            raise ConfigError(str(e)) from None

    def _read(self, path: str) -> str:
        p = Path(path)
        if not p.is_absolute():
            p = self.base_dir / p
        try:
            return p.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read {p}: {e}") from None

    def cell_scenario(self, base: ScenarioSpec, x, y) -> ScenarioSpec:
        ax, ay = self.axes()
        return apply_axes(base, {ax.name: x, ay.name: y})

    def seeds(self) -> dict[tuple[int, int], int]:
        return {(c, r): derive_seed(self.master_seed, c, r)
                for c, _, _ in self.cells() for r in range(self.replications)}


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v:
        raise ConfigError(f"{where} must be an integer, got {v!r}")
    return int(v)


def _bool(v, where: str) -> bool:
    if not isinstance(v, bool):
        raise ConfigError(f"{where} must be true or false, got {v!r}")
    return v


def parse_distribution(obj, where: str = "distribution") -> DistributionSpec:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError(f"{where} must be an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "uniform":
            return UniformInt(_int(obj["lo"], f"{where}.lo"), _int(obj["hi"], f"{where}.hi"))
        if kind == "normal":
            return ClampedNormal(float(obj["mu"]), float(obj["sigma"]), float(obj["lo"]), float(obj["hi"]),
                                 obj.get("rounding", "nearest-int"))
    except KeyError as e:
        raise ConfigError(f"{where}: missing {e.args[0]!r}") from None
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None
    raise ConfigError(f"{where}: kind must be 'uniform' or 'normal', got {kind!r}")


def max_age_distribution(mean: float, retirement_age: int, dist_kind: str) -> DistributionSpec:
    """Maximum-age law centred on ``mean``, clipped to outlive retirement."""
    lo = max(math.ceil(mean - MAX_AGE_HALF_RANGE), retirement_age + 1)
    hi = math.floor(mean + MAX_AGE_HALF_RANGE)
    if lo > hi:
        raise ConfigError(f"max_age_mean {mean} leaves no ages above retirement age {retirement_age}")
    if dist_kind == "U":
        return UniformInt(lo, hi)
    return ClampedNormal(float(mean), MAX_AGE_SIGMA, float(lo), float(hi), "nearest-int")


def apply_axes(base: ScenarioSpec, values: dict) -> ScenarioSpec:
    policy_changes = {k: v for k, v in values.items() if k in ("retirement_age", "pension_tax_pct", "fixed_fee")}
    try:
        if "pension_tax_pct" in policy_changes:
            policy_changes["pension_tax_pct"] = _int(policy_changes["pension_tax_pct"], "pension_tax_pct")
        if "retirement_age" in policy_changes:
            policy_changes["retirement_age"] = _int(policy_changes["retirement_age"], "retirement_age")
        if "fixed_fee" in policy_changes:
            policy_changes["fixed_fee"] = float(policy_changes["fixed_fee"])
        scen = base.with_policy(**policy_changes) if policy_changes else base
    except ValueError as e:
        raise ConfigError(str(e)) from None
    if "max_age_mean" in values:
        scen = replace(scen, max_age=max_age_distribution(
            float(values["max_age_mean"]), scen.policy.retirement_age, scen.dist_kind))
    return scen


def _axis(obj, key: str) -> Optional[Axis]:
    if obj is None:
        return None
    if not isinstance(obj, dict) or "name" not in obj or "values" not in obj:
        raise ConfigError(f"{key} must be an object with 'name' and 'values'")
    values = obj["values"]
    if not isinstance(values, list):
        raise ConfigError(f"{key}.values must be a list")
    return Axis(obj["name"], tuple(values))


def config_from_dict(data: dict, base_dir: Path = Path(".")) -> SweepConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    policy = data.get("policy", {}) or {}
    model = data.get("model", {}) or {}
    if set(policy) - _POLICY_KEYS:
        raise ConfigError(f"unknown policy keys: {', '.join(sorted(set(policy) - _POLICY_KEYS))}")
    if set(model) - _MODEL_KEYS:
        raise ConfigError(f"unknown model keys: {', '.join(sorted(set(model) - _MODEL_KEYS))}")
    cfg = SweepConfig(
        scenario=data.get("scenario", "S(OFF, OFF, U)"),
        ticks=_int(data.get("ticks", 500), "ticks"),
        replications=_int(data.get("replications", 5), "replications"),
        master_seed=_int(data.get("master_seed", 0), "master_seed"),
        axis_x=_axis(data.get("axis_x"), "axis_x"),
        axis_y=_axis(data.get("axis_y"), "axis_y"),
        policy=dict(policy),
        model=dict(model),
        output_dir=data.get("output_dir"),
        final_window=_int(data.get("final_window", 100), "final_window"),
        check_ledgers=_bool(data.get("check_ledgers", True), "check_ledgers"),
        base_dir=base_dir,
    )
    if cfg.ticks < 1:
        raise ConfigError("ticks must be at least 1")
    if cfg.replications < 1:
        raise ConfigError("replications must be at least 1")
    if cfg.final_window < 1:
        raise ConfigError("final_window must be at least 1")
    return cfg


def load_config(path) -> SweepConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{p}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None
    return config_from_dict(data, p.parent)


def find_collisions(seeds: dict) -> list[tuple]:
    """Groups of (cell, rep) keys that share a derived seed."""
    by_seed: dict[int, list] = {}
    for key, s in seeds.items():
        by_seed.setdefault(s, []).append(key)
    return [tuple(keys) for keys in by_seed.values() if len(keys) > 1]


def validate_sweep(cfg: SweepConfig, seeder=derive_seed) -> list[ScenarioSpec]:
    """Build every cell's scenario and scan derived seeds; raises ConfigError on any problem."""
    base = cfg.base_scenario()
    scenarios = [cfg.cell_scenario(base, x, y) for _, x, y in cfg.cells()]
    seeds = {(c, r): seeder(cfg.master_seed, c, r)
             for c, _, _ in cfg.cells() for r in range(cfg.replications)}
    clashes = find_collisions(seeds)
    if clashes:
        raise ConfigError(f"derived seeds collide for (cell, rep) groups: {clashes[:5]}")
    return scenarios
