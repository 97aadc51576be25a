"""Scenario description and the ``S(SS, PD, D)`` shorthand."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .pension import PolicyParams
from .productivity import DEFAULT_KNOTS
from .rng import ClampedNormal, DistributionSpec, UniformInt

UNIFORM_TRAITS: dict[str, DistributionSpec] = {
    "vision": UniformInt(1, 6),
    "metabolism": UniformInt(1, 4),
    "age_to_reproduce": UniformInt(15, 50),
}
NORMAL_TRAITS: dict[str, DistributionSpec] = {
    "vision": ClampedNormal(3.5, 0.8, 1, 6, "nearest-int"),
    "metabolism": ClampedNormal(2.5, 0.5, 1, 4, "nearest-int"),
    "age_to_reproduce": ClampedNormal(32.5, 5.8, 15, 50, "nearest-int"),
}
TRAITS = ("vision", "metabolism", "age_to_reproduce")


@dataclass(frozen=True)
class ScenarioSpec:
    dist_kind: str = "U"
    policy: PolicyParams = field(default_factory=PolicyParams)
    uniform_traits: dict = field(default_factory=lambda: dict(UNIFORM_TRAITS))
    normal_traits: dict = field(default_factory=lambda: dict(NORMAL_TRAITS))
    children: DistributionSpec = UniformInt(0, 3)
    max_age: DistributionSpec = UniformInt(60, 100)
    endowment: DistributionSpec = UniformInt(5, 25)
    initial_population: int = 400
    width: int = 50
    height: int = 50
    growback_rate: float = 1.0
    map_text: Optional[str] = None
    knots: tuple = DEFAULT_KNOTS
    leftover_stays: bool = False
    retire_before_breed: bool = True

    def __post_init__(self):
        if self.dist_kind not in ("U", "N"):
            raise ValueError(f"dist_kind must be 'U' or 'N', got {self.dist_kind!r}")
        if self.initial_population < 0:
            raise ValueError("initial_population must be non-negative")

    @property
    def social_services(self) -> bool:
        return self.policy.social_services

    @property
    def productivity_decay(self) -> bool:
        return self.policy.productivity_decay

    def trait(self, name: str) -> DistributionSpec:
        table = self.uniform_traits if self.dist_kind == "U" else self.normal_traits
        return table[name]

    def max_vision(self) -> int:
        # children copy their parent's vision, so the initial bound holds for life
        return int(self.trait("vision").hi)

    def max_age_bound(self) -> int:
        return int(self.max_age.hi)

    def triple(self) -> tuple[bool, bool, str]:
        return self.social_services, self.productivity_decay, self.dist_kind

    def with_policy(self, **changes) -> "ScenarioSpec":
        return replace(self, policy=replace(self.policy, **changes))


class ScenarioParseError(ValueError):
    def __init__(self, text: str, pos: int, expected: str):
        super().__init__(f"bad scenario {text!r} at position {pos}: expected {expected}")
        self.pos = pos
        self.expected = expected


_SWITCH = {"ON": True, "1": True, "OFF": False, "0": False}
_TOKEN = re.compile(r"\s*([A-Za-z0-9]+|\S)")


def parse_scenario(text: str) -> tuple[bool, bool, str]:
    """``"S(ON, OFF, U)"`` -> ``(True, False, "U")``. Case-insensitive."""
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            break  # trailing whitespace
        tokens.append((m.start(1), m.group(1).upper()))
        pos = m.end()
    grammar = [("S", "'S'"), ("(", "'('"), (_SWITCH, "ON|OFF|1|0"), (",", "','"),
               (_SWITCH, "ON|OFF|1|0"), (",", "','"), ({"U": "U", "N": "N"}, "U|N"), (")", "')'")]
    values = []
    for k, (want, expected) in enumerate(grammar):
        if k >= len(tokens):
            raise ScenarioParseError(text, len(text), expected)
        at, tok = tokens[k]
        if isinstance(want, dict):
            if tok not in want:
                raise ScenarioParseError(text, at, expected)
            values.append(want[tok])
        elif tok != want:
            raise ScenarioParseError(text, at, expected)
    if len(tokens) > len(grammar):
        raise ScenarioParseError(text, tokens[len(grammar)][0], "end of input")
    return values[0], values[1], values[2]


def render_scenario(social_services: bool, productivity_decay: bool, dist_kind: str) -> str:
    return f"S({'ON' if social_services else 'OFF'}, {'ON' if productivity_decay else 'OFF'}, {dist_kind})"


def scenario_from_text(text: str, **kwargs) -> ScenarioSpec:
    ss, pd, dist = parse_scenario(text)
    policy = kwargs.pop("policy", PolicyParams())
    policy = replace(policy, social_services=ss, productivity_decay=pd)
    return ScenarioSpec(dist_kind=dist, policy=policy, **kwargs)
