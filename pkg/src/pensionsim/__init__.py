"""Agent-based simulation of pension policy on a sugarscape-style landscape."""
from .engine import RunResult, SimState, init_run, run, tick
from .pension import PolicyParams
from .scenario import ScenarioSpec, parse_scenario, scenario_from_text

__all__ = ["PolicyParams", "RunResult", "ScenarioSpec", "SimState", "init_run", "parse_scenario", "run",
           "scenario_from_text", "tick"]
__version__ = "0.1.0"
