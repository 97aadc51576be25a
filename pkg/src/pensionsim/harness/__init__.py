"""Sweep harness: configs, parallel runs, output files and the CLI."""
from .config import Axis, ConfigError, SweepConfig, config_from_dict, load_config, validate_sweep
from .output import write_outputs
from .sweep import SweepResult, run_sweep

__all__ = ["Axis", "ConfigError", "SweepConfig", "SweepResult", "config_from_dict", "load_config",
           "run_sweep", "validate_sweep", "write_outputs"]
