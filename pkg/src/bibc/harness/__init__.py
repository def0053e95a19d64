"""Experiment orchestration: config loading, scenario presets, CSV artifacts."""

from .config import ConfigError, ScenarioConfig, load_config
from .csvio import Table, emit_csv
from .runner import PRESETS, RunArtifact, run_scenario

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "Table", "emit_csv", "PRESETS", "RunArtifact", "run_scenario"]
