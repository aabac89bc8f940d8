"""Scenario configs, Monte Carlo runner, scoring and the ``subspace-loc`` CLI."""

from .config import ScenarioConfig, load_config, loads_config, parse_angle
from .presets import load_preset, preset_names
from .runner import RunReport, run_scenario
from .scoring import Score, match_and_score, normalize_spectrum, rmse

__all__ = [
    "RunReport", "ScenarioConfig", "Score", "load_config", "load_preset", "loads_config",
    "match_and_score", "normalize_spectrum", "parse_angle", "preset_names", "rmse", "run_scenario",
]
