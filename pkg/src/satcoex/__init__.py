"""Terrestrial 5G / satellite-downlink coexistence simulator and BS controller."""

from .antenna import ArrayConfig, beam_gain_dbi, build_codebook
from .context import ThresholdConfig, WeatherContext, load_weather_snapshot, select_interference_threshold
from .control import (
    ControlDecision,
    SearchSpaceTooLarge,
    baseline_exclusion_zone,
    baseline_in_threshold,
    brute_force_control,
    cat3s_control,
    check_constraints,
)
from .link_metrics import LinkEnv, NetworkState
from .scenario import GeneratorParams, Scenario, generate_synthetic_scenario, load_scenario, save_scenario

__version__ = "0.1.0"
