"""Simulation toolkit for a frequency-converting AFC quantum-repeater node."""

from .config import ConfigError, ExperimentConfig, load_config
from .conversion import SFGStage, noise_per_pulse, photon_number_efficiency, snr
from .frequency_chain import (BeatRecord, DriftModel, FrequencyNode, LockChain, repeater_node_chain,
                              residual_detuning, sfg_sum_check, simulate_beat)
from .photon_counting import DetectorModel, EchoHistogram, PhotonSource, efficiency_estimate, run_experiment
from .repeater_rate import LinkConfig, MultiplexPlan, chain_simulate, multiplexed_rate, temporal_modes
from .spectral_memory import (AbsorptionSpectrum, AFCParams, LevelScheme, OpticalPulse, WraparoundError,
                              afc_prepare, echo_efficiency, echo_peak_time, gaussian_pulse, propagate)

__all__ = [
    "AFCParams", "AbsorptionSpectrum", "BeatRecord", "ConfigError", "DetectorModel", "DriftModel",
    "EchoHistogram", "ExperimentConfig", "FrequencyNode", "LevelScheme", "LinkConfig", "LockChain",
    "MultiplexPlan", "OpticalPulse", "PhotonSource", "SFGStage", "WraparoundError", "afc_prepare",
    "chain_simulate", "echo_efficiency", "echo_peak_time", "efficiency_estimate", "gaussian_pulse",
    "load_config", "multiplexed_rate", "noise_per_pulse", "photon_number_efficiency", "propagate",
    "repeater_node_chain", "residual_detuning", "run_experiment", "sfg_sum_check", "simulate_beat", "snr",
    "temporal_modes",
]
