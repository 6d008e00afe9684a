"""Fitted model parameters and the routines that reproduce them.

Measured anchors (what the fits aim at):

* strong-pulse echo efficiency 7.9 %, single-photon echo efficiency 6.8 %
* echo observed near 400 ns for a 2 MHz comb with few teeth
* monitor-beat peak-to-peak below 150 kHz over a 15 min record

Running :func:`fit_memory` / :func:`fit_lock_drift` regenerates the frozen
numbers below; ``scripts/calibrate.py`` prints them.
"""

from __future__ import annotations

from dataclasses import replace

from .frequency_chain import DriftModel, calibrate_drift, repeater_node_chain
from .spectral_memory import AFCParams, LevelScheme, calibrate_jitter, calibrate_peak_od

STRONG_PULSE_EFFICIENCY = 0.079
SINGLE_PHOTON_EFFICIENCY = 0.068
ECHO_PEAK_TARGET = 420e-9  # centre of the 380-460 ns band
DRIFT_BOUND = 150e3
RECORD_DURATION = 15 * 60.0
PULSE_FWHM = 90e-9

# Held fixed during the fit: finesse, background OD, tooth count, jitter seed.
MEMORY_START = AFCParams(window_width=18e6, comb_interval=2e6, finesse=2.0, peak_od=3.0, background_od=1.0,
                         tooth_shape="gaussian", jitter_rms=0.5e6, n_teeth=9, seed=0)
MEMORY_SCHEME = LevelScheme()
JITTER_SEEDS = range(100)

MEMORY_PARAMS = replace(MEMORY_START, peak_od=2.3608249769141687, jitter_rms=471679.6875)

# Single-photon run: same crystal, extra loss between crystal and counter.
COLLECTION_EFFICIENCY = SINGLE_PHOTON_EFFICIENCY / STRONG_PULSE_EFFICIENCY

# Residual of the 1010 nm pump lock; the comb-locked 606/1514 nm lasers
# cancel out of both the monitor beat and the memory detuning.
DRIFT_START = {
    "laser_1010": DriftModel("ou", diffusion=2 * (1 / 120) * 1e4**2, reversion_rate=1 / 120,
                             lock_residual_rms=1e4),
}
LOCK_DRIFT = {
    "laser_1010": DriftModel("ou", diffusion=3925173.1185808433, reversion_rate=1 / 120,
                             lock_residual_rms=15346.347679980752),
}


def fit_memory(passes: int = 2, start: AFCParams = MEMORY_START, scheme: LevelScheme = MEMORY_SCHEME) -> AFCParams:
    """Alternate the jitter fit (median echo peak) and the depth fit (efficiency)."""
    params = start
    for _ in range(passes):
        params = calibrate_jitter(scheme, params, ECHO_PEAK_TARGET, seeds=JITTER_SEEDS, pulse_fwhm=PULSE_FWHM)
        params = calibrate_peak_od(scheme, params, STRONG_PULSE_EFFICIENCY, pulse_fwhm=PULSE_FWHM)
    return params


def fit_lock_drift(start=None) -> dict[str, DriftModel]:
    """Scale the pump-lock drift so 95 % of calibration records stay under the bound."""
    return calibrate_drift(repeater_node_chain(), start or DRIFT_START, target_ptp=DRIFT_BOUND,
                           quantile=0.95, duration=RECORD_DURATION, sample_dt=1.0)
