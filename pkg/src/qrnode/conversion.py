"""Sum-frequency conversion stage: photon-number efficiency and pump noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .frequency_chain import sfg_sum_check

C = 299_792_458.0


@dataclass(frozen=True)
class SFGStage:
    """Telecom-to-visible converter.

    ``noise_rate`` is the pump-induced count rate (cps) at ``noise_ref_power``;
    the rate is taken to scale linearly with pump power.
    """

    pump_wavelength: float = 1010e-9
    signal_wavelength: float = 1514e-9
    output_wavelength: float = 606e-9
    pump_power: float = 40e-3
    photon_number_efficiency: float = 0.279
    noise_rate: float = 8e2
    noise_ref_power: float = 40e-3

    def __post_init__(self):
        if min(self.pump_wavelength, self.signal_wavelength, self.output_wavelength) <= 0:
            raise ValueError("wavelengths must be > 0")
        expected = 1 / self.pump_wavelength + 1 / self.signal_wavelength
        if abs(1 / self.output_wavelength - expected) > 2e-3 * expected:
            raise ValueError("output wavelength violates 1/out = 1/pump + 1/signal (0.2% tolerance)")
        if not 0 <= self.photon_number_efficiency <= 1:
            raise ValueError("photon_number_efficiency must lie in [0, 1]")
        if self.noise_rate < 0 or self.pump_power < 0 or not self.noise_ref_power > 0:
            raise ValueError("noise_rate and pump_power must be >= 0, noise_ref_power > 0")

    def output_frequency(self) -> float:
        """Exact sum of the pump and signal optical frequencies (Hz)."""
        return sfg_sum_check(C / self.pump_wavelength, C / self.signal_wavelength)

    def noise_rate_at(self, pump_power: float | None = None) -> float:
        p = self.pump_power if pump_power is None else pump_power
        if p < 0:
            raise ValueError("pump power must be >= 0")
        return self.noise_rate * p / self.noise_ref_power


def photon_number_efficiency(p_in: float, p_out: float, wavelength_in: float = 1514e-9,
                             wavelength_out: float = 606e-9) -> float:
    """Ratio of output to input photon flux, ``(p_out*λ_out) / (p_in*λ_in)``.

    Raises:
        ValueError: non-positive input power or wavelengths, negative output
            power, or a ratio above one.
    """
    if not (p_in > 0 and wavelength_in > 0 and wavelength_out > 0) or p_out < 0:
        raise ValueError("powers and wavelengths must be positive")
    eta = (p_out * wavelength_out) / (p_in * wavelength_in)
    if eta > 1:
        raise ValueError(f"photon-number efficiency {eta:.4f} > 1 is unphysical for a passive converter")
    return eta


def noise_per_pulse(noise_rate: float, pulse_width: float) -> float:
    """Expected noise counts in one detection window of ``pulse_width`` seconds."""
    if noise_rate < 0 or pulse_width < 0:
        raise ValueError("noise_rate and pulse_width must be >= 0")
    return noise_rate * pulse_width


def snr(signal_per_pulse: float, noise_per_pulse: float) -> float:
    if not noise_per_pulse > 0 or not math.isfinite(noise_per_pulse):
        raise ValueError("noise per pulse must be finite and > 0")
    if signal_per_pulse < 0:
        raise ValueError("signal per pulse must be >= 0")
    return signal_per_pulse / noise_per_pulse
