"""Monte Carlo single-photon echo experiment.

Each trial draws a Poissonian photon number; each photon independently lands
in a time bin with probability proportional to the propagated intensity, or
is lost (absorbed, outside the gate, or missed by the detector).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral_memory import AbsorptionSpectrum, echo_window, gaussian_pulse, propagate


@dataclass(frozen=True)
class PhotonSource:
    mean_photons: float = 0.59
    pulse_width: float = 90e-9
    trials: int = 10_000

    def __post_init__(self):
        if self.mean_photons < 0:
            raise ValueError("mean_photons must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.pulse_width > 0:
            raise ValueError("pulse_width must be > 0")


@dataclass(frozen=True)
class DetectorModel:
    """Counting detector behind the crystal.

    ``efficiency`` lumps everything between the crystal and the click
    (fibre coupling and quantum efficiency).
    """

    efficiency: float = 1.0
    dark_rate: float = 0.0
    time_bin: float = 10e-9
    gate_start: float = -200e-9
    gate_stop: float = 1000e-9

    def __post_init__(self):
        if not 0 <= self.efficiency <= 1:
            raise ValueError("detector efficiency must lie in [0, 1]")
        if self.dark_rate < 0:
            raise ValueError("dark_rate must be >= 0")
        if not self.time_bin > 0:
            raise ValueError("time_bin must be > 0")
        if not self.gate_stop > self.gate_start:
            raise ValueError("gate_stop must exceed gate_start")

    def bin_edges(self) -> np.ndarray:
        n = int(round((self.gate_stop - self.gate_start) / self.time_bin))
        return self.gate_start + np.arange(n + 1) * self.time_bin


@dataclass(frozen=True, eq=False)
class EchoHistogram:
    """Accumulated clicks per time bin.

    ``echo_sq_sum`` is the sum over trials of the squared echo-window count;
    when absent the per-trial counts are taken to be 0 or 1.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    trials: int
    echo_window: tuple[float, float]
    echo_sq_sum: float | None = None

    def __post_init__(self):
        if len(self.bin_edges) != len(self.counts) + 1:
            raise ValueError("need len(bin_edges) == len(counts) + 1")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    @property
    def echo_bins(self) -> np.ndarray:
        lo, hi = self.echo_window
        eps = 1e-6 * (self.bin_edges[1] - self.bin_edges[0])
        return (self.bin_edges[:-1] >= lo - eps) & (self.bin_edges[1:] <= hi + eps)

    @property
    def echo_counts(self) -> int:
        return int(self.counts[self.echo_bins].sum())

    @property
    def photons_per_trial(self) -> float:
        return self.echo_counts / self.trials

    @property
    def stderr(self) -> float:
        """Standard error of ``photons_per_trial`` (binomial for 0/1 counts)."""
        p = self.photons_per_trial
        if self.echo_sq_sum is None:
            var = p * (1 - p)
        else:
            var = self.echo_sq_sum / self.trials - p * p
            var *= self.trials / max(self.trials - 1, 1)
        return math.sqrt(max(var, 0.0) / self.trials)


def bin_probabilities(spec: AbsorptionSpectrum, pulse_width: float, edges: np.ndarray) -> np.ndarray:
    """Probability that one input photon leaves the crystal inside each bin."""
    pulse = gaussian_pulse(spec, pulse_width)
    out = propagate(spec, pulse)
    idx = np.floor((out.time - edges[0]) / (edges[1] - edges[0]) + 1e-9).astype(int)
    inside = (idx >= 0) & (idx < len(edges) - 1)
    return np.bincount(idx[inside], weights=out.intensity[inside] * out.dt,
                       minlength=len(edges) - 1) / pulse.energy


def run_experiment(source: PhotonSource, spec: AbsorptionSpectrum, detector: DetectorModel,
                   seed: int = 0) -> EchoHistogram:
    """Simulate ``source.trials`` single-photon-level storage attempts."""
    edges = detector.bin_edges()
    pulse = gaussian_pulse(spec, source.pulse_width)
    window = echo_window(spec, pulse)
    probs = detector.efficiency * bin_probabilities(spec, source.pulse_width, edges)
    nb = len(probs)
    lost = max(0.0, 1.0 - probs.sum())
    cat_p = np.append(probs, lost)
    cat_p /= cat_p.sum()

    rng = np.random.default_rng(seed)
    per_trial = rng.poisson(source.mean_photons, source.trials)
    cats = rng.choice(nb + 1, size=int(per_trial.sum()), p=cat_p)
    owner = np.repeat(np.arange(source.trials), per_trial)
    counts = np.bincount(cats, minlength=nb + 1)[:nb]

    hist = EchoHistogram(edges, counts, source.trials, window)
    echo_mask = np.append(hist.echo_bins, False)
    echo_per_trial = np.bincount(owner[echo_mask[cats]], minlength=source.trials)

    if detector.dark_rate > 0:
        mean_dark = detector.dark_rate * detector.time_bin
        n_echo = int(hist.echo_bins.sum())
        dark_echo = rng.poisson(mean_dark * n_echo, source.trials)
        echo_per_trial = echo_per_trial + dark_echo
        counts = counts + rng.poisson(mean_dark * source.trials, nb) * ~hist.echo_bins
        if n_echo:
            counts[hist.echo_bins] += rng.multinomial(int(dark_echo.sum()), np.full(n_echo, 1.0 / n_echo))

    return EchoHistogram(edges, counts, source.trials, window, float(np.sum(echo_per_trial.astype(float) ** 2)))


def efficiency_estimate(hist: EchoHistogram, input_mean: float) -> tuple[float, float]:
    """Echo efficiency and its standard error from a histogram."""
    if not input_mean > 0:
        raise ValueError("input_mean must be > 0")
    return hist.photons_per_trial / input_mean, hist.stderr / input_mean
