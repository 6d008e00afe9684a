"""Atomic-frequency-comb absorption spectra and linear pulse propagation.

The memory is treated as a linear filter. A comb of absorption teeth is
written into a transparent window cut out of an inhomogeneous background,
the field transmission is ``exp(-od/2)`` with a causal (minimum-phase)
dispersion, and pulses are propagated by multiplying their spectrum with
that transfer function.

Units are Hz for frequencies and seconds for times. The factor 2*pi only
appears inside FFT kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

TOOTH_SHAPES = ("gaussian", "square", "lorentzian")

# samples per tooth FWHM, and time span in units of the echo delay
MIN_SAMPLES_PER_TOOTH = 8
MIN_SPAN_ECHOES = 5.0
DEFAULT_SPAN_ECHOES = 8.0
DEFAULT_TIME_STEP = 5e-9


class WraparoundError(RuntimeError):
    """Raised when propagated light reaches the end of the FFT time window."""


@dataclass(frozen=True)
class LevelScheme:
    """Hyperfine transitions relevant to comb preparation.

    ``replica_offset`` places the copy of the comb that the same ions show on
    the 1/2g-3/2e transition; ``replica_depth_ratio`` scales its depth.
    """

    afc_transition_center: float = 0.0
    burnback_transition: str = "5/2g-5/2e"
    replica_offset: float = 5.0e6
    replica_depth_ratio: float = 0.0

    def __post_init__(self):
        if not self.replica_offset > 0:
            raise ValueError("replica_offset must be > 0")
        if not 0.0 <= self.replica_depth_ratio <= 1.0:
            raise ValueError("replica_depth_ratio must lie in [0, 1]")


@dataclass(frozen=True)
class AFCParams:
    """Comb geometry and depths.

    Attributes:
        window_width: width of the transparent window burned into the line (Hz).
        comb_interval: tooth spacing (Hz).
        finesse: comb_interval / tooth_fwhm.
        peak_od: optical depth at the top of a tooth.
        background_od: optical depth outside the window.
        tooth_shape: one of ``TOOTH_SHAPES``.
        jitter_rms: rms of the i.i.d. gaussian tooth-centre offsets (Hz).
        n_teeth: number of teeth, centred on the transition.
        seed: seed for the jitter draw.
    """

    window_width: float = 18e6
    comb_interval: float = 2e6
    finesse: float = 2.0
    peak_od: float = 1.0
    background_od: float = 0.0
    tooth_shape: str = "gaussian"
    jitter_rms: float = 0.0
    n_teeth: int = 9
    seed: int = 0

    def __post_init__(self):
        if self.tooth_shape not in TOOTH_SHAPES:
            raise ValueError(f"tooth_shape must be one of {TOOTH_SHAPES}, got {self.tooth_shape!r}")
        if not self.finesse > 1:
            raise ValueError(f"finesse must be > 1 (tooth_fwhm < comb_interval), got {self.finesse}")
        if not 0 < self.comb_interval <= self.window_width:
            raise ValueError("comb_interval must satisfy 0 < comb_interval <= window_width")
        if self.n_teeth < 1:
            raise ValueError("n_teeth must be >= 1")
        if self.n_teeth * self.comb_interval > self.window_width * (1 + 1e-12):
            raise ValueError("n_teeth * comb_interval must not exceed window_width")
        if self.peak_od < 0 or self.background_od < 0:
            raise ValueError("optical depths must be >= 0")
        if self.jitter_rms < 0:
            raise ValueError("jitter_rms must be >= 0")

    @property
    def tooth_fwhm(self) -> float:
        return self.comb_interval / self.finesse


@dataclass(frozen=True, eq=False)
class AbsorptionSpectrum:
    """Optical depth sampled on a uniform detuning grid centred on the AFC line.

    The grid is FFT-conjugate to a time grid of ``len(detuning)`` samples with
    step ``time_step``; pulses built with :func:`gaussian_pulse` live there.
    """

    detuning: np.ndarray
    od: np.ndarray
    params: AFCParams | None = None
    scheme: LevelScheme | None = None
    tooth_centers: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        if self.detuning.shape != self.od.shape or self.detuning.ndim != 1:
            raise ValueError("detuning and od must be 1-d arrays of equal length")
        if len(self.detuning) % 2:
            raise ValueError("grid length must be even")
        if np.any(self.od < 0) or not np.all(np.isfinite(self.od)):
            raise ValueError("od must be finite and >= 0")

    @property
    def n(self) -> int:
        return len(self.detuning)

    @property
    def spacing(self) -> float:
        return float(self.detuning[1] - self.detuning[0])

    @property
    def span(self) -> float:
        return self.n * self.spacing

    @property
    def time_step(self) -> float:
        return 1.0 / self.span

    @property
    def time_span(self) -> float:
        return 1.0 / self.spacing


@dataclass(frozen=True, eq=False)
class OpticalPulse:
    """Complex envelope on a uniform time grid.

    ``envelope`` is taken relative to a carrier ``carrier_detuning`` Hz away
    from the AFC centre. Energy is ``sum(|envelope|**2) * dt`` in arbitrary
    units.
    """

    time: np.ndarray
    envelope: np.ndarray
    carrier_detuning: float = 0.0

    @property
    def dt(self) -> float:
        return float(self.time[1] - self.time[0])

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.envelope) ** 2

    @property
    def energy(self) -> float:
        return float(np.sum(self.intensity) * self.dt)

    def fwhm(self) -> float:
        """Intensity FWHM, linearly interpolated between samples."""
        return _fwhm(self.time, self.intensity)

    def with_detuning(self, detuning: float) -> OpticalPulse:
        return replace(self, carrier_detuning=float(detuning))


def _fwhm(x, y):
    half = y.max() / 2
    above = np.flatnonzero(y >= half)
    lo, hi = above[0], above[-1]
    if lo == 0 or hi == len(y) - 1:
        raise ValueError("peak is not contained in the grid")
    left = np.interp(half, [y[lo - 1], y[lo]], [x[lo - 1], x[lo]])
    right = np.interp(half, [y[hi + 1], y[hi]], [x[hi + 1], x[hi]])
    return float(right - left)


def tooth_profile(x, fwhm, shape="gaussian"):
    """Unit-height tooth evaluated at offsets ``x`` from its centre."""
    x = np.asarray(x, dtype=float)
    if shape == "gaussian":
        return np.exp(-4 * math.log(2) * (x / fwhm) ** 2)
    if shape == "lorentzian":
        return 1.0 / (1.0 + (2 * x / fwhm) ** 2)
    if shape == "square":
        return (np.abs(x) <= fwhm / 2).astype(float)
    raise ValueError(f"unknown tooth shape {shape!r}")


def tooth_centers(params: AFCParams) -> np.ndarray:
    """Tooth centres (Hz), symmetric about zero, with the seeded jitter applied."""
    k = np.arange(params.n_teeth) - (params.n_teeth - 1) / 2
    centers = k * params.comb_interval
    if params.jitter_rms > 0:
        rng = np.random.default_rng(params.seed)
        centers = centers + rng.normal(0.0, params.jitter_rms, params.n_teeth)
    return centers


def detuning_grid(params: AFCParams, *, time_step=DEFAULT_TIME_STEP, span_echoes=DEFAULT_SPAN_ECHOES):
    """Uniform detuning grid obeying the resolution and anti-wraparound rules.

    The span is ``1/time_step``, widened by halving the step until it covers
    four window widths. The spacing is at most ``tooth_fwhm / 8`` and at most
    ``comb_interval / span_echoes``.
    """
    if span_echoes < MIN_SPAN_ECHOES:
        raise ValueError(f"span_echoes must be >= {MIN_SPAN_ECHOES}")
    dt = float(time_step)
    while 1.0 / dt < 4 * params.window_width:
        dt /= 2
    span = 1.0 / dt
    max_spacing = min(params.tooth_fwhm / MIN_SAMPLES_PER_TOOTH, params.comb_interval / span_echoes)
    n = int(math.ceil(span / max_spacing - 1e-9))
    n += n % 2
    spacing = span / n
    return (np.arange(n) - n // 2) * spacing


def afc_prepare(scheme: LevelScheme, params: AFCParams, *, grid=None, time_step=DEFAULT_TIME_STEP,
                span_echoes=DEFAULT_SPAN_ECHOES) -> AbsorptionSpectrum:
    """Build the comb spectrum produced by the sweep-and-burn-back sequence.

    The sweep empties an ``window_width`` wide region around the transition
    (optical depth 0 inside, ``background_od`` outside); each burn-back then
    adds a tooth of depth ``peak_od``. Teeth are also seen on the replica
    transition at ``scheme.replica_offset``, scaled by the depth ratio; replica
    teeth whose centres fall outside the window are dropped.

    Args:
        scheme: transition layout.
        params: comb parameters.
        grid: optional explicit detuning grid (uniform, even length, centred).
        time_step: requested time resolution of the conjugate time grid.
        span_echoes: time span of the conjugate grid in units of 1/comb_interval.

    Returns:
        AbsorptionSpectrum on the grid.
    """
    if grid is None:
        grid = detuning_grid(params, time_step=time_step, span_echoes=span_echoes)
    grid = np.asarray(grid, dtype=float)
    spacing = grid[1] - grid[0]
    if spacing > params.tooth_fwhm / MIN_SAMPLES_PER_TOOTH * (1 + 1e-9):
        raise ValueError(
            f"grid spacing {spacing:.4g} Hz is coarser than tooth_fwhm/{MIN_SAMPLES_PER_TOOTH}"
        )
    if len(grid) * spacing < 4 * params.window_width * (1 - 1e-9):
        raise ValueError("grid span must be at least 4 window widths")

    x = grid - scheme.afc_transition_center
    half = params.window_width / 2
    od = np.where(np.abs(x) <= half, 0.0, params.background_od)

    centers = tooth_centers(params)
    teeth = np.zeros_like(x)
    for c in centers:
        teeth += tooth_profile(x - c, params.tooth_fwhm, params.tooth_shape)
    if scheme.replica_depth_ratio > 0:
        for c in centers + scheme.replica_offset:
            if abs(c) <= half:
                teeth += scheme.replica_depth_ratio * tooth_profile(x - c, params.tooth_fwhm, params.tooth_shape)
    od = od + params.peak_od * teeth
    if scheme.replica_offset > x[-1]:
        raise ValueError("replica_offset lies outside the simulated grid")
    return AbsorptionSpectrum(grid, od, params=params, scheme=scheme, tooth_centers=centers)


def causal_phase(log_magnitude: np.ndarray) -> np.ndarray:
    """Minimum phase belonging to a log-magnitude sampled on a centred grid.

    This is the discrete Hilbert transform done by folding the cepstrum onto
    non-negative lags, so that ``exp(log_magnitude + 1j*phase)`` is the
    transform of a causal impulse response (numpy's ``exp(-2j*pi*f*t)``
    convention).
    """
    lm = np.fft.ifftshift(np.asarray(log_magnitude, dtype=float))
    n = len(lm)
    cep = np.fft.ifft(lm)
    fold = np.zeros_like(cep)
    fold[0] = cep[0]
    fold[1:n // 2] = 2 * cep[1:n // 2]
    fold[n // 2] = cep[n // 2]
    return np.fft.fftshift(np.fft.fft(fold).imag)


def transfer_function(spec: AbsorptionSpectrum) -> np.ndarray:
    """Complex field transmission on the spectrum grid (centred order)."""
    log_mag = -spec.od / 2
    return np.exp(log_mag + 1j * causal_phase(log_mag))


def impulse_response(spec: AbsorptionSpectrum) -> np.ndarray:
    """Discrete impulse response; index k is lag ``k * spec.time_step``."""
    return np.fft.ifft(np.fft.ifftshift(transfer_function(spec)))


def time_grid(spec: AbsorptionSpectrum, lead_fraction=0.1) -> np.ndarray:
    """Time axis conjugate to the spectrum grid, starting slightly before t=0."""
    lead = int(round(lead_fraction * spec.n))
    return (np.arange(spec.n) - lead) * spec.time_step


def gaussian_pulse(spec: AbsorptionSpectrum, fwhm=90e-9, *, center=0.0, energy=1.0,
                   carrier_detuning=0.0, lead_fraction=0.1) -> OpticalPulse:
    """Gaussian pulse of intensity FWHM ``fwhm`` on the spectrum's time grid."""
    if not fwhm > 0 or not energy > 0:
        raise ValueError("fwhm and energy must be > 0")
    t = time_grid(spec, lead_fraction)
    a = np.exp(-2 * math.log(2) * ((t - center) / fwhm) ** 2).astype(complex)
    a *= math.sqrt(energy / (np.sum(np.abs(a) ** 2) * spec.time_step))
    return OpticalPulse(t, a, float(carrier_detuning))


def _check_conjugate(spec, pulse):
    if len(pulse.time) != spec.n or not math.isclose(pulse.dt * spec.span, 1.0, rel_tol=1e-9):
        raise ValueError("pulse time grid is not conjugate to the spectrum grid; use gaussian_pulse(spec, ...)")


def propagate(spec: AbsorptionSpectrum, pulse: OpticalPulse, *, wrap_threshold=1e-6) -> OpticalPulse:
    """Send ``pulse`` through the medium: ``ifft(fft(input) * H)``.

    Raises:
        ValueError: grids are not FFT-conjugate or the input has no energy.
        WraparoundError: more than ``wrap_threshold`` of the input energy ends
            up in the last 5% of the time window.
    """
    _check_conjugate(spec, pulse)
    e_in = pulse.energy
    if not (e_in > 0 and math.isfinite(e_in)):
        raise ValueError("input pulse energy must be finite and > 0")
    carrier = np.exp(2j * np.pi * pulse.carrier_detuning * pulse.time)
    field_in = pulse.envelope * carrier
    h = np.fft.ifftshift(transfer_function(spec))
    field_out = np.fft.ifft(np.fft.fft(field_in) * h) * np.conj(carrier)
    out = replace(pulse, envelope=field_out)
    tail = max(1, int(math.ceil(0.05 * spec.n)))
    if np.sum(np.abs(field_out[-tail:]) ** 2) * pulse.dt > wrap_threshold * e_in:
        raise WraparoundError("output energy reaches the end of the time window; widen the grid")
    return out


def echo_delay(comb_interval: float) -> float:
    """Echo re-emission time 1/comb_interval (s)."""
    if not comb_interval > 0:
        raise ValueError("comb_interval must be > 0")
    return 1.0 / comb_interval


def echo_window(spec: AbsorptionSpectrum, pulse: OpticalPulse) -> tuple[float, float]:
    """Window ``1/Δ ± 2*FWHM`` around the expected echo."""
    if spec.params is None:
        raise ValueError("spectrum carries no comb parameters")
    t_echo = echo_delay(spec.params.comb_interval)
    w = 2 * pulse.fwhm()
    lo, hi = t_echo - w, t_echo + w
    if lo < pulse.time[0] or hi > pulse.time[-1]:
        raise ValueError("echo window falls outside the time grid")
    return lo, hi


def _window_mask(time, window):
    return (time >= window[0]) & (time <= window[1])


def echo_efficiency(spec: AbsorptionSpectrum, pulse: OpticalPulse, output: OpticalPulse | None = None) -> float:
    """Energy in the echo window divided by the input energy."""
    window = echo_window(spec, pulse)
    if output is None:
        output = propagate(spec, pulse)
    mask = _window_mask(output.time, window)
    return float(np.sum(output.intensity[mask]) * output.dt / pulse.energy)


def echo_peak_time(spec: AbsorptionSpectrum, pulse: OpticalPulse, output: OpticalPulse | None = None) -> float:
    """Time of the intensity maximum inside the echo window."""
    window = echo_window(spec, pulse)
    if output is None:
        output = propagate(spec, pulse)
    mask = _window_mask(output.time, window)
    idx = np.flatnonzero(mask)
    return float(output.time[idx[np.argmax(output.intensity[idx])]])


def calibrate_peak_od(scheme: LevelScheme, params: AFCParams, target: float, *, pulse_fwhm=90e-9,
                      d_max=20.0, **grid_kw) -> AFCParams:
    """Fit ``peak_od`` so the deterministic echo efficiency equals ``target``.

    Finesse, background and jitter stay as given. The root is taken on the
    rising branch, below the depth of maximum efficiency.
    """

    def eff(d):
        spec = afc_prepare(scheme, replace(params, peak_od=d), **grid_kw)
        return echo_efficiency(spec, gaussian_pulse(spec, pulse_fwhm))

    res = optimize.minimize_scalar(lambda d: -eff(d), bounds=(0.0, d_max), method="bounded",
                                   options={"xatol": 1e-4})
    d_best, eta_best = float(res.x), -float(res.fun)
    if eta_best < target:
        raise ValueError(f"target efficiency {target} unreachable; maximum is {eta_best:.4f} at d={d_best:.3f}")
    d = optimize.brentq(lambda d: eff(d) - target, 0.0, d_best, xtol=1e-10)
    return replace(params, peak_od=float(d))


def median_echo_peak(scheme: LevelScheme, params: AFCParams, seeds, *, pulse_fwhm=90e-9, **grid_kw) -> float:
    """Median echo-peak time over independent jitter realisations."""
    peaks = []
    for seed in seeds:
        spec = afc_prepare(scheme, replace(params, seed=int(seed)), **grid_kw)
        peaks.append(echo_peak_time(spec, gaussian_pulse(spec, pulse_fwhm)))
    return float(np.median(peaks))


def calibrate_jitter(scheme: LevelScheme, params: AFCParams, target_peak: float, *, seeds=range(100),
                     jitter_max=None, tol=1e3, pulse_fwhm=90e-9, **grid_kw) -> AFCParams:
    """Bisect ``jitter_rms`` until the median echo peak over ``seeds`` reaches ``target_peak``.

    The median peak is a step function of the jitter (peaks sit on grid
    samples), so plain bisection on its sign change is used.
    """
    seeds = list(seeds)
    lo, hi = 0.0, params.comb_interval / 2 if jitter_max is None else jitter_max

    def above(j):
        return median_echo_peak(scheme, replace(params, jitter_rms=j), seeds,
                                pulse_fwhm=pulse_fwhm, **grid_kw) > target_peak

    if not above(lo) or above(hi):
        raise ValueError("target_peak is not bracketed by the jitter range")
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if above(mid):
            lo = mid
        else:
            hi = mid
    return replace(params, jitter_rms=float(hi))
