"""Experiment configuration: YAML file -> validated dataclass sections.

Every section is optional; omitted keys take the calibrated defaults. Keys
that are not part of the schema are rejected. All quantities are SI (Hz, s,
W, m) except distances (km) and fibre loss (dB/km).
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import calibration as cal
from .frequency_chain import DriftModel, LockChain, repeater_node_chain
from .photon_counting import DetectorModel, PhotonSource
from .repeater_rate import LinkConfig, MultiplexPlan
from .spectral_memory import AFCParams, LevelScheme

_MEM = cal.MEMORY_PARAMS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class AFCSection:
    window_width: float = _MEM.window_width
    comb_interval: float = _MEM.comb_interval
    finesse: float = _MEM.finesse
    peak_od: float = _MEM.peak_od
    background_od: float = _MEM.background_od
    tooth_shape: str = _MEM.tooth_shape
    jitter_rms: float = _MEM.jitter_rms
    n_teeth: int = _MEM.n_teeth
    seed: int = _MEM.seed
    afc_transition_center: float = 0.0
    replica_offset: float = 5.0e6
    replica_depth_ratio: float = 0.0
    time_step: float = 5e-9
    span_echoes: float = 8.0

    def params(self) -> AFCParams:
        return AFCParams(self.window_width, self.comb_interval, self.finesse, self.peak_od, self.background_od,
                         self.tooth_shape, self.jitter_rms, self.n_teeth, self.seed)

    def scheme(self) -> LevelScheme:
        return LevelScheme(self.afc_transition_center, "5/2g-5/2e", self.replica_offset, self.replica_depth_ratio)

    def grid_kw(self) -> dict:
        return {"time_step": self.time_step, "span_echoes": self.span_echoes}


@dataclass
class PulseSection:
    fwhm: float = cal.PULSE_FWHM
    carrier_detuning: float = 0.0
    energy: float = 1.0


@dataclass
class DriftSection:
    kind: str = "ou"
    diffusion: float = 0.0
    reversion_rate: float = 0.0
    lock_residual_rms: float = 0.0

    def model(self) -> DriftModel:
        return DriftModel(self.kind, self.diffusion, self.reversion_rate, self.lock_residual_rms)


def _default_drifts():
    return {k: DriftSection(v.kind, v.diffusion, v.reversion_rate, v.lock_residual_rms)
            for k, v in cal.LOCK_DRIFT.items()}


@dataclass
class ChainSection:
    nu_606: float = 494.7e12
    nu_1514: float = 197.9e12
    delta1: float = 160e6
    delta2: float = 164e6
    f_aom3: float = 164e6
    duration: float = cal.RECORD_DURATION
    sample_dt: float = 1.0
    half_band: float = 100e3
    drift: dict[str, DriftSection] = field(default_factory=_default_drifts)

    def chain(self) -> LockChain:
        drifts = {k: v.model() for k, v in self.drift.items()}
        ch = repeater_node_chain(nu_606=self.nu_606, nu_1514=self.nu_1514, delta1=self.delta1,
                                 delta2=self.delta2, f_aom3=self.f_aom3, drifts=drifts)
        unknown = set(self.drift) - set(ch.nodes)
        if unknown:
            raise ConfigError(f"chain.drift: unknown node(s) {sorted(unknown)}")
        return ch


@dataclass
class ConversionSection:
    pump_wavelength: float = 1010e-9
    signal_wavelength: float = 1514e-9
    output_wavelength: float = 606e-9
    pump_power: float = 40e-3
    input_power: float = 730e-6
    output_power: float = 509e-6
    noise_rate: float = 8e2
    noise_ref_power: float = 40e-3
    noise_window: float = 100e-9
    photons_after_conversion: float = 0.96


@dataclass
class CountingSection:
    mean_photons: float = 0.59
    trials: int = 10_000
    detector_efficiency: float = cal.COLLECTION_EFFICIENCY
    dark_rate: float = 0.0
    time_bin: float = 10e-9
    gate_start: float = -200e-9
    gate_stop: float = 1000e-9

    def source(self, pulse_width: float) -> PhotonSource:
        return PhotonSource(self.mean_photons, pulse_width, self.trials)

    def detector(self) -> DetectorModel:
        return DetectorModel(self.detector_efficiency, self.dark_rate, self.time_bin, self.gate_start, self.gate_stop)


@dataclass
class RateSection:
    node_separation: float = 50.0
    fiber_loss: float = 0.2
    source_rate: float = 1e3
    memory_efficiency: float = cal.SINGLE_PHOTON_EFFICIENCY
    conversion_efficiency: float = 0.279
    detection_efficiency: float = 1.0
    herald_efficiency: float = 1.0
    swap_success: float = 0.5
    eps_placement: str = "midpoint"
    correlation_time: float = 100e-9
    afc_interval: float = 50e3
    fsr: float = 100e6
    inhomogeneous_bandwidth: float = 1e9
    distances: list[float] = field(default_factory=lambda: [float(d) for d in range(0, 201, 10)])
    n_links: int = 2
    chain_slots: int = 100_000

    def link(self) -> LinkConfig:
        return LinkConfig(self.node_separation, self.fiber_loss, self.source_rate, self.memory_efficiency,
                          self.conversion_efficiency, self.detection_efficiency, self.herald_efficiency,
                          self.swap_success, eps_placement=self.eps_placement)

    def plan(self) -> MultiplexPlan:
        return MultiplexPlan(self.correlation_time, self.afc_interval, self.fsr, self.inhomogeneous_bandwidth)


@dataclass
class SweepSection:
    target: str = "echo"
    seeds: list[int] = field(default_factory=lambda: list(range(100)))
    workers: int = 1


@dataclass
class ExperimentConfig:
    afc: AFCSection = field(default_factory=AFCSection)
    pulse: PulseSection = field(default_factory=PulseSection)
    chain: ChainSection = field(default_factory=ChainSection)
    conversion: ConversionSection = field(default_factory=ConversionSection)
    counting: CountingSection = field(default_factory=CountingSection)
    rate: RateSection = field(default_factory=RateSection)
    sweep: SweepSection = field(default_factory=SweepSection)
    seed: int = 0

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> str:
        """SHA-256 of the fully resolved configuration."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


_SECTION_TYPES = {
    "afc": AFCSection, "pulse": PulseSection, "chain": ChainSection, "conversion": ConversionSection,
    "counting": CountingSection, "rate": RateSection, "sweep": SweepSection,
}


def _coerce(path: str, value: Any, annotation: str):
    if annotation == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{path}: must be finite")
        return value
    if annotation == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if annotation == "str":
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if annotation == "list[float]":
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list")
        return [_coerce(f"{path}[{i}]", v, "float") for i, v in enumerate(value)]
    if annotation == "list[int]":
        if isinstance(value, int) and not isinstance(value, bool):
            return list(range(value))
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list of integers or a count")
        return [_coerce(f"{path}[{i}]", v, "int") for i, v in enumerate(value)]
    raise ConfigError(f"{path}: unsupported field type {annotation}")


def _build(cls, data: Any, path: str):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a mapping")
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {', '.join(map(str, unknown))}")
    kwargs = {}
    for name, value in data.items():
        annotation = fields[name].type
        if annotation == "dict[str, DriftSection]":
            if not isinstance(value, dict):
                raise ConfigError(f"{path}.{name}: expected a mapping of node names")
            kwargs[name] = {k: _build(DriftSection, v, f"{path}.{name}.{k}") for k, v in value.items()}
        else:
            kwargs[name] = _coerce(f"{path}.{name}", value, annotation)
    return cls(**kwargs)


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Construct every model object once so invalid values surface as ConfigError."""
    checks = {
        "afc": lambda: (cfg.afc.params(), cfg.afc.scheme()),
        "pulse": lambda: _positive(cfg.pulse.fwhm, "fwhm") and _positive(cfg.pulse.energy, "energy"),
        "chain": cfg.chain.chain,
        "counting": lambda: (cfg.counting.source(cfg.pulse.fwhm), cfg.counting.detector()),
        "rate": lambda: (cfg.rate.link(), cfg.rate.plan(), _positive(cfg.rate.chain_slots, "chain_slots"),
                         _at_least(cfg.rate.n_links, 2, "n_links")),
        "conversion": lambda: _conversion_stage(cfg.conversion),
        "sweep": lambda: _sweep(cfg.sweep),
    }
    for section, check in checks.items():
        try:
            check()
        except ConfigError as exc:
            if str(exc).startswith(section):
                raise
            raise ConfigError(f"{section}: {exc}") from None
        except ValueError as exc:
            raise ConfigError(f"{section}: {exc}") from None
    return cfg


def _positive(v, name):
    if not v > 0:
        raise ConfigError(f"{name} must be > 0")
    return True


def _at_least(v, lo, name):
    if v < lo:
        raise ConfigError(f"{name} must be >= {lo}")
    return True


def _conversion_stage(sec: ConversionSection):
    from .conversion import SFGStage

    return SFGStage(sec.pump_wavelength, sec.signal_wavelength, sec.output_wavelength, sec.pump_power,
                    0.0, sec.noise_rate, sec.noise_ref_power)


def _sweep(sec: SweepSection):
    if sec.target not in ("echo", "lock", "count"):
        raise ConfigError(f"target must be one of echo, lock, count; got {sec.target!r}")
    if not sec.seeds:
        raise ConfigError("seeds must not be empty")
    _at_least(sec.workers, 1, "workers")


def from_dict(data: dict | None) -> ExperimentConfig:
    data = {} if data is None else data
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    unknown = sorted(set(data) - set(_SECTION_TYPES) - {"seed"})
    if unknown:
        raise ConfigError(f"config: unknown section(s) {', '.join(map(str, unknown))}")
    kwargs = {name: _build(cls, data.get(name), name) for name, cls in _SECTION_TYPES.items()}
    if "seed" in data:
        kwargs["seed"] = _coerce("seed", data["seed"], "int")
    return validate(ExperimentConfig(**kwargs))


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return from_dict({})
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML: {exc}") from None
    return from_dict(data)


def schema() -> dict:
    """JSON-schema description of the configuration file."""
    types = {"float": {"type": "number"}, "int": {"type": "integer"}, "str": {"type": "string"},
             "list[float]": {"type": "array", "items": {"type": "number"}},
             "list[int]": {"oneOf": [{"type": "integer"}, {"type": "array", "items": {"type": "integer"}}]}}

    def section(cls):
        props = {}
        defaults = cls()
        for f in dataclasses.fields(cls):
            if f.type == "dict[str, DriftSection]":
                props[f.name] = {"type": "object", "additionalProperties": section(DriftSection)}
            else:
                props[f.name] = dict(types[f.type], default=getattr(defaults, f.name))
        return {"type": "object", "properties": props, "additionalProperties": False}

    props = {name: section(cls) for name, cls in _SECTION_TYPES.items()}
    props["seed"] = {"type": "integer", "default": 0}
    return {"$schema": "https://json-schema.org/draft/2020-12/schema", "title": "qrnode experiment config",
            "type": "object", "properties": props, "additionalProperties": False}
