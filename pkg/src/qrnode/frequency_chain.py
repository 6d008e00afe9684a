"""Laser / AOM / SFG frequency bookkeeping and lock-drift simulation.

A :class:`LockChain` is a small DAG. Deterministic evaluation uses exact
rational arithmetic on nominal values, so matching conditions close to the
last hertz even at 10**14 Hz carriers. Stochastic drift is carried
separately as an offset from nominal.

Node semantics (``value`` in Hz):

* ``laser``      free-running source at ``value``.
* ``comb_lock``  laser offset-locked to a reference. Without inputs it is
  locked to the (ideal) frequency comb at ``value``. With ``inputs=(ref,)``
  its output is ``ref + value``; with ``inputs=(ref, partner)`` the lock acts
  on an SFG product, so the output is ``ref + value - partner``.
* ``aom_shift``  ``input + value``.
* ``sfg_sum``    sum of exactly two inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Mapping

import numpy as np
from scipy import signal

NODE_KINDS = ("laser", "aom_shift", "sfg_sum", "comb_lock")
AOM_RANGE = (1e6, 1e9)
MAX_SAMPLES = 10_000_000


@dataclass(frozen=True)
class DriftModel:
    """Slow frequency wander plus white lock residual, in Hz.

    ``diffusion`` D is in Hz^2/s: a random walk has variance ``D*t``; an
    Ornstein-Uhlenbeck process ``dx = -theta*x dt + sqrt(D) dW`` has
    stationary variance ``D / (2*theta)``.
    """

    kind: str = "ou"
    diffusion: float = 0.0
    reversion_rate: float = 0.0
    lock_residual_rms: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in ("random_walk", "ou"):
            raise ValueError(f"drift kind must be 'random_walk' or 'ou', got {self.kind!r}")
        if self.diffusion < 0 or self.lock_residual_rms < 0:
            raise ValueError("diffusion and lock_residual_rms must be >= 0")
        if self.kind == "ou" and self.diffusion > 0 and not self.reversion_rate > 0:
            raise ValueError("an OU drift needs reversion_rate > 0")

    def scaled(self, factor: float) -> DriftModel:
        """Same model with every frequency excursion multiplied by ``factor``."""
        return DriftModel(self.kind, self.diffusion * factor**2, self.reversion_rate,
                          self.lock_residual_rms * factor, self.seed)

    def sample(self, n: int, dt: float, rng: np.random.Generator) -> np.ndarray:
        """``n`` samples spaced ``dt``; a random walk starts at 0, an OU walk in its stationary state."""
        x = np.zeros(n)
        if self.diffusion > 0:
            steps = rng.standard_normal(n)
            if self.kind == "random_walk":
                x = np.concatenate(([0.0], np.cumsum(steps[1:] * math.sqrt(self.diffusion * dt))))
            else:
                theta = self.reversion_rate
                a = math.exp(-theta * dt)
                sd = math.sqrt(self.diffusion / (2 * theta))
                u = sd * math.sqrt(1 - a * a) * steps
                u[0] = sd * steps[0]
                x = signal.lfilter([1.0], [1.0, -a], u)
        if self.lock_residual_rms > 0:
            x = x + rng.normal(0.0, self.lock_residual_rms, n)
        return x


@dataclass(frozen=True)
class FrequencyNode:
    kind: str
    value: float = 0.0
    inputs: tuple[str, ...] = ()
    drift: DriftModel | None = None

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"unknown node kind {self.kind!r}")
        object.__setattr__(self, "inputs", tuple(self.inputs))
        n_in = len(self.inputs)
        if self.kind == "laser" and n_in:
            raise ValueError("a laser node takes no inputs")
        if self.kind == "aom_shift":
            if n_in != 1:
                raise ValueError("an aom_shift node takes exactly one input")
            if not AOM_RANGE[0] <= abs(self.value) <= AOM_RANGE[1]:
                raise ValueError(f"AOM shift {self.value:g} Hz outside {AOM_RANGE}")
        if self.kind == "sfg_sum" and n_in != 2:
            raise ValueError("an sfg_sum node takes exactly two inputs")
        if self.kind == "comb_lock" and n_in > 2:
            raise ValueError("a comb_lock node takes at most two inputs")
        if self.kind in ("laser", "comb_lock") and n_in == 0 and not self.value > 0:
            raise ValueError("an absolute laser frequency must be > 0")
        if self.drift is not None and self.kind in ("aom_shift", "sfg_sum"):
            raise ValueError("only lasers and locks carry drift")


@dataclass(frozen=True)
class LockChain:
    """Named frequency nodes plus the outputs the analysis looks at.

    ``outputs`` must name ``afc_center`` and ``signal``; ``monitor_ref`` and
    ``monitor_sfg`` are needed for beat simulation.
    """

    nodes: Mapping[str, FrequencyNode]
    outputs: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name, node in self.nodes.items():
            for src in node.inputs:
                if src not in self.nodes:
                    raise ValueError(f"node {name!r} has unknown input {src!r}")
        for role, name in self.outputs.items():
            if name not in self.nodes:
                raise ValueError(f"output {role!r} refers to unknown node {name!r}")
        try:
            order = tuple(TopologicalSorter({k: v.inputs for k, v in self.nodes.items()}).static_order())
        except CycleError as exc:
            raise ValueError("lock chain contains a cycle") from exc
        object.__setattr__(self, "_order", order)

    @property
    def order(self) -> tuple[str, ...]:
        return self._order

    def _require(self, *roles):
        missing = [r for r in roles if r not in self.outputs]
        if missing:
            raise KeyError(f"lock chain lacks designated outputs: {', '.join(missing)}")

    def evaluate(self) -> dict[str, Fraction]:
        """Exact nominal frequency of every node."""
        vals: dict[str, Fraction] = {}
        for name in self.order:
            node = self.nodes[name]
            v = Fraction(node.value)
            ins = [vals[s] for s in node.inputs]
            if node.kind == "aom_shift":
                v = ins[0] + v
            elif node.kind == "sfg_sum":
                v = ins[0] + ins[1]
            elif node.kind == "comb_lock" and ins:
                v = ins[0] + v - (ins[1] if len(ins) == 2 else 0)
            vals[name] = v
        return vals

    def offsets(self, noise: Mapping[str, np.ndarray], n: int) -> dict[str, np.ndarray]:
        """Propagate per-node frequency noise (offsets from nominal) through the graph."""
        out: dict[str, np.ndarray] = {}
        for name in self.order:
            node = self.nodes[name]
            own = noise.get(name, np.zeros(n))
            ins = [out[s] for s in node.inputs]
            if node.kind == "aom_shift":
                own = ins[0]
            elif node.kind == "sfg_sum":
                own = ins[0] + ins[1]
            elif node.kind == "comb_lock" and ins:
                own = ins[0] + own - (ins[1] if len(ins) == 2 else 0)
            out[name] = own
        return out


@dataclass(frozen=True, eq=False)
class BeatRecord:
    time: np.ndarray
    offset: np.ndarray

    def __post_init__(self):
        if self.time.shape != self.offset.shape or self.time.ndim != 1:
            raise ValueError("time and offset must be 1-d arrays of equal length")
        if not np.all(np.isfinite(self.offset)):
            raise ValueError("beat offsets must be finite")
        if len(self.time) > 2 and not np.allclose(np.diff(self.time), self.time[1] - self.time[0]):
            raise ValueError("beat record must be uniformly sampled")

    @property
    def peak_to_peak(self) -> float:
        return float(np.ptp(self.offset))


def sfg_sum_check(nu_a: float, nu_b: float) -> float:
    """Output frequency of sum-frequency generation, ``nu_a + nu_b`` exactly rounded."""
    if not (nu_a > 0 and nu_b > 0):
        raise ValueError("SFG input frequencies must be > 0")
    return float(Fraction(nu_a) + Fraction(nu_b))


def residual_detuning(chain: LockChain) -> float:
    """AFC centre minus the signal frequency arriving at the memory (Hz)."""
    chain._require("afc_center", "signal")
    vals = chain.evaluate()
    return float(vals[chain.outputs["afc_center"]] - vals[chain.outputs["signal"]])


def repeater_node_chain(*, nu_606=494.7e12, nu_1514=197.9e12, delta1=160e6, delta2=164e6, f_aom3=164e6,
                        drifts: Mapping[str, DriftModel] | None = None) -> LockChain:
    """Lock layout of a repeater node: comb-locked 606 nm and 1514 nm lasers,
    1010 nm pump locked on the beat between monitor SFG light and the
    AOM2-shifted control laser, AOM3 fine-tuning of the signal.
    """
    drifts = dict(drifts or {})
    nodes = {
        "laser_606": FrequencyNode("comb_lock", nu_606, drift=drifts.get("laser_606")),
        "laser_1514": FrequencyNode("comb_lock", nu_1514, drift=drifts.get("laser_1514")),
        "aom1": FrequencyNode("aom_shift", delta1, ("laser_606",)),
        "aom2": FrequencyNode("aom_shift", delta1, ("laser_606",)),
        # pump is steered so that (aom2 output) - (1514 + 1010) = delta2
        "laser_1010": FrequencyNode("comb_lock", -delta2, ("aom2", "laser_1514"), drift=drifts.get("laser_1010")),
        "sfg_monitor": FrequencyNode("sfg_sum", 0.0, ("laser_1514", "laser_1010")),
        "sfg_signal": FrequencyNode("sfg_sum", 0.0, ("laser_1514", "laser_1010")),
        "aom3": FrequencyNode("aom_shift", f_aom3, ("sfg_signal",)),
    }
    outputs = {"afc_center": "aom1", "signal": "aom3", "monitor_ref": "aom2", "monitor_sfg": "sfg_monitor"}
    return LockChain(nodes, outputs)


def _simulate(chain, drifts, duration, sample_dt, seed):
    if not (duration > 0 and sample_dt > 0):
        raise ValueError("duration and sample_dt must be > 0")
    n = int(math.floor(duration / sample_dt + 1e-9)) + 1
    if n > MAX_SAMPLES:
        raise ValueError(f"record of {n} samples exceeds the {MAX_SAMPLES} sample limit")
    models = {k: v.drift for k, v in chain.nodes.items() if v.drift is not None}
    models.update(drifts or {})
    children = np.random.SeedSequence(seed).spawn(len(chain.order))
    noise = {}
    for name, ss in zip(chain.order, children):
        model = models.get(name)
        if model is None:
            continue
        rng = np.random.default_rng(model.seed if model.seed is not None else ss)
        noise[name] = model.sample(n, sample_dt, rng)
    t = np.arange(n) * sample_dt
    return t, chain.offsets(noise, n)


def simulate_beat(chain: LockChain, drifts: Mapping[str, DriftModel] | None = None, duration: float = 900.0,
                  sample_dt: float = 1.0, seed: int = 0) -> BeatRecord:
    """Monitor beat ``(monitor_ref - monitor_sfg)`` minus its nominal value.

    ``drifts`` overrides the models attached to the nodes. Deterministic for a
    given ``seed``.
    """
    chain._require("monitor_ref", "monitor_sfg")
    t, off = _simulate(chain, drifts, duration, sample_dt, seed)
    beat = off[chain.outputs["monitor_ref"]] - off[chain.outputs["monitor_sfg"]]
    return BeatRecord(t, beat)


def simulate_residual(chain: LockChain, drifts: Mapping[str, DriftModel] | None = None, duration: float = 900.0,
                      sample_dt: float = 1.0, seed: int = 0) -> BeatRecord:
    """Instantaneous AFC-centre minus signal frequency (nominal residual included)."""
    chain._require("afc_center", "signal")
    t, off = _simulate(chain, drifts, duration, sample_dt, seed)
    res = residual_detuning(chain) + off[chain.outputs["afc_center"]] - off[chain.outputs["signal"]]
    return BeatRecord(t, res)


def in_band_fraction(record: BeatRecord, half_band: float) -> float:
    """Fraction of samples with ``|offset| <= half_band``."""
    if len(record.offset) == 0:
        raise ValueError("empty beat record")
    return float(np.mean(np.abs(record.offset) <= half_band))


def calibrate_drift(chain: LockChain, base: Mapping[str, DriftModel], *, target_ptp=150e3, quantile=0.95,
                    duration=900.0, sample_dt=1.0, seeds=range(1000, 1200)) -> dict[str, DriftModel]:
    """Scale ``base`` so the ``quantile`` of the beat peak-to-peak equals ``target_ptp``.

    Every drift term is linear in a common scale factor for fixed random
    draws, so the factor follows in closed form from one unit-scale sweep.
    """
    ptp = [simulate_beat(chain, base, duration, sample_dt, seed).peak_to_peak for seed in seeds]
    ref = float(np.quantile(ptp, quantile))
    if not ref > 0:
        raise ValueError("base drift models produce a flat beat")
    factor = target_ptp / ref
    return {k: v.scaled(factor) for k, v in base.items()}
