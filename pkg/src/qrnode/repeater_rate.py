"""Entanglement-distribution rates for a chain of memory-equipped repeater nodes.

Each elementary link has an entangled-pair source; both photons must be
converted, stored and retrieved at the neighbouring nodes. Memories are
fixed-delay, so a swap can only use links that succeeded in the same
attempt slot.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .spectral_memory import echo_delay

PLACEMENTS = ("midpoint", "node")


def _floor(x: float) -> int:
    # guards products like (1/50e3)/100e-9 = 199.99999999999997
    return int(math.floor(x * (1 + 1e-12)))


@dataclass(frozen=True)
class MultiplexPlan:
    correlation_time: float = 100e-9
    afc_interval: float = 50e3
    fsr: float = 100e6
    inhomogeneous_bandwidth: float = 1e9

    def __post_init__(self):
        if min(self.correlation_time, self.afc_interval, self.fsr, self.inhomogeneous_bandwidth) <= 0:
            raise ValueError("multiplex plan parameters must be > 0")
        if self.temporal_modes < 1 or self.wavelength_modes < 1:
            raise ValueError("plan yields fewer than one mode")

    @property
    def echo_time(self) -> float:
        return echo_delay(self.afc_interval)

    @property
    def temporal_modes(self) -> int:
        return _floor(self.echo_time / self.correlation_time)

    @property
    def wavelength_modes(self) -> int:
        return _floor(self.inhomogeneous_bandwidth / self.fsr)

    def tpc_frequencies(self, nu_eps: float, orders: Sequence[int]) -> np.ndarray:
        """Lines of the two-photon comb, ``nu_eps + m * fsr``."""
        m = np.asarray(orders)
        if not np.issubdtype(m.dtype, np.integer):
            raise ValueError("comb orders must be integers")
        return nu_eps + m * self.fsr


def temporal_modes(plan: MultiplexPlan) -> int:
    return plan.temporal_modes


@dataclass(frozen=True)
class LinkConfig:
    """One elementary link. Distances in km, loss in dB/km.

    ``temporal_modes``/``wavelength_modes`` left as None are taken from the
    multiplex plan when rates are computed.
    """

    node_separation: float = 50.0
    fiber_loss: float = 0.2
    source_rate: float = 1e3
    memory_efficiency: float = 0.068
    conversion_efficiency: float = 0.279
    detection_efficiency: float = 1.0
    herald_efficiency: float = 1.0
    swap_success: float = 0.5
    temporal_modes: int | None = None
    wavelength_modes: int | None = None
    eps_placement: str = "midpoint"

    def __post_init__(self):
        for name in ("memory_efficiency", "conversion_efficiency", "detection_efficiency",
                     "herald_efficiency", "swap_success"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.node_separation < 0 or self.fiber_loss < 0 or self.source_rate < 0:
            raise ValueError("distance, loss and source rate must be >= 0")
        for name in ("temporal_modes", "wavelength_modes"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.eps_placement not in PLACEMENTS:
            raise ValueError(f"eps_placement must be one of {PLACEMENTS}")

    def modes(self, plan: MultiplexPlan | None = None) -> tuple[int, int]:
        plan = plan or MultiplexPlan()
        m_t = self.temporal_modes if self.temporal_modes is not None else plan.temporal_modes
        m_w = self.wavelength_modes if self.wavelength_modes is not None else plan.wavelength_modes
        return m_t, m_w


@dataclass(frozen=True)
class RateReport:
    link_success_probability: float
    attempts_per_s: float
    link_rate: float
    end_to_end_rate: float
    multiplier: int
    slot_success_probability: float


def fiber_transmission(length_km: float, loss_db_per_km: float) -> float:
    return 10 ** (-loss_db_per_km * length_km / 10)


def link_success_probability(cfg: LinkConfig) -> float:
    """Probability that both photons of one pair are stored, per mode per attempt.

    With loss as the only channel effect the two placements coincide: the
    pair crosses ``node_separation`` km in total either way.
    """
    eta = cfg.conversion_efficiency * cfg.memory_efficiency * cfg.detection_efficiency
    if cfg.eps_placement == "midpoint":
        t = fiber_transmission(cfg.node_separation / 2, cfg.fiber_loss)
        p = (t * eta) ** 2
    else:
        p = eta * eta * fiber_transmission(cfg.node_separation, cfg.fiber_loss)
    return p * cfg.herald_efficiency


def slot_success(p: float, modes: int) -> float:
    """Probability that at least one of ``modes`` independent modes succeeds."""
    return -math.expm1(modes * math.log1p(-p)) if p < 1 else 1.0


def multiplexed_rate(cfg: LinkConfig, plan: MultiplexPlan | None = None, n_links: int = 2) -> RateReport:
    """Rates under the independent-mode approximation.

    Every attempt fills all ``M_t * M_w`` modes with one pair each at
    ``source_rate`` attempts per second. The link rate counts expected stored
    pairs; the end-to-end rate needs every link to succeed in the same slot and
    every swap to succeed.
    """
    plan = plan or MultiplexPlan()
    m_t, m_w = cfg.modes(plan)
    mult = m_t * m_w
    p = link_success_probability(cfg)
    q = slot_success(p, mult)
    link_rate = cfg.source_rate * p * mult
    e2e = cfg.source_rate * q**n_links * cfg.swap_success ** (n_links - 1)
    return RateReport(p, cfg.source_rate, link_rate, e2e, mult, q)


def rate_sweep(cfg: LinkConfig, plan: MultiplexPlan, distances_km) -> list[tuple[float, float, int]]:
    """``(distance_km, link_rate_hz, multiplier)`` rows."""
    rows = []
    for d in distances_km:
        r = multiplexed_rate(replace(cfg, node_separation=float(d)), plan)
        rows.append((float(d), r.link_rate, r.multiplier))
    return rows


@dataclass(frozen=True)
class ChainStats:
    slots: int
    successes: int
    slot_duration: float
    per_slot_probability: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "per_slot_probability", self.successes / self.slots)

    @property
    def stderr(self) -> float:
        p = self.per_slot_probability
        return math.sqrt(p * (1 - p) / self.slots)

    @property
    def rate(self) -> float:
        return self.per_slot_probability / self.slot_duration

    @property
    def rate_stderr(self) -> float:
        return self.stderr / self.slot_duration


def _link_slot_probs(links, modes):
    # links may be LinkConfig objects or bare per-mode success probabilities
    if isinstance(modes, int):
        modes = [modes] * len(links)
    probs = [c if isinstance(c, (int, float)) else link_success_probability(c) for c in links]
    if any(not 0 <= p <= 1 for p in probs):
        raise ValueError("link probabilities must lie in [0, 1]")
    return [slot_success(p, m) for p, m in zip(probs, modes)]


def chain_simulate(links: Sequence[LinkConfig | float], swap_success: float, max_attempts: int, seed: int = 0,
                   *, modes: int | Sequence[int] = 1, slot_duration: float | None = None) -> ChainStats:
    """Monte Carlo over attempt slots for a linear chain.

    Per slot every link succeeds independently (best of ``modes``); each of
    the ``len(links) - 1`` inner nodes then swaps with ``swap_success``, but
    only if both of its links succeeded in that slot.
    """
    if len(links) < 2:
        raise ValueError("a chain needs at least two links")
    if max_attempts < 1:
        raise ValueError("max_attempts must be >= 1")
    if slot_duration is None:
        slot_duration = MultiplexPlan().echo_time
    q = np.array(_link_slot_probs(links, modes))
    rng = np.random.default_rng(seed)
    link_ok = rng.random((max_attempts, len(links))) < q
    swap_ok = rng.random((max_attempts, len(links) - 1)) < swap_success
    ready = link_ok[:, :-1] & link_ok[:, 1:]
    success = np.all(link_ok, axis=1) & np.all(swap_ok & ready, axis=1)
    return ChainStats(max_attempts, int(success.sum()), slot_duration)


def exact_slot_probability(links: Sequence[LinkConfig | float], swap_success: float, *,
                           modes: int | Sequence[int] = 1) -> float:
    """End-to-end success probability per slot by enumerating every link/swap outcome."""
    q = _link_slot_probs(links, modes)
    n = len(links)
    total = 0.0
    for link_bits in itertools.product((0, 1), repeat=n):
        p_links = math.prod(qi if b else 1 - qi for qi, b in zip(q, link_bits))
        for swap_bits in itertools.product((0, 1), repeat=n - 1):
            p_swaps = math.prod(swap_success if b else 1 - swap_success for b in swap_bits)
            ok = all(link_bits) and all(
                swap_bits[i] and link_bits[i] and link_bits[i + 1] for i in range(n - 1))
            if ok:
                total += p_links * p_swaps
    return total


def infinite_memory_slot_rate(links: Sequence[LinkConfig | float], swap_success: float, *,
                              modes: int | Sequence[int] = 1) -> float:
    """Successes per slot if every memory could hold its state indefinitely.

    Links retry until each has succeeded once; then all swaps are attempted
    together and, on failure, everything restarts. The mean waiting time is
    ``E[max of geometric variables]`` by inclusion-exclusion.
    """
    q = _link_slot_probs(links, modes)
    wait = 0.0
    for r in range(1, len(q) + 1):
        for subset in itertools.combinations(q, r):
            wait += (-1) ** (r + 1) / (1 - math.prod(1 - qi for qi in subset))
    return swap_success ** (len(q) - 1) / wait
