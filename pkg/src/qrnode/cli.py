"""Command-line front end.

Subcommands ``afc``, ``echo``, ``lock``, ``count``, ``rate`` and ``sweep`` each
write one data table (CSV or JSON) plus a JSON summary into ``--out``.

Seeds: ``afc.seed`` fixes the tooth-jitter realisation (it is part of the
spectrum); the global ``seed`` (overridden by ``--seed``) drives the drift and
photon-counting simulations. ``sweep`` varies whichever seed its target uses.

Exit codes: 0 success, 2 invalid configuration, 3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigError, ExperimentConfig, load_config, schema, validate
from .conversion import noise_per_pulse, photon_number_efficiency, snr
from .frequency_chain import in_band_fraction, residual_detuning, simulate_beat
from .photon_counting import efficiency_estimate, run_experiment
from .repeater_rate import chain_simulate, exact_slot_probability, link_success_probability, multiplexed_rate, rate_sweep
from .spectral_memory import (WraparoundError, afc_prepare, echo_efficiency, echo_peak_time, echo_window,
                              gaussian_pulse, propagate)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class Run:
    """Resolved config plus output location for one invocation."""

    def __init__(self, cfg: ExperimentConfig, out: Path, fmt: str):
        self.cfg, self.out, self.fmt = cfg, out, fmt
        self.digest = cfg.digest()
        self.seed = cfg.seed

    def table(self, name, header, rows):
        return io.write_table(self.out / name, self.fmt, header, rows, digest=self.digest, seed=self.seed)

    def summary(self, name, payload):
        return io.write_json(self.out / name, payload, digest=self.digest, seed=self.seed)


def _spectrum(cfg: ExperimentConfig):
    return afc_prepare(cfg.afc.scheme(), cfg.afc.params(), **cfg.afc.grid_kw())


def _echo(cfg: ExperimentConfig):
    spec = _spectrum(cfg)
    pulse = gaussian_pulse(spec, cfg.pulse.fwhm, energy=cfg.pulse.energy, carrier_detuning=cfg.pulse.carrier_detuning)
    out = propagate(spec, pulse)
    lo, _ = echo_window(spec, pulse)
    early = out.time < lo
    summary = {
        "echo_efficiency": echo_efficiency(spec, pulse, out),
        "echo_peak_time_s": echo_peak_time(spec, pulse, out),
        "echo_window_s": list(echo_window(spec, pulse)),
        "transmitted_fraction": float(np.sum(out.intensity[early]) * out.dt / pulse.energy),
        "output_energy_fraction": out.energy / pulse.energy,
    }
    return spec, pulse, out, summary


def cmd_afc(run: Run) -> None:
    spec = _spectrum(run.cfg)
    run.table("spectrum", ["detuning_hz", "optical_depth"], zip(spec.detuning, spec.od))
    p = spec.params
    run.summary("afc_summary.json", {
        "tooth_centers_hz": spec.tooth_centers, "tooth_fwhm_hz": p.tooth_fwhm, "comb_interval_hz": p.comb_interval,
        "echo_delay_s": 1.0 / p.comb_interval, "grid_points": spec.n, "grid_spacing_hz": spec.spacing,
        "time_step_s": spec.time_step,
    })


def cmd_echo(run: Run) -> None:
    _, _, out, summary = _echo(run.cfg)
    run.table("echo_trace", ["time_s", "re", "im", "abs2"],
              zip(out.time, out.envelope.real, out.envelope.imag, out.intensity))
    run.summary("echo_summary.json", summary)


def cmd_lock(run: Run) -> None:
    ch = run.cfg.chain
    chain = ch.chain()
    rec = simulate_beat(chain, None, ch.duration, ch.sample_dt, run.seed)
    run.table("beat", ["time_s", "offset_hz"], zip(rec.time, rec.offset))
    run.summary("lock_summary.json", {
        "peak_to_peak_hz": rec.peak_to_peak, "residual_detuning_hz": residual_detuning(chain),
        "in_band_fraction": in_band_fraction(rec, ch.half_band), "half_band_hz": ch.half_band,
    })


def _count(cfg: ExperimentConfig, seed: int):
    spec = _spectrum(cfg)
    source = cfg.counting.source(cfg.pulse.fwhm)
    hist = run_experiment(source, spec, cfg.counting.detector(), seed=seed)
    eff, err = efficiency_estimate(hist, source.mean_photons) if source.mean_photons > 0 else (0.0, 0.0)
    return hist, eff, err


def cmd_count(run: Run) -> None:
    cfg = run.cfg
    hist, eff, err = _count(cfg, run.seed)
    run.table("histogram", ["bin_start_s", "counts"], zip(hist.bin_edges[:-1], hist.counts))
    conv = cfg.conversion
    npp = noise_per_pulse(conv.noise_rate * conv.pump_power / conv.noise_ref_power, conv.noise_window)
    run.summary("count_summary.json", {
        "photons_per_trial": hist.photons_per_trial, "photons_per_trial_stderr": hist.stderr,
        "efficiency": eff, "efficiency_stderr": err, "echo_window_s": list(hist.echo_window),
        "trials": hist.trials,
        "conversion_efficiency": photon_number_efficiency(conv.input_power, conv.output_power,
                                                          conv.signal_wavelength, conv.output_wavelength),
        "noise_per_pulse": npp,
        "snr": snr(conv.photons_after_conversion, npp) if npp > 0 else None,
    })


def cmd_rate(run: Run) -> None:
    r = run.cfg.rate
    link, plan = r.link(), r.plan()
    run.table("rates", ["distance_km", "rate_hz", "multiplier"], rate_sweep(link, plan, r.distances))
    rep = multiplexed_rate(link, plan, n_links=r.n_links)
    m_t, m_w = link.modes(plan)
    mc = chain_simulate([link] * r.n_links, link.swap_success, r.chain_slots, seed=run.seed,
                        modes=m_t * m_w, slot_duration=plan.echo_time)
    run.summary("rate_summary.json", {
        "temporal_modes": m_t, "wavelength_modes": m_w, "multiplier": rep.multiplier,
        "link_success_probability": link_success_probability(link), "link_rate_hz": rep.link_rate,
        "end_to_end_rate_hz": rep.end_to_end_rate, "slot_success_probability": rep.slot_success_probability,
        "chain_mc": {"slots": mc.slots, "successes": mc.successes, "per_slot_probability": mc.per_slot_probability,
                     "stderr": mc.stderr,
                     "exact_per_slot_probability": exact_slot_probability([link] * r.n_links, link.swap_success,
                                                                          modes=m_t * m_w)},
    })


def _sweep_point(args):
    cfg, target, seed = args
    if target == "echo":
        cfg = replace(cfg, afc=replace(cfg.afc, seed=seed))
        _, _, _, s = _echo(cfg)
        return [seed, s["echo_peak_time_s"], s["echo_efficiency"]]
    if target == "lock":
        ch = cfg.chain
        rec = simulate_beat(ch.chain(), None, ch.duration, ch.sample_dt, seed)
        return [seed, rec.peak_to_peak, in_band_fraction(rec, ch.half_band)]
    hist, eff, err = _count(cfg, seed)
    return [seed, hist.photons_per_trial, eff]


SWEEP_COLUMNS = {
    "echo": ["seed", "echo_peak_time_s", "echo_efficiency"],
    "lock": ["seed", "peak_to_peak_hz", "in_band_fraction"],
    "count": ["seed", "photons_per_trial", "efficiency"],
}


def cmd_sweep(run: Run) -> None:
    sw = run.cfg.sweep
    jobs = [(run.cfg, sw.target, s) for s in sw.seeds]
    if sw.workers > 1:
        with ProcessPoolExecutor(max_workers=sw.workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    run.table("sweep", SWEEP_COLUMNS[sw.target], rows)
    col = np.array([r[1] for r in rows])
    run.summary("sweep_summary.json", {"target": sw.target, "points": len(rows),
                                       "median": float(np.median(col)), "mean": float(np.mean(col))})


COMMANDS = {"afc": cmd_afc, "echo": cmd_echo, "lock": cmd_lock, "count": cmd_count, "rate": cmd_rate,
            "sweep": cmd_sweep}


HELP = {
    "afc": "prepared absorption spectrum",
    "echo": "propagated pulse and echo trace",
    "lock": "simulated monitor beat of the lock chain",
    "count": "single-photon counting histogram",
    "rate": "link rate versus node separation",
    "sweep": "repeat echo, lock or count over a list of seeds",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qrnode", description="Repeater-node memory and link simulations.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=HELP[name])
        p.add_argument("--config", type=Path, default=None, help="YAML configuration file")
        p.add_argument("--seed", type=int, default=None, help="override the global seed")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--format", choices=("csv", "json"), default="csv", help="data table format")
    sub.add_parser("schema", help="print the configuration JSON schema")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        print(json.dumps(schema(), indent=2))
        return EXIT_OK
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = validate(replace(cfg, seed=args.seed))
        args.out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](Run(cfg, args.out, args.format))
    except WraparoundError as exc:
        print(f"qrnode: numerical guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"qrnode: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK
