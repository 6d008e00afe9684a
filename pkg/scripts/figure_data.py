"""Write the CSV series behind the comb, echo, beat, histogram and rate plots.

Each series is one CLI run into its own sub-directory of --out, so every file
keeps its config hash and seed header.
"""

import argparse
from pathlib import Path

import yaml

from qrnode.cli import main as cli

RUNS = {
    # comb with the replica transition switched on, jitter-free so tooth pairs are easy to read
    "comb": ("afc", {"afc": {"jitter_rms": 0.0, "replica_depth_ratio": 0.5, "finesse": 4.0}}),
    "echo": ("echo", {}),
    "echo_ideal": ("echo", {"afc": {"window_width": 48e6, "n_teeth": 24, "finesse": 4.0, "peak_od": 1.0,
                                    "background_od": 0.0, "jitter_rms": 0.0}}),
    "echo_slow_light": ("echo", {"afc": {"n_teeth": 3, "background_od": 10.0, "jitter_rms": 0.0}}),
    "beat": ("lock", {}),
    "histogram": ("count", {}),
    "rates": ("rate", {}),
    "echo_seeds": ("sweep", {"sweep": {"target": "echo", "seeds": 100}}),
    "drift_seeds": ("sweep", {"sweep": {"target": "lock", "seeds": 100}}),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("figure_data"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    for name, (command, overrides) in RUNS.items():
        target = args.out / name
        target.mkdir(parents=True, exist_ok=True)
        if command == "sweep":
            overrides = {**overrides, "sweep": {**overrides["sweep"], "workers": args.workers}}
        config = target / "config.yaml"
        config.write_text(yaml.safe_dump(overrides))
        code = cli([command, "--config", str(config), "--out", str(target), "--seed", str(args.seed)])
        print(f"{name:16s} {command:6s} exit {code}")
        if code:
            raise SystemExit(code)


if __name__ == "__main__":
    main()
