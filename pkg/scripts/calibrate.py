"""Re-run the model fits and compare with the frozen constants in qrnode.calibration."""

import argparse

from qrnode import calibration as cal


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--passes", type=int, default=2, help="alternating jitter/depth passes")
    args = parser.parse_args()

    mem = cal.fit_memory(passes=args.passes)
    print(f"peak_od     fitted {mem.peak_od!r:<22} frozen {cal.MEMORY_PARAMS.peak_od!r}")
    print(f"jitter_rms  fitted {mem.jitter_rms!r:<22} frozen {cal.MEMORY_PARAMS.jitter_rms!r}")

    drift = cal.fit_lock_drift()
    for name, model in drift.items():
        frozen = cal.LOCK_DRIFT[name]
        print(f"{name} diffusion          fitted {model.diffusion!r:<22} frozen {frozen.diffusion!r}")
        print(f"{name} lock_residual_rms  fitted {model.lock_residual_rms!r:<22} frozen {frozen.lock_residual_rms!r}")


if __name__ == "__main__":
    main()
