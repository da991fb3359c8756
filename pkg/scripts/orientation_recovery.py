"""Probe-axis recovery from a tilted start on the flat plate.

For each tilt the null-space orientation term is run against a baseline with
the term disabled; prints the misalignment at a few instants and the path
error of both runs.
"""

import argparse
import math

import numpy as np

from hybridfm import scenario as sc
from hybridfm import sim

CHECKPOINTS = (0.0, 0.5, 1.0, 2.0, 5.0)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--tilt", type=float, nargs="+", default=[15.0, 30.0, 60.0, -60.0])
    parser.add_argument("--axis", choices=["T1", "T2"], default="T1")
    parser.add_argument("--duration", type=float, default=8.0)
    args = parser.parse_args()

    head = " ".join(f"{f'g@{t:g}s':>7}" for t in CHECKPOINTS)
    print(f"{'tilt':>6} {head} {'rms mm':>8} {'rho=0 mm':>9}")
    for tilt in args.tilt:
        keys = [f"initial.tilt_deg={tilt}", f"initial.tilt_axis={args.axis}", f"duration={args.duration}"]
        records, summary = sim.run(sc.load("plane_line", keys))
        _, baseline = sim.run(sc.load("plane_line", keys + ["controller.rho_limit=0"]))
        t = np.array([r.t for r in records])
        gammas = [math.degrees(records[min(int(np.searchsorted(t, c - 1e-9)), len(records) - 1)].gamma) for c in CHECKPOINTS]
        cols = " ".join(f"{g:7.2f}" for g in gammas)
        print(f"{tilt:6.1f} {cols} {1e3 * summary.rms_path_error:8.4f} {1e3 * baseline.rms_path_error:9.4f}")


if __name__ == "__main__":
    main()
