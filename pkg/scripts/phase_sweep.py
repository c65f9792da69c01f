#!/usr/bin/env python3
"""Locate the decay-driven SSH transition: sweep the second cavity's decay,
recalibrating the bare coupling at every point so |G1| = |G3|, and classify
the resulting chain.

Usage: python scripts/phase_sweep.py [--out DIR] [--jobs N]
"""

import argparse
import os

from omtopo.scenarios import Calibration, SweepSpec, default_out_root, run_sweep

GRID = (0.1, 0.15, 0.2, 0.25, 0.3, 0.362, 0.412, 0.462, 0.55, 0.7, 1.0, 1.5, 2.0, 3.0, 5.0)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()
    out = args.out or os.path.join(default_out_root(), "phase_sweep")

    for observable in ("phase_class", "coupling_ratio", "edge_weight_of_gap_state"):
        sweep = SweepSpec(parameter="kappa[1]", values=GRID, observable=observable,
                          calibration=Calibration(adjustable_index=1, bond_a=0, bond_b=2),
                          jobs=args.jobs)
        manifest = run_sweep(sweep, out_dir=os.path.join(out, observable))
        print(f"{observable}: {manifest['outputs'][0]['path']} "
              f"({len(manifest['errors'])} failed points)")
        with open(os.path.join(out, observable, "sweep.csv")) as fh:
            print(fh.read())


if __name__ == "__main__":
    main()
