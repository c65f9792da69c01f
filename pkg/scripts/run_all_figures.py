#!/usr/bin/env python3
"""Run every catalog scenario and drop the CSV artifacts under one root.

Usage: python scripts/run_all_figures.py [--out DIR]

If the figrender package is installed, each figure is also rendered to PNG
next to its CSVs.
"""

import argparse
import os
import sys

from omtopo.scenarios import SCENARIOS, default_out_root, run_scenario


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=None, help="output root (default $OMTOPO_OUT or ./out)")
    args = parser.parse_args()
    root = args.out or default_out_root()

    try:
        from figrender.render import render
    except ImportError:
        render = None
        print("figrender not installed; writing CSVs only", file=sys.stderr)

    for name in SCENARIOS:
        out_dir = os.path.join(root, name)
        print(f"== {name} -> {out_dir}")
        manifest = run_scenario(name, out_dir=out_dir)
        for entry in manifest["outputs"]:
            print(f"   {entry['kind']:16s} {entry['path']}")
        for key in ("steady_alpha_abs", "phase_class", "fidelity", "pss_convergence_error"):
            if key in manifest["extras"]:
                print(f"   {key} = {manifest['extras'][key]}")
        if render is not None:
            img = os.path.join(out_dir, f"{name}.png")
            render(name, out_dir, img)
            print(f"   rendered         {img}")


if __name__ == "__main__":
    main()
