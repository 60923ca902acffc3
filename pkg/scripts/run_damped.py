#!/usr/bin/env python3
"""Damped soliton experiment: FOM, 40/49 ROM, and the mode sweep.

Writes everything under out/damped (override with --out).
"""

import argparse

from alrom.config import preset
from alrom.pipeline import run_compare, run_pipeline, run_reduce, run_rom


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/damped")
    parser.add_argument("--modes", default="20,30,40,50,60")
    args = parser.parse_args()
    cfg = preset("damped_soliton")
    modes = [int(v) for v in args.modes.split(",")]
    root = run_pipeline(cfg, args.out, modes=modes)
    # the paper's headline (N_r, N_d) = (40, 49) pair on top of the sweep
    reduce_dir = run_reduce(cfg, root)
    rom_dir = run_rom(cfg, root, reduce_dir)
    run_compare(cfg, root, root / "fom", rom_dir)


if __name__ == "__main__":
    main()
