#!/usr/bin/env python3
"""Conservative soliton experiment: FOM, 21/21 ROM, and the mode sweep.

Writes everything under out/conservative (override with --out).
"""

import argparse

from alrom.config import preset
from alrom.pipeline import run_pipeline


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="out/conservative")
    parser.add_argument("--modes", default="20,21,30,40,50")
    args = parser.parse_args()
    modes = [int(v) for v in args.modes.split(",")]
    run_pipeline(preset("conservative_soliton"), args.out, modes=modes)


if __name__ == "__main__":
    main()
