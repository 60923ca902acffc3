"""Command-line entry point: fom | reduce | rom | compare | pipeline.

Exit codes: 0 success, 2 configuration error, 3 solver nonconvergence,
4 file corruption.
"""

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config, preset
from .integrators import NonConvergenceError
from .matrixio import CorruptFileError
from . import pipeline


def _add_common(parser):
    parser.add_argument("--config", type=Path, help="key=value config file")
    parser.add_argument("--preset", choices=["conservative_soliton", "damped_soliton"],
                        help="built-in experiment preset")
    parser.add_argument("--out", type=Path, default=None,
                        help="output root (defaults to the config's output_dir)")


def _resolve_config(args):
    if args.preset is None and args.config is None:
        raise ConfigError("one of --preset or --config is required")
    cfg = preset(args.preset) if args.preset else None
    if args.config is not None:
        cfg = load_config(args.config, base=cfg)
    return cfg


def _parse_modes(text: str) -> list[int]:
    try:
        modes = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse mode list {text!r}") from None
    if not modes:
        raise ConfigError("empty mode list")
    return modes


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alrom",
        description="Structure-preserving ROMs for the Ablowitz-Ladik lattice",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fom = sub.add_parser("fom", help="integrate the full-order lattice")
    _add_common(p_fom)

    p_red = sub.add_parser("reduce", help="build POD bases and the DEIM operator")
    _add_common(p_red)
    p_red.add_argument("--modes", help="fixed N_r=N_d count (single integer)")

    p_rom = sub.add_parser("rom", help="integrate a reduced model")
    _add_common(p_rom)
    p_rom.add_argument("--model", type=Path, required=True,
                       help="reduce_<nr>_<nd> directory")
    p_rom.add_argument("--variant", choices=["pod", "pod_deim"], default="pod_deim")

    p_cmp = sub.add_parser("compare", help="FOM-vs-ROM metrics")
    _add_common(p_cmp)
    p_cmp.add_argument("--fom", type=Path, required=True)
    p_cmp.add_argument("--rom", type=Path, required=True)

    p_pipe = sub.add_parser("pipeline", help="end-to-end sweep")
    _add_common(p_pipe)
    p_pipe.add_argument("--modes", help="comma-separated mode counts")
    p_pipe.add_argument("--variant", choices=["pod", "pod_deim"], default="pod_deim")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        out = args.out if args.out is not None else Path(cfg.output_dir)
        if args.command == "fom":
            pipeline.run_fom(cfg, out)
        elif args.command == "reduce":
            count = int(args.modes) if args.modes else None
            pipeline.run_reduce(cfg, out, n_r=count, n_d=count)
        elif args.command == "rom":
            pipeline.run_rom(cfg, out, args.model, variant=args.variant)
        elif args.command == "compare":
            pipeline.run_compare(cfg, out, args.fom, args.rom)
        elif args.command == "pipeline":
            modes = _parse_modes(args.modes) if args.modes else None
            pipeline.run_pipeline(cfg, out, modes=modes, variant=args.variant)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NonConvergenceError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 3
    except CorruptFileError as err:
        print(f"corrupt file: {err}", file=sys.stderr)
        return 4
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
