"""Command line entry point: one subcommand per run kind."""

from __future__ import annotations

import argparse
import logging
import sys
import traceback

from . import __version__
from .harness import EXIT_OK, RUN_KINDS, exit_code_for, parse_scenario, run

log = logging.getLogger("torilab")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torilab", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="kind", required=True)
    for kind in RUN_KINDS:
        sp = sub.add_parser(kind, help=f"run a {kind} scenario")
        sp.add_argument("--config", required=True, metavar="PATH", help="JSON scenario file")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
        sp.add_argument("--seed", type=int, metavar="U64", help="master seed (overrides the config)")
        sp.add_argument("--threads", type=int, metavar="N", help="worker threads (overrides the config)")
        sp.add_argument("--tol", type=float, metavar="FLOAT", help="solver tolerance (overrides the config)")
        sp.add_argument("--no-plots", action="store_true", help="skip PNG figures")
        sp.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    logging.captureWarnings(True)
    overrides = {"plots": not args.no_plots}
    for key, dest in (("out", "output_dir"), ("seed", "seed"), ("threads", "threads"), ("tol", "tol")):
        val = getattr(args, key)
        if val is not None:
            overrides[dest] = val
    try:
        sc = parse_scenario(args.config, args.kind, **overrides)
        manifest = run(sc)
    except Exception as exc:  # mapped to exit codes below
        code = exit_code_for(exc)
        if code == 4:
            traceback.print_exc()
        print(f"torilab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return code
    print(f"{sc.kind}: wrote {len(manifest.outputs) + 1} files to {sc.output_dir} (scenario {manifest.scenario_hash[:12]})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
