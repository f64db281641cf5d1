"""Command-line front-end: ``solid-dewetting run|sweep|inspect``."""
import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd
import yaml

from . import __version__
from .config import list_presets, load_config
from .exceptions import ConfigError, DewettingError
from .io import read_manifest
from .jobs import execute


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _parse_vars(pairs: List[str]) -> Dict[str, object]:
    """``name=value`` pairs; values are parsed as YAML scalars so numbers stay numbers."""
    context = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise ConfigError([(None, f"--var expects name=value, got {pair!r}")], "<command line>")
        context[name.strip()] = yaml.safe_load(value)
    return context


def _add_run_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("config", help="configuration file, run manifest, or bundled preset name")
    parser.add_argument("--output-dir", help="output root (overrides SOLID_DEWETTING_OUTPUT_ROOT and the config)")
    parser.add_argument("--snapshot-every", type=float, help="additional snapshots every DT time units")
    parser.add_argument("--var", action="append", default=[], metavar="NAME=VALUE", help="template variable")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser for all verbs."""
    parser = argparse.ArgumentParser(prog="solid-dewetting", description="Solid-state dewetting simulations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--debug", action="store_true", help="verbose logging")
    verbs = parser.add_subparsers(dest="verb", required=True)

    run_parser = verbs.add_parser("run", help="run a single configuration")
    _add_run_arguments(run_parser)

    sweep_parser = verbs.add_parser("sweep", help="run every point of a configuration's sweep")
    _add_run_arguments(sweep_parser)
    sweep_parser.add_argument("--parallel", type=int, default=1, help="number of worker processes")

    inspect_parser = verbs.add_parser("inspect", help="print a run's manifest and final diagnostics")
    inspect_parser.add_argument("run_dir", help="run (or sweep) directory")

    verbs.add_parser("presets", help="list the bundled presets")
    return parser


def _run(args) -> int:
    config = load_config(args.config, _parse_vars(args.var))
    if args.verb == "run" and config.sweep is not None:
        logger.error("%s defines a sweep; use 'solid-dewetting sweep'", args.config)
        return EXIT_USAGE
    if args.verb == "sweep" and config.sweep is None:
        logger.error("%s has no sweep section", args.config)
        return EXIT_USAGE
    parallel = getattr(args, "parallel", 1)
    if parallel < 1:
        logger.error("--parallel must be >= 1")
        return EXIT_USAGE
    return execute(config, args.output_dir, parallel=parallel, debug=args.debug, snapshot_every=args.snapshot_every)


def inspect_run(run_dir, stream=None) -> int:
    """Print the manifest and the last diagnostics row (or a sweep's summary)."""
    stream = stream or sys.stdout
    run_dir = Path(run_dir)
    summary = run_dir / "summary.csv"
    if summary.exists():
        stream.write(pd.read_csv(summary).to_string(index=False) + "\n")
        return EXIT_OK
    manifest = read_manifest(run_dir / "manifest.yaml")
    if manifest is None:
        logger.error("%s is not a run directory", run_dir)
        return EXIT_USAGE
    stream.write(yaml.safe_dump(manifest, sort_keys=False, default_flow_style=False))
    series = run_dir / "series.csv"
    if series.exists():
        frame = pd.read_csv(series)
        if len(frame):
            stream.write("final diagnostics:\n")
            for name in frame.columns:
                stream.write(f"  {name}: {frame[name].iloc[-1]}\n")
    if (run_dir / "FAILED").exists():
        stream.write("FAILED\n")
        return EXIT_FAILED
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point of the ``solid-dewetting`` script; returns the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.debug else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.verb == "inspect":
            return inspect_run(args.run_dir)
        if args.verb == "presets":
            sys.stdout.write("\n".join(list_presets()) + "\n")
            return EXIT_OK
        return _run(args)
    except ConfigError as exc:
        logger.error("Invalid configuration:\n%s", exc)
        return EXIT_USAGE
    except DewettingError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
