"""
Date: October 19th, 2026

This file contains the command-line driver. It merges a TOML spec file with
the command-line flags (flags win), runs the TwinBeam engine and maps
errors onto exit codes, printing them as JSON on standard output.

"""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, TextIO

from twinbeam.config import RunSpec, load_spec_file
from twinbeam.exceptions import TwinBeamError
from twinbeam.twinbeam import TwinBeam

logger = logging.getLogger(__name__)

COMMAND_HELP = {
    "moments": "moment table of a fixed probe",
    "error": "error budgets of a fixed probe",
    "sweep": "optimized errors over the n_T and eta grids",
    "optimize": "optimized probes, optionally with landscapes",
    "phase-map": "errors over the squeezing and seed phases",
    "scaling": "power-law fits of optimized errors",
    "validate": "moment engine against the Fock oracle",
}

# flag dest -> RunSpec option
_OPTIONS = {
    "scenario": "scenario",
    "observable": "observables",
    "nT": "n_T",
    "eta": "eta",
    "r": "r",
    "seed_split": "seed_split",
    "phase": "phase",
    "phase_points": "phase_points",
    "landscape": "landscape",
    "phase_map": "phase_map",
    "suite": "suite",
    "output": "output",
    "format": "format",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", dest="spec", type=str, default=None, help="TOML spec file with a [run] table")
    common.add_argument("--scenario", dest="scenario", type=str, default=None)
    common.add_argument("--observable", dest="observable", type=str, default=None, help="NRF, G11 or g11; comma separated")
    common.add_argument("--nT", dest="nT", type=str, default=None, help="n_T values, or a range start:stop[:count]")
    common.add_argument("--eta", dest="eta", type=str, default=None)
    common.add_argument("--r", dest="r", type=float, default=None)
    common.add_argument("--seed-split", dest="seed_split", type=float, default=None)
    common.add_argument("--phase", dest="phase", type=float, default=None)
    common.add_argument("--phase-points", dest="phase_points", type=int, default=None)
    common.add_argument("--landscape", dest="landscape", action="store_const", const=True, default=None)
    common.add_argument("--phase-map", dest="phase_map", action="store_const", const=True, default=None)
    common.add_argument("--suite", dest="suite", type=str, default=None, help="quick or default")
    common.add_argument("-o", "--output", dest="output", type=str, default=None)
    common.add_argument("--format", dest="format", type=str, default=None, help="csv or json")
    common.add_argument("-j", "--jobs", dest="jobs", type=int, default=None)
    common.add_argument("-v", "--verbose", dest="verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="twinbeam",
        description="Estimation errors of two-photon absorbance with two-mode squeezed light",
    )
    from twinbeam import __version__

    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in COMMAND_HELP.items():
        commands.add_parser(name, parents=[common], help=text, description=text)
    return parser


def configure_logging(verbosity: int):
    """Logs go to standard error so that result files carry no wall-clock content."""
    level = logging.DEBUG if verbosity > 1 else logging.INFO if verbosity == 1 else logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def resolve_spec(args: argparse.Namespace) -> RunSpec:
    options: Dict[str, object] = load_spec_file(args.spec) if args.spec else {}
    command = options.pop("command", args.command)
    if command != args.command:
        logger.warning("Spec file command %s is overridden by %s", command, args.command)
    for dest, name in _OPTIONS.items():
        value = getattr(args, dest)
        if value is not None:
            options[name] = value
    return RunSpec.from_options(args.command, options, jobs=args.jobs)


def error_document(error: TwinBeamError) -> str:
    return json.dumps(
        {"error": type(error).__name__, "message": str(error), "exit_code": error.exit_code}, sort_keys=True
    )


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)

    engine = None
    try:
        spec = resolve_spec(args)
        engine = TwinBeam(spec)
        engine.write(engine.run(), stdout)
    except TwinBeamError as e:
        logger.error("%s: %s", type(e).__name__, e)
        if engine is not None and engine.report is not None:
            engine.write(engine.report, stdout)
        stdout.write(error_document(e) + "\n")
        return e.exit_code
    except KeyboardInterrupt:
        if engine is not None and engine.report is not None:
            engine.write(engine.report, stdout)
        return 130
    return 0


if __name__ == "__main__":
    sys.exit(main())
