import argparse
import json
import logging
import sys
from typing import List

from . import __version__
from .exception_handler import exception_handler
from .exceptions import EXIT_CONFIG_ERROR, EXIT_OK
from .runner import run_file, validate_config
from .utils import jsonable

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def _dump(data) -> str:
    return json.dumps(jsonable(data), indent=2, sort_keys=True)


def cmd_run(args: argparse.Namespace) -> int:
    summary = run_file(args.config, args.out)
    if not args.quiet:
        print(_dump(summary))
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    diagnostics = validate_config(args.config)
    if diagnostics:
        print(_dump({"title": "Validation error.", "invalid_params": diagnostics}))
        return EXIT_CONFIG_ERROR
    print("%s: OK" % args.config)
    return EXIT_OK


def cmd_version(args: argparse.Namespace) -> int:
    print("decolab %s" % __version__)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decolab", description="Pole-decomposition decoherence scenarios"
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="Run a scenario file and write its outputs")
    run.add_argument("config", help="Scenario JSON file")
    run.add_argument("--out", default=None, help="Output directory")
    run.add_argument("--quiet", action="store_true", help="Only log warnings")
    run.set_defaults(func=cmd_run)

    validate = sub.add_parser("validate", help="Check a scenario file")
    validate.add_argument("config", help="Scenario JSON file")
    validate.set_defaults(func=cmd_validate, quiet=False)

    version = sub.add_parser("version", help="Print the version")
    version.set_defaults(func=cmd_version, quiet=False)

    return parser


def main(argv: List[str] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO, format=LOG_FORMAT
    )

    try:
        return args.func(args)
    except Exception as exc:
        context = {"scenario": getattr(args, "config", None)}
        payload, exit_code = exception_handler(exc, context)
        print(_dump(payload), file=sys.stderr)
        return exit_code
