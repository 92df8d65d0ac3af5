# main.py

"""
Main entry point for the nscontract command line.

`run` executes a scenario and exits with its verdict; `list` prints the
scenario registry. Flags override values from the --config file.
"""

import argparse
import sys

from core.errors import ConfigError, NSContractError
from runner.cli_runner import EXIT_STRUCTURAL, list_scenarios, run
from runner.config import PARAM_PREFIX, build_run_config, load_config
from utils.log_config import configure_logging

OVERRIDES = ("scenario", "tol", "max_n", "stability_window", "probe_horizon", "seed",
             "epsilon", "out_trace", "out_report", "format", "start")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nscontract",
        description="Certified stationary and non-stationary (fiber) contraction runs",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run a scenario and write its trace and report")
    run_parser.add_argument("--config", help="flat key = value configuration file")
    run_parser.add_argument("--scenario", help="scenario name (see `list`)")
    run_parser.add_argument("--param", action="append", default=[], metavar="K=V",
                            help="scenario parameter, repeatable")
    run_parser.add_argument("--tol", help="certificate target (default: 1e-10)")
    run_parser.add_argument("--max-n", help="largest composition length (default: 1000)")
    run_parser.add_argument("--stability-window", help="fiber stability window (default: 10)")
    run_parser.add_argument("--probe-horizon", help="boundedness probe horizon (default: 200)")
    run_parser.add_argument("--seed", help="sampling seed (default: 0)")
    run_parser.add_argument("--epsilon", help="convergence plan accuracy for skew runs (default: 1e-3)")
    run_parser.add_argument("--out-trace", help="trace output path")
    run_parser.add_argument("--out-report", help="JSON report output path")
    run_parser.add_argument("--format", choices=("csv", "json"), help="trace format (default: csv)")
    run_parser.add_argument("--start", help="start point, e.g. x=1,y=1 (vector coordinates colon-separated)")

    commands.add_parser("list", help="list the registered scenarios")
    return parser


def collect_values(args):
    """
    Merges the config file with command-line overrides into raw string values.
    """
    values = load_config(args.config) if args.config else {}
    for key in OVERRIDES:
        value = getattr(args, key)
        if value is not None:
            values[key] = value
    for item in args.param:
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--param expects K=V, got '{item}'")
        values[PARAM_PREFIX + key.strip()] = value.strip()
    return values


def main(argv=None):
    """
    Parses the command line, runs it, and returns the exit status.
    """
    configure_logging()
    args = build_parser().parse_args(argv)

    if args.command == "list":
        for line in list_scenarios():
            print(line)
        return 0

    try:
        return run(build_run_config(collect_values(args)))
    except NSContractError as exc:
        print(f"nscontract: error: {exc}", file=sys.stderr)
        return EXIT_STRUCTURAL


if __name__ == "__main__":
    sys.exit(main())
