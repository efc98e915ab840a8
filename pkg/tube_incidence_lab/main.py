from tube_incidence_lab.commands import CLI_OPTIONS
from tube_incidence_lab.commands import CSV_COLUMNS
from tube_incidence_lab.commands import RUNNERS
from tube_incidence_lab.commands import RunContext
from tube_incidence_lab.constants import LabExitCodes
from tube_incidence_lab.constructions import ConstructionError
from tube_incidence_lab.energy_fourier import EnergyError
from tube_incidence_lab.family_io import FamilyIOError
from tube_incidence_lab.grid_core import GridError
from tube_incidence_lab.highlow import HighLowError
from tube_incidence_lab.incidence_engine import IncidenceError
from tube_incidence_lab.multiscale import MultiscaleError
from tube_incidence_lab.random_augment import AugmentError
from tube_incidence_lab.set_tools import SetToolsError
from tube_incidence_lab.settings import SettingsError
from tube_incidence_lab.settings import output_dir
from tube_incidence_lab.settings import read_config
from tube_incidence_lab.two_ends import TwoEndsError
from tube_incidence_lab.utils import CheckFailedError
from tube_incidence_lab.utils import ComputeBudgetError
import argparse
import sys
import traceback

"""This module contains the command-line runner of the lab. Each
subcommand reads its section of an INI configuration file, writes its
artifacts to the output directory, and prints a one-line verdict."""


# Errors raised for inputs that cannot be run.
INVALID_INPUT_ERRORS = (
    AugmentError, ConstructionError, EnergyError, FamilyIOError, GridError,
    HighLowError, IncidenceError, MultiscaleError, SetToolsError,
    SettingsError, TwoEndsError, TypeError, ValueError)


def build_parser():
    """Returns the argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument(
        "--config", required=True, help=(
            "The INI configuration file. The subcommand reads the section "
            "named after it and the shared [lab] section."))
    common.add_argument(
        "--out", default=None, help=(
            "The output directory. Defaults to $TUBE_LAB_OUTPUT_DIR, then "
            "lab_output."))
    common.add_argument(
        "--threads", type=int, default=None,
        help="The number of worker threads. Overrides the config.")
    common.add_argument(
        "--seed", type=int, default=None,
        help="The master seed, a nonnegative integer. Overrides the config.")
    parser = argparse.ArgumentParser(
        prog="tube_incidence_lab", allow_abbrev=False, description=(
            "Run incidence experiments on δ-tubes and δ-squares of the "
            "unit square."))
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, runner in RUNNERS.items():
        columns = CSV_COLUMNS[name]
        epilog = f"CSV columns: {', '.join(columns)}." if columns else \
            "Writes a family file; no CSV."
        subparser = subparsers.add_parser(
            name, parents=[common], allow_abbrev=False,
            help=runner.__doc__.split("\n")[0], description=runner.__doc__,
            epilog=epilog)
        for flag, key, options in CLI_OPTIONS.get(name, ()):
            subparser.add_argument(flag, dest=key, default=None, **options)
    return parser


def exit_with(code, message=None):
    """Writes the message to stderr, if given, and exits with the code."""
    if message is not None:
        sys.stderr.write(message)
    sys.exit(code.value)


def main(argv=None):
    """This method runs one subcommand.

    In particular, it performs the following:
        1. Parse the command line and read the configuration file.
        2. Resolve the seed, thread count, and output directory.
        3. Run the subcommand, writing its artifacts.
        4. Print the verdict and exit with the matching exit code.
    """
    args = build_parser().parse_args(argv)
    subcommand = args.subcommand

    # Read the configuration.
    try:
        settings = read_config(args.config)
        if not settings.has_section(subcommand):
            raise SettingsError(
                f"Configuration file {args.config} has no [{subcommand}] "
                f"section.")
        seed = args.seed if args.seed is not None else \
            settings.get_int(subcommand, "seed", 0)
        threads = args.threads if args.threads is not None else \
            settings.get_int(subcommand, "threads", 1)
    except SettingsError as e:
        exit_with(LabExitCodes.INVALID_INPUT, f"Invalid configuration. {e}\n")
    if seed < 0 or threads < 1:
        exit_with(LabExitCodes.INVALID_INPUT, (
            f"Seed {seed} must be nonnegative and threads {threads} "
            f"positive.\n"))
    overrides = {key: getattr(args, key)
                 for _, key, _ in CLI_OPTIONS.get(subcommand, ())}
    context = RunContext(settings, subcommand, output_dir(args.out), seed,
                         threads, settings.digest, overrides)

    # Run the subcommand.
    try:
        verdict = RUNNERS[subcommand](context)
    except CheckFailedError as e:
        exit_with(LabExitCodes.CHECK_FAILED,
                  f"A postcondition check failed. Details: {e}\n")
    except ComputeBudgetError as e:
        exit_with(LabExitCodes.BUDGET_EXCEEDED,
                  f"The compute budget was exceeded. Details: {e}\n")
    except INVALID_INPUT_ERRORS as e:
        exit_with(LabExitCodes.INVALID_INPUT,
                  f"Invalid input for {subcommand}. Details: {e}\n")
    except Exception:
        sys.stderr.write(f"Subcommand {subcommand} failed. Details:\n")
        traceback.print_exc(file=sys.stderr)
        exit_with(LabExitCodes.INVALID_INPUT)

    # Output the verdict.
    sys.stdout.write(verdict.message + "\n")
    if not verdict.ok:
        exit_with(LabExitCodes.CHECK_FAILED)
    exit_with(LabExitCodes.OK)


if __name__ == "__main__":
    main()
