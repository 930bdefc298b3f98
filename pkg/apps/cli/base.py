"""
Shared plumbing of the management commands: exit codes for usage errors,
mapping of library errors to ``CommandError`` and the experiment options
common to ``simulate`` and ``validate``.
"""
import logging
import sys
from functools import partial

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from cli.constants import EXIT_INTERNAL, EXIT_USAGE
from core.exceptions import InferenceError
from harness.utils import load_config, parse_overrides

logger = logging.getLogger(__name__)


def _usage_error(parser, message):
    if parser.called_from_command_line:
        parser.print_usage(sys.stderr)
        parser.exit(EXIT_USAGE, f"{parser.prog}: error: {message}\n")
    raise CommandError(f"Error: {message}", returncode=EXIT_USAGE)


class InferenceCommand(BaseCommand):
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.error = partial(_usage_error, parser)
        return parser

    def execute(self, *args, **options):
        if options.get("verbosity", 1) >= 2:
            for name in settings.LOGGING.get("loggers", {}):
                logging.getLogger(name).setLevel(logging.DEBUG)
        try:
            return super().execute(*args, **options)
        except CommandError:
            raise
        except InferenceError as e:
            raise CommandError(str(e), returncode=EXIT_USAGE)
        except Exception as e:
            logger.exception("%s failed", self.__class__.__module__)
            raise CommandError(f"internal error: {e}", returncode=EXIT_INTERNAL)

    def fail(self, message, returncode):
        raise CommandError(message, returncode=returncode)


def add_experiment_arguments(parser):
    parser.add_argument("source", help="Built-in scenario name or path to a JSON config file.")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config key; repeatable. Dots separate nested keys.")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--steps", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--M", dest="M", type=int, help="Null datasets per step.")
    parser.add_argument("--paper-scale", action="store_true",
                        help="Run the full-size configuration instead of the desk-scale defaults.")
    parser.add_argument("--output", help="Output directory.")
    parser.add_argument("--workers", type=int,
                        help="Parallel trial workers; defaults to the SIMULATION_WORKERS setting (-1: all cores).")


def experiment_from_options(options):
    overrides = parse_overrides(options["overrides"])
    for key in ("trials", "steps", "seed", "M"):
        if options.get(key) is not None:
            overrides[key] = options[key]
    scale = settings.PAPER_SCALE if options.get("paper_scale") else None
    return load_config(options["source"], overrides=overrides, scale=scale)


def workers_from_options(options):
    workers = options.get("workers")
    if workers is None:
        workers = settings.SIMULATION_WORKERS
    if workers is None:
        return -1
    if workers == 0:
        raise CommandError("--workers must not be 0.", returncode=EXIT_USAGE)
    return workers
