import logging
import sys

from django.core.management.base import BaseCommand, CommandError

from flowsketch.exceptions import FlowSketchError
from flowsketch.settings import get_settings


VERBOSITY_LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG, 3: logging.DEBUG}


def configure_logging(verbosity: int | None):
    if verbosity is None:
        level = get_settings()["LOG_LEVEL"]
    else:
        level = VERBOSITY_LEVELS[verbosity]
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)


class FlowSketchCommand(BaseCommand):
    """
    Management command without system checks. Domain errors leave through
    CommandError with exit status 2; `-v` falls back to LOG_LEVEL when omitted.
    """
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        parser.set_defaults(verbosity=None)
        return parser

    def execute(self, *args, **options):
        configure_logging(options.get("verbosity"))
        try:
            return super().execute(*args, **options)
        except FlowSketchError as ex:
            raise CommandError(str(ex), returncode=2) from ex
