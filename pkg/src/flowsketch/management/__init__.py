import importlib
import pkgutil
import sys

from django.conf import settings as django_settings
from django.core.management.base import BaseCommand

from . import commands


PROG_NAME = "flowsketch"


def find_commands() -> list[str]:
    return sorted(
        name.replace("_", "-")
        for _, name, is_pkg in pkgutil.iter_modules(commands.__path__)
        if not is_pkg and not name.startswith("_")
    )


def load_command_class(name: str, stdout=None, stderr=None) -> BaseCommand:
    module = importlib.import_module(f"{commands.__name__}.{name.replace('-', '_')}")
    return module.Command(stdout=stdout, stderr=stderr)


def main_help_text() -> str:
    lines = [
        f"Usage: {PROG_NAME} <command> [options]",
        "",
        "Flow record sketches and their benchmark.",
        f"Type '{PROG_NAME} <command> --help' for help on a specific command.",
        "",
        "Available commands:",
    ]
    lines.extend(f"    {name}" for name in find_commands())
    return "\n".join(lines) + "\n"


def execute_from_command_line(argv=None, stdout=None, stderr=None) -> int:
    """
    Dispatch `argv` (without the program name) to a management command and
    return its exit status. Command output goes to `stdout`/`stderr`.
    """
    if not django_settings.configured:
        django_settings.configure()

    argv = sys.argv[1:] if argv is None else list(argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr

    if not argv or argv[0] in ("help", "-h", "--help"):
        stdout.write(main_help_text())
        return 0 if argv else 2

    subcommand = argv[0]
    if subcommand not in find_commands():
        stderr.write(f"Unknown command: '{subcommand}'. Type '{PROG_NAME} help' for usage.\n")
        return 2

    command = load_command_class(subcommand, stdout, stderr)
    try:
        command.run_from_argv([PROG_NAME, *argv])
    except SystemExit as ex:
        return 0 if ex.code is None else int(ex.code)
    return 0
