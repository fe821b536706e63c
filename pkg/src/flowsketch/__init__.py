__version__ = "0.1.0"

from .registry import register_algorithm


def main(argv=None) -> int:
    from .management import execute_from_command_line

    raise SystemExit(execute_from_command_line(argv))
