"""Helpers for registering command classes on the argument parser."""

import argparse
from typing import Dict, Type

from hawkes_lift.common.logging import get_logger

logger = get_logger(__name__)


def add_global_options(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    """Options accepted both before and after the subcommand.

    With ``suppress`` the options have no default, so values given before the
    subcommand are not overwritten by the subparser.
    """
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", "-c", default=default, help="run config file (INI blocks)")
    parser.add_argument("--out", "-o", default=default, help="output directory (overrides [run] out)")
    parser.add_argument("--seed", type=int, default=default, help="base seed (overrides [driver] seed)")
    parser.add_argument("--threads", type=int, default=default, help="worker threads (overrides [run] threads)")
    parser.add_argument(
        "--debug", "-d", action="store_true", default=default if suppress else False, help="debug logging"
    )


def register_commands(subparsers, commands: Dict[str, Type]) -> int:
    """Add one subparser per command class.

    Returns:
        Number of commands registered
    """
    shared = argparse.ArgumentParser(add_help=False)
    add_global_options(shared, suppress=True)
    count = 0
    for name, command_class in commands.items():
        sub = subparsers.add_parser(name, parents=[shared], help=command_class.description,
                                    description=command_class.description)
        sub.set_defaults(command=name)
        logger.debug(f"✅ Registered command: {name}")
        count += 1
    return count
