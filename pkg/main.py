"""
specqa - Main Entry Point
Retrieval engine and evaluation harness for hybrid technical-specification QA
"""

import argparse
import asyncio
import importlib
import logging
import sys
from pathlib import Path
from types import ModuleType
from typing import Dict, List, Optional, Sequence

from dotenv import load_dotenv

from commands.common import App, short_overrides
from utils.config import build_run_config, parse_overrides
from utils.constants import PROJECT_DESCRIPTION, PROJECT_NAME, PROJECT_VERSION
from utils.errors import EXIT_DATA_ERROR, EXIT_USAGE_ERROR, ProviderError, SpecQAError
from utils.logger import RunLogger

# Load environment variables
load_dotenv()

SHARED_MODULES = {"__init__", "common"}


def discover_commands() -> Dict[str, ModuleType]:
    """Import every command module in commands/, keyed by its command name"""
    commands_dir = Path(__file__).parent / "commands"
    found: Dict[str, ModuleType] = {}
    for path in sorted(commands_dir.glob("*.py")):
        if path.stem in SHARED_MODULES:
            continue
        module = importlib.import_module(f"commands.{path.stem}")
        if not all(hasattr(module, attr) for attr in ("NAME", "register", "run")):
            logging.getLogger(__name__).warning(f"Skipping commands/{path.name}: not a command module")
            continue
        found[module.NAME] = module
    return found


def build_parser(commands: Dict[str, ModuleType]) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROJECT_NAME, description=PROJECT_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"{PROJECT_NAME} {PROJECT_VERSION}")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    for module in commands.values():
        module.register(subparsers)
    return parser


async def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, build the run config and dispatch; returns the exit code"""
    commands = discover_commands()
    parser = build_parser(commands)
    args, extras = parser.parse_known_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE_ERROR

    try:
        overrides = short_overrides(args) + parse_overrides(extras)
        config = build_run_config(getattr(args, "config", None), overrides)
    except SpecQAError as e:
        print(f"{PROJECT_NAME} {args.command}: {e}", file=sys.stderr)
        return e.exit_code

    logger = RunLogger(config.logging)
    for name in commands:
        logger.command_load(name)
    app = App(config=config, logger=logger)
    logger.command(args.command, f"(config: {config.source or 'defaults'}, seed {config.seed})")

    module = commands[args.command]
    try:
        code = await module.run(app, args)
    except ProviderError as e:
        logger.error(f"Command '{args.command}' failed: {e}", exc_info=True)
        return e.exit_code
    except SpecQAError as e:
        logger.error(f"Command '{args.command}' failed: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error in '{args.command}': {e}", exc_info=True)
        return EXIT_DATA_ERROR

    logger.info(f"Command '{args.command}' finished with exit code {code}")
    return code


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    try:
        return asyncio.run(run_command(argv))
    except KeyboardInterrupt:
        print("\nInterrupted", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
