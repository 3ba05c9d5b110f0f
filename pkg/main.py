"""
LiRE toolkit command line
Subcommands: gen, recover, correct, phase, rip, check
"""

# Load environment variables from .env file
from dotenv import load_dotenv
load_dotenv()

import argparse
import logging
import os
import sys
import traceback
from typing import Optional, Sequence

from commands import register_check, register_correct, register_gen, register_phase, register_recover, register_rip
from exceptions import ToolkitError

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logger = logging.getLogger("lire")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lire",
        description="List-regression support correction: instances, recoverers, phase diagrams and RIP checks",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    register_gen(subparsers)
    register_recover(subparsers)
    register_correct(subparsers)
    register_phase(subparsers)
    register_rip(subparsers)
    register_check(subparsers)
    return parser


def configure_logging(level: Optional[str]) -> None:
    # stdout carries results; logs go to stderr
    logging.basicConfig(
        level=(level or os.getenv("LIRE_LOG_LEVEL", "INFO")).upper(),
        format=LOG_FORMAT,
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors exit 2, --help exits 0
        return int(exc.code or 0)

    configure_logging(args.log_level)
    logger.info(f"🚀 lire {args.command} starting")
    try:
        code = args.handler(args)
    except ToolkitError as exc:
        logger.error(f"❌ {exc.detail}")
        return exc.exit_code
    except Exception as exc:
        logger.error(f"❌ Unexpected error: {exc}")
        logger.debug(traceback.format_exc())
        return 1
    logger.info(f"✅ lire {args.command} done")
    return code


if __name__ == "__main__":
    sys.exit(main())
