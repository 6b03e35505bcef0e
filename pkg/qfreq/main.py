"""
qfreq - numerical laboratory for 2-dimensional Q-valued maps
Command-line entry point
"""
import argparse
import logging
import sys
from typing import Optional, Sequence

from qfreq.commands import count, frequency, minimize, singular, verify
from qfreq.commands.common import build_run_config, common_parser
from qfreq.config import settings
from qfreq.errors import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, QFreqError

# Configure logging
logging.basicConfig(level=settings.LOG_LEVEL)
logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfreq",
        description="Frequency, singular points and Dirichlet minimizers of Q-valued maps",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    parent = common_parser()
    for module in (frequency, singular, count, verify, minimize):
        module.add_parser(subparsers, parent)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    logger.info(f"qfreq {args.command} starting (threads={settings.worker_count})")
    try:
        config = build_run_config(args)
        result = args.handler(config)
    except QFreqError as e:
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        # Global exception handler
        logger.error(f"Global exception: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    logger.info(f"qfreq {args.command} finished: {result}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
