#!/usr/bin/env python3
"""
Synchronverter stability toolkit.

Entry point of the command-line tool: sets up logging and hands over to
synchronverter.cli.
"""

import logging
import sys
from datetime import datetime
from pathlib import Path

from synchronverter import cli
from synchronverter.config import config


def setup_logging():
    """Console logging on stderr plus a daily debug log under logs/."""
    log_dir = Path("logs")

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)
    root_logger.handlers.clear()

    # stdout carries command output only
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, config.log_level.upper(), logging.INFO))
    console_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    root_logger.addHandler(console_handler)

    try:
        log_dir.mkdir(exist_ok=True)
        file_handler = logging.FileHandler(log_dir / f"synchronverter_{datetime.now().strftime('%Y%m%d')}.log")
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(funcName)s:%(lineno)d - %(message)s'
        ))
        root_logger.addHandler(file_handler)
    except OSError as e:
        print(f"Warning: Could not setup file logging: {e}", file=sys.stderr)

    return logging.getLogger(__name__)


if __name__ == "__main__":
    setup_logging()
    sys.exit(cli.main())
