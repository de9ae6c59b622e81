#!/usr/bin/env python
"""
Edge-Triangle Laboratory command line.

Equivalent to the `edge-triangle-lab` console script:

    python run.py phase --alpha-range 0 5 --h-range -2 0 --grid 26 21
    python run.py verify --suite critical
    python run.py sample configs/chain.toml

Results go to ./results unless --output is given; logs go to ./logs/lab.log.
"""

import logging
import sys

from src.cli.main import main
from src.core.logging_config import setup_logging

# Ensure logging is set up
if not logging.getLogger().hasHandlers():
    setup_logging()

logger = logging.getLogger(__name__)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        logger.info("Interrupted")
        sys.exit(130)
