"""
APELE Toolkit - command-line entry point

Computes atomic populations of effectively localized electrons from .wfx
wavefunctions and evaluates nondynamic-correlation diagnostics.
"""

import logging
import sys
from typing import List, Optional

from cli import COMMANDS, config_from_args, parse_args
from core.errors import ApeleError
from utils.constants import EXIT_ERROR

logger = logging.getLogger("apele")


class ApeleToolkitApp:
    """Parses the command line, configures logging and dispatches one subcommand."""

    def __init__(self, argv: Optional[List[str]] = None):
        self.argv = argv

    def run(self) -> int:
        """Run the selected subcommand and return its exit status."""
        try:
            args = parse_args(self.argv)
            self._setup_logging(getattr(args, "verbose", False))
            config = config_from_args(args)
            return COMMANDS[config.subcommand](config)
        except ApeleError as e:
            self._setup_logging(False)
            logger.error("%s: %s", type(e).__name__, e)
            return EXIT_ERROR
        except OSError as e:
            self._setup_logging(False)
            logger.error("Cannot access %s: %s", e.filename or "file", e.strerror or e)
            return EXIT_ERROR

    @staticmethod
    def _setup_logging(verbose: bool) -> None:
        """Log records go to stderr; stdout is reserved for reports."""
        logging.basicConfig(
            level=logging.DEBUG if verbose else logging.INFO,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
            stream=sys.stderr,
        )


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    app = ApeleToolkitApp(argv)
    return app.run()


if __name__ == "__main__":
    sys.exit(main())
