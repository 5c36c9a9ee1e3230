"""
Logging setup shared by the CLI and library code.
"""

import logging
import sys
from typing import Optional

from rich.console import Console
from rich.logging import RichHandler

_configured = False


def setup_logging(level: str = "INFO", quiet: bool = False) -> None:
    """
    Configure the root logger with a Rich handler on stderr.

    Args:
        level: Logging level name
        quiet: Only show warnings and errors
    """
    global _configured
    root = logging.getLogger()
    if _configured:
        root.setLevel(logging.WARNING if quiet else level.upper())
        return

    handler = RichHandler(
        console=Console(stderr=True),
        show_path=False,
        rich_tracebacks=True,
    )
    handler.setFormatter(logging.Formatter("%(name)s: %(message)s"))
    root.addHandler(handler)
    root.setLevel(logging.WARNING if quiet else level.upper())
    _configured = True


def progress_enabled(quiet: Optional[bool] = None) -> bool:
    """Whether tqdm progress bars should be drawn."""
    if quiet:
        return False
    return sys.stderr.isatty() and logging.getLogger().getEffectiveLevel() <= logging.INFO
