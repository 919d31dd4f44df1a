import logging
import sys

from smock.config import get_settings


def configure_logging(level: str = None) -> None:
    """Send human-readable progress to stderr; stdout is reserved for CSV."""
    settings = get_settings()
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("smock")
    root.handlers[:] = [handler]
    root.setLevel((level or settings.log_level).upper())
    root.propagate = False
