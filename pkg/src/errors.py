"""
Error hierarchy for kgcomplete.

Every error carries the process exit code the CLI reports for it.
"""

from typing import Optional


class KGCError(Exception):
    """Base class for all kgcomplete errors."""

    exit_code = 1


class ConfigError(KGCError, ValueError):
    """Invalid configuration, CLI override, or missing input path."""

    exit_code = 2


class DataError(KGCError, ValueError):
    """Input data could not be parsed or does not satisfy a precondition."""

    exit_code = 3

    def __init__(self, message: str, line_number: Optional[int] = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NodeIndexError(DataError, IndexError):
    """A node index outside the graph."""


class ModelError(KGCError, ValueError):
    """Numerical or shape problem in a model (embeddings, baseline)."""

    exit_code = 3


INTERNAL_ERROR_EXIT_CODE = 4
