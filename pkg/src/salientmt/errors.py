"""Exceptions and process exit codes shared across the toolkit."""

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_PRECONDITION = 4
EXIT_INTERNAL = 5


class ToolkitError(Exception):
    """Base class for errors raised by pipeline stages."""


class UsageError(ToolkitError):
    """Bad invocation: missing files, unknown modes, contradictory flags."""


class InputError(ToolkitError):
    """Malformed input file or record."""


class PreconditionError(ToolkitError):
    """An operation was called with arguments that violate its contract."""
