class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""


class InputError(ToolkitError, ValueError):
    """A caller broke an operation's contract (length mismatch, bad vertex id, guard)."""


class DomainError(ToolkitError):
    """The mathematical object is undefined for these parameters (degenerate window, invalid k)."""


class FormatError(ToolkitError):
    """A graph or schedule file could not be parsed."""


class InvariantViolation(ToolkitError, AssertionError):
    """A hard invariant failed during an experiment; this is an implementation bug, not chance."""
