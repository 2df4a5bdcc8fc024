"""Exception hierarchy shared by every hcstream module."""

from __future__ import annotations


class HCError(Exception):
    """Base exception for hcstream errors."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ParseError(HCError):
    """Raised when a graph, tree or config file is malformed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidArgumentError(HCError):
    """Raised when an argument violates an operation's precondition."""

    pass


class SizeLimitError(HCError):
    """Raised when an exact routine is asked to run above its enumeration cap."""

    pass


class StructureError(HCError):
    """Raised when a tree's leaves do not match a graph's vertex set."""

    pass


class ShapeError(HCError):
    """Raised when a binary tree is required but a multiway node is present."""

    pass


class SolverError(HCError):
    """Raised when a cut finder cannot split a subgraph."""

    def __init__(self, message: str, size: int | None = None):
        super().__init__(message)
        self.size = size


class StreamError(HCError):
    """Raised when a stream does not deliver the declared edges."""

    pass


class HarnessError(HCError):
    """Raised when a stream is used outside its pass budget or cannot rewind."""

    pass


USAGE_ERRORS = (ParseError, InvalidArgumentError, SizeLimitError, StructureError, ShapeError)


def exit_code(error: HCError) -> int:
    """2 for bad input or usage, 1 for failures while running."""
    return 2 if isinstance(error, USAGE_ERRORS) else 1
