"""Exception hierarchy shared by all modules."""


class PIDError(Exception):
    """Base class for every error raised by this package."""


class NetworkFormatError(PIDError, ValueError):
    """Malformed edge-list document or invalid network data."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceededError(PIDError):
    """Exact enumeration refused because the network is larger than the node budget."""


class PreconditionError(PIDError, ValueError):
    """An operation was called on inputs that violate its documented precondition."""
