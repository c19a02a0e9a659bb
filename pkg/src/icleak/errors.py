"""Exception hierarchy shared by the library and the CLI."""


class IcleakError(Exception):
    """Base class for all errors raised by icleak."""

    exit_code = 1


class ValidationError(IcleakError, ValueError):
    """Malformed input: bad instance document, invalid distribution, bad code file."""

    exit_code = 2


class BudgetExceeded(IcleakError):
    """A solver node budget or search budget ran out before an exact answer."""

    exit_code = 3


class CapExceeded(BudgetExceeded):
    """An object would exceed a configured materialization cap."""


class InvariantViolation(IcleakError):
    """A checked identity or inequality failed."""

    exit_code = 4
