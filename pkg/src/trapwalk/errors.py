"""Exception hierarchy shared by all trapwalk modules."""


class TrapwalkError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(TrapwalkError, ValueError):
    """Malformed input: bad landscape, out-of-range index, invalid constant."""


class BudgetExceeded(TrapwalkError):
    """A size or time budget would be exceeded (digit budget, path cap, enumeration size)."""
