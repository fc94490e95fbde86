"""Exception types raised by stabkit."""


class StabkitError(Exception):
    """Base class for all library errors."""


class InvalidInstanceError(StabkitError, ValueError):
    """Malformed or infeasible instance data."""


class KindError(StabkitError, ValueError):
    """Operation called on an instance of the wrong kind."""


class UncoverableError(StabkitError, ValueError):
    """An interval contains no candidate point."""


class CapExceededError(StabkitError, ValueError):
    """Brute-force oracle asked to enumerate too many lines."""
