"""Exception hierarchy shared by all qperiod modules."""


class QPeriodError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QPeriodError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class ContinuationError(DomainError):
    """A continuation path is degenerate: it meets the origin, or the
    starting point does not project onto the first vertex."""


class PoleProximityError(QPeriodError, ValueError):
    """An evaluation point is closer to a pole than the configured
    safety distance allows."""


class NonConvergenceError(QPeriodError, RuntimeError):
    """The requested tolerance cannot be certified within the allowed
    number of terms."""
