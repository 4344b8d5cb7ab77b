"""Exception hierarchy shared across the toolkit."""


class EulerBKMError(Exception):
    """Base class for all toolkit errors."""


class DomainMismatchError(EulerBKMError, ValueError):
    """A point or field does not belong to the domain it was paired with."""


class UnsupportedKindError(EulerBKMError, ValueError):
    """An operation was requested for a domain kind it does not handle."""


class InvalidIntervalError(EulerBKMError, ValueError):
    pass


class TripletError(EulerBKMError, ValueError):
    """A compatible triplet could not be built or failed validation."""


class GraphFailureError(EulerBKMError, ValueError):
    """A spherical cap is too wide to be written as a graph."""


class CoverageError(EulerBKMError, ValueError):
    pass


class UnsupportedGridError(EulerBKMError, ValueError):
    pass


class PeriodicityError(EulerBKMError, ValueError):
    """Samples on a periodic axis do not wrap around smoothly."""


class UnimplementedOrderError(EulerBKMError, NotImplementedError):
    pass


class InconsistencyError(EulerBKMError, ValueError):
    """Two inputs that must agree (e.g. u and curl u) do not."""


class InadmissibleFieldError(EulerBKMError, ValueError):
    pass


class ContextError(EulerBKMError, ValueError):
    pass


class ConditioningError(EulerBKMError, ValueError):
    pass


class DivergenceFailure(EulerBKMError, RuntimeError):
    """The time integrator produced non-finite or exploding values.

    ``last_good_time`` is the time of the last state that passed the checks.
    """

    def __init__(self, message, last_good_time):
        super().__init__(message)
        self.last_good_time = last_good_time


class DegenerateDirectionError(EulerBKMError, ValueError):
    """Vorticity is below the direction floor everywhere."""


class SeriesError(EulerBKMError, ValueError):
    pass


class ConfigError(EulerBKMError, ValueError):
    """Configuration problem; ``line`` is the 1-based source line if known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SnapshotError(EulerBKMError, ValueError):
    """Corrupt or unreadable snapshot file."""
