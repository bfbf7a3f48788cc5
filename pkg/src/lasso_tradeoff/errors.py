"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class OutOfRangeError(DomainError):
    """A target value cannot be attained on the admissible parameter range.

    ``interval`` holds the attainable ``(low, high)`` range when known.
    """

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance.

    ``last`` carries the final iterate and ``violation`` the size of the
    remaining residual (fixed-point gap, KKT violation, ...).
    """

    def __init__(self, message, last=None, violation=None):
        super().__init__(message)
        self.last = last
        self.violation = violation


class NonUniqueRootError(RuntimeError):
    """More than one root was found where a unique one was expected."""

    def __init__(self, message, roots):
        super().__init__(message)
        self.roots = roots


class ResourceError(MemoryError):
    """A requested problem size exceeds the configured memory cap."""
