"""Exception types shared across the package."""


class DomainError(ValueError):
    """A precondition on inputs was violated (empty set, point outside the
    tube, delta exceeding the admissible radius, malformed partition...)."""


class ConvergenceError(RuntimeError):
    """A limit process showed no Cauchy behaviour within its schedule.

    Carries the probe trace so callers can inspect how the quantity moved.
    """

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = list(trace) if trace is not None else []


class ConsistencyError(RuntimeError):
    """An ordering that must hold by construction was violated.

    Seeing this means a sampling-resolution or bookkeeping bug inside the
    package, not a property of the problem being solved.
    """
