class FreetermError(ValueError):
    """Base class for rejected inputs."""


class InvalidAutomaton(FreetermError):
    pass


class InvalidQuery(FreetermError):
    pass


class PreconditionError(FreetermError):
    """An operation was called outside the domain where it is defined."""


class SizeCapExceeded(FreetermError):
    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class PropositionViolated(AssertionError):
    """A checked property failed where its preconditions hold."""
