"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """A parameter is outside its documented domain."""


class DegenerateInput(ValueError):
    """Input data cannot be processed (zero column, empty set, ...)."""


class PreconditionViolation(ValueError):
    """A caller-certified precondition turned out to be false.

    ``measured`` carries the quantity that violated it, when there is one.
    """

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class BudgetExceeded(RuntimeError):
    """An exhaustive computation would exceed its configured budget."""

    def __init__(self, message, count):
        super().__init__(message)
        self.count = count


class CertificationFailure(RuntimeError):
    """A generator could not certify an instance within its attempt budget."""
