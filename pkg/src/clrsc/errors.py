"""Exception types raised across the package."""


class ContractViolation(ValueError):
    """An argument broke a documented precondition."""


class NumericalFailure(ArithmeticError):
    """A factorization failed or an iterate became non-finite."""

    def __init__(self, message, shape=None, iteration=None):
        super().__init__(message)
        self.shape = shape
        self.iteration = iteration


class DataError(ValueError):
    """Malformed or inconsistent input files."""
