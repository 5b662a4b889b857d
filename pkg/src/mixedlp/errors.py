"""Exception types raised across the package."""


class GridMismatchError(ValueError):
    """Two objects that must share a grid do not."""


class ExponentClassError(ValueError):
    """An exponent is outside the class required by an operation."""


class DomainError(ValueError):
    """A descriptor or kernel does not fit inside the grid window."""


class EstimateUndefinedError(ValueError):
    pass


class PreconditionError(ValueError):
    pass


class HypothesisError(ValueError):
    """A probe was called on data violating the hypotheses it tests."""


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


class SolverError(RuntimeError):
    """Norm solver failed to converge within its iteration cap."""

    def __init__(self, message, bracket=None, iterations=None):
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations
