"""Exception types raised by the cogmiso package."""


class CogMisoError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(CogMisoError, ValueError):
    pass


class InvalidParameterError(CogMisoError, ValueError):
    pass


class DegenerateInputError(CogMisoError, ValueError):
    """Raised for inputs with no defined direction, e.g. an all-zero channel."""


class DegenerateGeometryError(CogMisoError, ArithmeticError):
    """Raised when a zero-forcing null space is empty.

    This happens with probability zero for continuous channels, so it is
    surfaced rather than patched over.
    """


class DomainError(CogMisoError, ValueError):
    pass


class QuadratureError(CogMisoError, ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, value=None, abserr=None):
        super().__init__(message)
        self.value = value
        self.abserr = abserr


class SpecValidationError(CogMisoError, ValueError):
    """Experiment spec failed validation; ``problems`` lists offending fields."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid experiment spec: " + "; ".join(self.problems))
