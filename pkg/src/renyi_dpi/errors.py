"""Exception hierarchy shared by all modules."""


class RenyiDPIError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(RenyiDPIError, ValueError):
    """Malformed or out-of-contract input (bad shapes, bad numbers)."""


class DimensionMismatchError(InvalidInputError):
    pass


class NonHermitianError(InvalidInputError):
    pass


class NegativeEigenvalueError(InvalidInputError):
    pass


class SingularMatrixError(InvalidInputError):
    pass


class SingularSigmaError(SingularMatrixError):
    """The second argument of a divergence is not strictly positive."""


class NotPSDError(InvalidInputError):
    pass


class TraceNotOneError(InvalidInputError):
    pass


class InvalidParamsError(RenyiDPIError, ValueError):
    """Parameters outside the domain an operation is defined (or proven) on."""


class InvalidPError(InvalidParamsError):
    pass


class InvalidRankError(InvalidParamsError):
    pass


class InvalidEpsilonError(InvalidParamsError):
    pass


class InvalidShapeError(InvalidParamsError):
    pass


class ExponentMismatchError(InvalidParamsError):
    pass


class InvalidRegimeError(InvalidParamsError):
    pass


class ConfigError(InvalidInputError):
    """Unreadable or inconsistent campaign configuration."""
