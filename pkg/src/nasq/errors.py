"""Exception hierarchy shared by all nasq modules."""


class NasError(ValueError):
    """Base class for every error raised by nasq."""


class NotHermitian(NasError):
    pass


class DimensionMismatch(NasError):
    pass


class BadDimension(NasError):
    pass


class BadRank(NasError):
    pass


class NotDensityMatrix(NasError):
    pass


class NumericalFailure(NasError):
    pass


class SupportViolation(NasError):
    """The first state is not supported inside the second; the divergence is infinite."""


class ParamOutOfRange(NasError):
    pass


class WrongLength(NasError):
    pass


class InfeasibleCoords(NasError):
    pass


class Unsupported(NasError):
    pass


class UnsupportedKind(Unsupported):
    pass


class NotNpt(NasError):
    pass


class NotEntangled(NasError):
    pass


class ConvergenceFailure(NasError):
    """Raised when an optimizer fails; ``best`` carries the best value found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
