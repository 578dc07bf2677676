"""Exception hierarchy shared by all modules."""


class RdstcError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(RdstcError, ValueError):
    """An argument has the wrong shape, length or domain."""


class SingularMatrixError(RdstcError, ArithmeticError):
    """A Hermitian system was not positive definite.

    ``pivot`` is the offending Cholesky pivot (the Schur-complement diagonal
    entry that came out non-positive or vanishingly small) and ``index`` its
    position. ``packet`` is filled in by the simulator when known.
    """

    def __init__(self, message, pivot=float("nan"), index=-1, packet=None):
        super().__init__(message)
        self.pivot = pivot
        self.index = index
        self.packet = packet


class DivergenceError(RdstcError, ArithmeticError):
    """An adaptive update produced non-finite values."""

    def __init__(self, message, iteration, packet=None):
        super().__init__(message)
        self.iteration = iteration
        self.packet = packet


class ConfigError(RdstcError, ValueError):
    """A simulation configuration is invalid."""
