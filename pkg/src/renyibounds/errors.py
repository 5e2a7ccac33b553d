"""Exception types raised across the package."""


class RenyiBoundsError(Exception):
    """Base class for all package errors."""


class NotHermitian(RenyiBoundsError, ValueError):
    pass


class NotPSD(RenyiBoundsError, ValueError):
    pass


class NoConvergence(RenyiBoundsError, ArithmeticError):
    pass


class MissingDims(RenyiBoundsError, ValueError):
    pass


class DimensionMismatch(RenyiBoundsError, ValueError):
    pass


class BadParams(RenyiBoundsError, ValueError):
    pass


class OutOfRange(RenyiBoundsError, ValueError):
    pass


class UnsupportedAlpha(RenyiBoundsError, ValueError):
    pass


class NonCommuting(RenyiBoundsError, ValueError):
    pass


class InvalidState(RenyiBoundsError, ValueError):
    """A state, ensemble, POVM or channel failed one of its invariants.

    The ``invariant`` attribute names the check that failed.
    """

    def __init__(self, message, invariant=None):
        super().__init__(message)
        self.invariant = invariant
