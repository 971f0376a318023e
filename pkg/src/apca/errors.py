"""Exception types raised by the apca package."""


class ApcaError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ApcaError, ValueError):
    """Array shapes do not agree with the model or with each other."""


class SingularGram(ApcaError, ArithmeticError):
    """The Gram matrix Z Z^T is singular and no ridge was allowed."""


class ComplexSpectrum(ApcaError, ArithmeticError):
    """A retained eigenvalue of the augmented matrix has a non-negligible imaginary part."""


class DegenerateEncoder(ApcaError, ArithmeticError):
    """The encoder stationarity system is inconsistent even under a pseudo-inverse."""


class SingleClass(ApcaError, ValueError):
    """A binary task received labels with only one class present."""


class InfeasibleStratification(ApcaError, ValueError):
    """Some class has fewer members than the requested number of folds."""


class NoConvergence(ApcaError, RuntimeWarning):
    """Iterative solver stopped at its iteration cap before meeting tolerance.

    Issued as a warning; the solver still returns its best iterate.
    """


class DataFormatError(ApcaError, ValueError):
    """A dataset, model or result file could not be parsed."""
