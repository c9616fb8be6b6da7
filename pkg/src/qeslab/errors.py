"""Exception and warning types raised across qeslab."""


class QESError(Exception):
    """Base class for qeslab errors."""


class NonConvergence(QESError):
    """An iterative solver hit its iteration cap."""


class DimensionError(QESError, ValueError):
    pass


class SingularBasis(QESError):
    """The basis handed to a projection is numerically rank deficient."""


class NotCertified(QESError):
    pass


class UnsupportedCombination(QESError, ValueError):
    pass


class DegenerateKernel(QESError, ValueError):
    pass


class CountMismatch(UserWarning):
    """Number of located QES energies differs from the invariant-space dimension."""
