"""Exception hierarchy.

Every error raised by the library derives from :class:`RelaxTomoError`. The
split between validation and numerical failures mirrors the CLI exit codes.
"""


class RelaxTomoError(Exception):
    """Base class for all library errors."""


class ValidationError(RelaxTomoError, ValueError):
    """Malformed input: wrong dimensions, bad parameters, unparseable files."""


class DimensionMismatchError(ValidationError):
    pass


class NumericalError(RelaxTomoError, ArithmeticError):
    """Input is well-formed but the requested quantity does not exist."""


class BoundaryStateError(NumericalError):
    """A logarithm of a rank-deficient state was requested."""


class RangeError(NumericalError):
    """Target expectation value not attainable along a trajectory."""


class NoPreferredDirectionError(NumericalError):
    """Covariance of the images vanishes; no relaxation direction is defined."""


class SingularMatrixError(NumericalError):
    pass
