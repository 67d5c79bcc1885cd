"""Exception hierarchy shared by every module."""


class SperturbError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(SperturbError, ValueError):
    """A constructor or operation received an out-of-range argument."""


class DomainError(SperturbError, ValueError):
    """An evaluation point lies outside the problem domain."""


class LayerTooWideError(InvalidParameterError):
    """The isolation node would land at or beyond the right endpoint.

    Raised when the layer-blocking offset does not fit inside the last
    element, i.e. epsilon is too large for the chosen base mesh.
    """


class SingularMatrixError(SperturbError, ArithmeticError):
    """The tridiagonal system could not be solved."""


class DegenerateRatioError(SperturbError, ArithmeticError):
    """A discrete Green column entry vanished, so r_i is undefined."""
