"""Exception hierarchy shared by the library and the CLI."""


class RLQError(Exception):
    """Base class for all errors raised by rlq."""


class InvalidInputError(RLQError, ValueError):
    """Malformed specification, out-of-range parameter or unsupported combination."""


class PreconditionError(InvalidInputError):
    """A theorem hypothesis required by the requested computation does not hold."""


class DivergenceError(InvalidInputError):
    """An integral requested over an infinite range does not converge."""


class NumericalFailure(RLQError, ArithmeticError):
    """A root finder or optimizer failed to converge."""
