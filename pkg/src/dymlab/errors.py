"""Exception types shared across the package."""


class DymError(Exception):
    pass


class SingularStateError(DymError, ArithmeticError):
    """Raised by a right-hand side evaluated outside its domain."""


class InvalidInputError(DymError, ValueError):
    """Parameters violate a stated precondition."""


class DegenerateInputError(InvalidInputError):
    """Input sits on a degenerate set (within tolerance) and is refused."""


class AccuracyError(DymError, RuntimeError):
    """A self-consistency check failed to reach its tolerance."""


class NotFoundError(DymError, LookupError):
    """A bracketed search did not find a root."""
