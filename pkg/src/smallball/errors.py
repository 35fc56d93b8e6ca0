"""Exception types shared by all smallball modules."""


class SmallBallError(Exception):
    """Base class for all library errors."""


class DomainError(SmallBallError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class UsageError(SmallBallError, ValueError):
    """The call is malformed (bad combination of arguments, unknown name, ...)."""


class ValidationError(SmallBallError, ValueError):
    """Input data violates a structural invariant (asymmetric kernel table, ...)."""


class OutOfRegimeError(SmallBallError, ValueError):
    """The requested threshold is outside the small-deviation regime."""


class TruncationError(SmallBallError, RuntimeError):
    """A certified series/tail truncation could not be achieved."""


class PrecisionLimitError(SmallBallError, RuntimeError):
    """The requested accuracy is below what the method can deliver."""


class UnboundedCountError(DomainError):
    """Counting below the representable tail floor; carries the floor value."""

    def __init__(self, floor: float, message: str | None = None):
        self.floor = floor
        super().__init__(
            message
            or f"threshold below the representable tail floor {floor:.6g}; "
            "the eigenvalue count is not representable there"
        )


class NotPSDError(ValidationError):
    """A kernel produced a significantly negative eigenvalue."""
