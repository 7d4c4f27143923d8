"""Exception types raised by the library."""


class CapacityError(ValueError):
    """A requested size exceeds a configured hard cap."""


class DegenerateVectorError(ArithmeticError):
    """A direction vector has (numerically) zero squared norm."""


class NumericalError(RuntimeError):
    """Internal state became non-finite.

    ``dump`` carries a snapshot of the offending state for diagnosis.
    """

    def __init__(self, message, dump=None):
        super().__init__(message)
        self.dump = dump or {}
