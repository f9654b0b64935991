"""Exception types raised across proxnmf."""


class ProxNMFError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ProxNMFError, ValueError):
    pass


class InvalidInput(ProxNMFError, ValueError):
    pass


class ZeroColumn(InvalidInput):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} sums to zero")


class NegativeEntry(InvalidInput):
    def __init__(self, row, column):
        self.row = row
        self.column = column
        super().__init__(f"negative entry at ({row}, {column})")


class SingularGram(ProxNMFError, ArithmeticError):
    """Gram matrix is singular and no ridge was supplied."""


class NonFiniteState(ProxNMFError, FloatingPointError):
    """The iteration produced NaN or Inf; reduce the step or raise the ridge."""


class EmptyAnchorSet(ProxNMFError, ValueError):
    pass


class RegimeMismatch(ProxNMFError, ValueError):
    pass


class NoRegime(ProxNMFError, ValueError):
    pass


class GenerationFailure(ProxNMFError, RuntimeError):
    pass
