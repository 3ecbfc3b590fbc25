"""Exception hierarchy shared by the kernel, surface model and solvers."""


class YamabeError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(YamabeError, ValueError):
    """Argument outside the mathematical domain of a function."""


class AdmissibilityError(YamabeError, ValueError):
    """A conformal factor violates ``w_a + w_b > -ln cosh(l0/2)`` on some edge.

    Attributes
    ----------
    margin : float
        The (non-positive) value of ``w_a + w_b + ln cosh(l0/2)``.
    edge : int or None
        Id of the first violated edge, when known.
    """

    def __init__(self, message, margin, edge=None):
        super().__init__(message)
        self.margin = margin
        self.edge = edge


class RangeError(YamabeError, OverflowError):
    """A length or intermediate quantity would leave the binary64 range."""


class NumericError(YamabeError, ArithmeticError):
    """Numerical breakdown: quadrature non-convergence, failed factorization."""


class NonConvergenceError(YamabeError):
    """An iterative solver ran out of steps, time or iterations.

    ``trace`` holds the partial flow trace (or ``None`` for Newton) and
    ``residual`` the last max-norm residual.
    """

    def __init__(self, message, residual, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class StiffnessError(NonConvergenceError):
    """The flow step size underflowed."""


class ProbeError(YamabeError):
    """A degeneration probe left the admissible domain too early."""
