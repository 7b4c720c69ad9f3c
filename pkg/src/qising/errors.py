"""Exception hierarchy shared by all modules."""


class QIsingError(Exception):
    """Base class for every error raised by this package."""


class DomainError(QIsingError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(QIsingError, ZeroDivisionError):
    """A denominator of a q-series or q-shifted factorial vanishes."""


class DivergenceError(QIsingError, ArithmeticError):
    """A non-terminating series is evaluated outside its disk of convergence."""


class NumericalError(QIsingError, ArithmeticError):
    """A numerical procedure produced an inconsistent result."""


class QuadratureError(NumericalError):
    """Quadrature did not reach the requested tolerance."""


class TruncationError(NumericalError):
    """An infinite sum or grid could not be truncated within its cap."""


class SizeError(QIsingError, ValueError):
    """The problem size exceeds what an exact oracle supports."""
