"""Exception types raised across the package."""


class QMCError(Exception):
    """Base class for all package errors."""


class InvalidBaseError(QMCError, ValueError):
    """A base is not a prime, or bases are not pairwise distinct."""


class IncompatibleOperandsError(QMCError, ValueError):
    """Operands disagree in base, precision or dimension."""


class DomainError(QMCError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResolutionError(QMCError, ValueError):
    """A quadrature resolution is incompatible with the requested check."""


class ResourceError(QMCError, MemoryError):
    """A request would exceed the configured memory budget."""


class NumericalConsistencyError(QMCError, ArithmeticError):
    """A computed quantity violates a mathematical identity beyond rounding."""
