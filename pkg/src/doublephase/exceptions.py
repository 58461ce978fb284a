"""Exception hierarchy shared by all modules."""


class DoublePhaseError(Exception):
    """Base class for errors raised by this package."""


class DomainError(DoublePhaseError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class NonFiniteExponent(DomainError):
    """An exponent evaluator produced NaN or an infinite value."""


class NonFiniteValue(DomainError):
    """A discrete function, density or integrand is not finite."""

    def __init__(self, message, element=None):
        super().__init__(message)
        self.element = element


class ZeroDenominator(DoublePhaseError, ZeroDivisionError):
    """A Rayleigh quotient was evaluated at the zero function."""


class ConvergenceError(DoublePhaseError, RuntimeError):
    """An iterative procedure failed to converge."""


class MaxIterations(ConvergenceError):
    """An iteration budget was exhausted."""


class PreconditionError(DoublePhaseError, ValueError):
    """A documented precondition of an operation does not hold."""


class ConfigError(DoublePhaseError, ValueError):
    """A configuration file or expression could not be parsed."""
