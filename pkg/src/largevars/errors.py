"""Exception hierarchy shared by the library and the CLI."""


class LargeVarsError(Exception):
    """Base class for all errors raised by largevars."""


class ValidationError(LargeVarsError, ValueError):
    """Input violates a documented precondition."""


class DimensionError(ValidationError):
    """Sample size is outside the asymptotic regime T/N > k + 1."""


class OutOfRange(ValidationError):
    """Argument outside the supported range (e.g. r outside 1..10 for tables)."""


class UnsupportedCorrection(ValidationError):
    """A finite-sample correction was requested but none is configured."""


class InsufficientSamples(ValidationError):
    """Too few Monte Carlo samples to estimate a quantile table."""


class ParseError(ValidationError):
    """Malformed input file (non-numeric cell, ragged rows, bad table line)."""


class DomainError(ValidationError):
    """Value outside the domain of a transform (e.g. log of a non-positive price)."""


class NumericalError(LargeVarsError, ArithmeticError):
    """Numerical failure inside a linear-algebra routine."""


class NotPositiveDefinite(NumericalError):
    """Cholesky pivot <= 0; usually a rank-deficient cross-product matrix."""


class NotSymmetric(NumericalError):
    """Matrix asymmetry exceeds the symmetrization tolerance."""
