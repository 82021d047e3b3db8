"""Exception types shared across the package."""


class SeislocError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(SeislocError, ValueError):
    """A configuration or parameter value is invalid."""


class OutOfFieldError(SeislocError, ValueError):
    """A position lies outside the monitored field."""


class ConfigMismatchError(SeislocError, ValueError):
    """Two objects built for different field/sensor configurations were combined."""


class ArityError(SeislocError, ValueError):
    """A vector has the wrong length for the requested operation."""


class DegenerateDataError(SeislocError, ValueError):
    """Input data are degenerate (single class, rank-deficient, empty, ...)."""


class NumericalFailureError(SeislocError, RuntimeError):
    """A numerical solver failed (singular/indefinite system, no convergence)."""


class FormatError(SeislocError, ValueError):
    """A file does not conform to the expected schema."""
