"""Exception types raised by splicecop."""


class SpliceCopError(Exception):
    """Base class for all package errors."""


class DomainError(SpliceCopError, ValueError):
    """An argument lies outside [0, 1] or a piece layout is malformed."""


class AdmissibilityError(SpliceCopError, ValueError):
    """A curve map or section fails one of the admissibility properties.

    ``where`` holds the offending abscissa, or the pair ``(t1, t2)`` for
    increment violations.
    """

    def __init__(self, message, where=None, prop=None):
        super().__init__(message)
        self.where = where
        self.prop = prop


class BracketingError(SpliceCopError, RuntimeError):
    """A root could not be bracketed on a piece flagged as monotone."""


class ConvergenceError(SpliceCopError, RuntimeError):
    """An iterative estimate failed to settle within its depth budget."""

    def __init__(self, message, estimates=None):
        super().__init__(message)
        self.estimates = estimates


class ConfigError(SpliceCopError, ValueError):
    """A section config file could not be parsed."""


class SolverError(SpliceCopError, RuntimeError):
    """The linear program solver reported infeasibility or failure."""
