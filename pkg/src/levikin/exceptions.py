"""Exception hierarchy shared by all levikin modules."""


class LevikinError(Exception):
    """Base class for errors raised by levikin."""


class DomainError(LevikinError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class UnsupportedOperationError(LevikinError, TypeError):
    """The operation is not defined for this kind of light source."""


class SingularRegimeError(DomainError):
    """Chemical potential too close to the band edge (photon condensate limit)."""


class RegimeError(DomainError):
    """Inputs violate an approximation the model relies on (e.g. |v| << c)."""


class ConvergenceError(LevikinError, ArithmeticError):
    """A numerical procedure did not reach the requested accuracy."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class FitError(LevikinError, ArithmeticError):
    """A fit could not be performed or did not converge."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ConfigError(LevikinError, ValueError):
    """A scenario file failed validation; ``path`` locates the offending key."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
